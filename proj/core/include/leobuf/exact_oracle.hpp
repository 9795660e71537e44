// Independent ground truth for the simulator and the allocator.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leobuf/stochastic_models.hpp"

namespace leobuf {

/// Truncation of the single-satellite (queue, channel) chain.
struct TruncatedChainSpec {
    std::int64_t q_cap = 600;      ///< queue lengths above this are clamped to it
    std::int64_t a_max = 0;        ///< 0 selects lambda + 12 sqrt(lambda) + 20
    double tol = 1e-13;            ///< max-norm change between iterates
    std::int64_t max_iterations = 2'000'000;
    bool require_stable = true;    ///< throw InstabilityError for unstable parameters
};

/// Joint stationary law over (queue length 0..q_cap) x {Bad, Good}. The
/// channel coordinate is the state that serves the current slot.
struct SingleLeoStationary {
    std::vector<double> bad;   ///< bad[q]  = Pr(queue = q, channel Bad)
    std::vector<double> good;  ///< good[q] = Pr(queue = q, channel Good)
    std::int64_t iterations = 0;
    double last_change = 0.0;
    double boundary_mass = 0.0;  ///< Pr(queue = q_cap)
    bool converged = false;
    std::vector<std::string> warnings;

    std::int64_t q_cap() const noexcept { return static_cast<std::int64_t>(bad.size()) - 1; }
    double marginal(std::int64_t q) const;
};

/// Power iteration on the exact slot transition
///   q' = min(q_cap, max(0, q + a - rate(ch))),  ch' ~ step(ch),
/// with a ~ Poisson(lambda) truncated at a_max (tail mass lumped at a_max).
/// Emits a warning if the mass at q_cap is at least 1e-9.
SingleLeoStationary single_leo_stationary(const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                          const TruncatedChainSpec& spec = {});

/// Applies one slot transition to a joint distribution; exposed for fixed-point checks.
SingleLeoStationary apply_slot_transition(const SingleLeoStationary& dist, const PoissonArrivalParams& arr,
                                          const GilbertElliottParams& ch, std::int64_t a_max = 0);

/// Pr(queue > tau) under the stationary law.
double oracle_overflow(const SingleLeoStationary& dist, std::int64_t tau);

/// Truncation point used when TruncatedChainSpec::a_max is 0.
std::int64_t default_arrival_cap(double lambda);

struct BruteForceAllocation {
    std::vector<double> targets;
    double objective;
    double bad_target;
    double good_target;
};

/// Exhaustive minimiser of the maximum expected next-slot load. All
/// satellites that share a previous state share a target, so the search
/// walks the line x (L - Z) + y Z = Q in steps of `grid_step` in y
/// (or in x when Z = 0), endpoints included.
BruteForceAllocation brute_force_allocation(std::int64_t total, std::span<const ChannelState> prev_states,
                                            const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                            double grid_step = 0.01);

/// Full simplex scan without the two-value reduction; used to confirm the
/// reduction on small instances. Cost grows as (Q/grid_step)^(L-1).
BruteForceAllocation brute_force_simplex(std::int64_t total, std::span<const ChannelState> prev_states,
                                         const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                         double grid_step);

} // namespace leobuf
