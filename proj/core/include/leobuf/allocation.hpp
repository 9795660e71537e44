// Buffer-management regimes and the minimum queue-length allocation
// (MQLA-ISL) that rebalances stored packets over inter-satellite links.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "leobuf/stochastic_models.hpp"

namespace leobuf {

enum class PolicyKind : std::uint8_t { NoIsl, VirtualQueue, MqlaIsl };

std::string_view to_string(PolicyKind p) noexcept;           ///< "no-isl", "virtual", "mqla"
std::optional<PolicyKind> parse_policy(std::string_view s) noexcept;

/// Which branch of the closed-form min-max solution applied.
///   I:   previously-Bad satellites are emptied, Good ones split Q.
///   II:  previously-Good satellites are emptied, Bad ones split Q.
///   III: interior solution equalising the expected next-slot loads.
enum class AllocationCase : std::uint8_t { I = 1, II = 2, III = 3 };

struct AllocationDecision {
    std::vector<double> fractional;       ///< continuous optimum, sums to Q
    std::vector<std::int64_t> targets;    ///< integerized, sums to Q exactly
    AllocationCase case_tag = AllocationCase::III;
    double delta = 0.0;                   ///< c (bbar - alpha)
    std::int64_t z_count = 0;             ///< satellites whose previous state was Good
    double bad_target = 0.0;              ///< x: share of a previously-Bad satellite
    double good_target = 0.0;             ///< y: share of a previously-Good satellite
};

/// Expected number of packets a satellite holds after the next slot,
/// conditioned on its previous channel state: q + lambda - E[d | prev].
double expected_next_load(double q, ChannelState prev_state, const PoissonArrivalParams& arr,
                          const GilbertElliottParams& ch);

/// max over satellites of expected_next_load(targets[l], prev_states[l]).
double allocation_objective(std::span<const double> targets, std::span<const ChannelState> prev_states,
                            const PoissonArrivalParams& arr, const GilbertElliottParams& ch);

/// Closed-form minimiser of the maximum expected next-slot load subject to
/// sum(targets) = Q and targets >= 0.
///
/// With Z Good satellites, Case I needs Z > 0 and delta > Q/Z; Case II needs
/// Z < L and delta < -Q/(L-Z); otherwise Case III.
AllocationDecision mqla_allocate(std::int64_t total, std::span<const ChannelState> prev_states,
                                 const GilbertElliottParams& ch);

/// Case selection and the two per-group shares for `total` packets over
/// `satellites` satellites of which `good_count` were Good last slot.
struct AllocationLevels {
    AllocationCase case_tag;
    double delta;
    double bad_target;
    double good_target;
};
AllocationLevels mqla_levels(std::int64_t total, std::int64_t satellites, std::int64_t good_count,
                             const GilbertElliottParams& ch);

/// Largest-remainder rounding to integers summing to `total`. Remainder
/// ties go to the lower index. Throws SumMismatchError if the input does not
/// sum to `total` within 1e-6.
std::vector<std::int64_t> integerize(std::span<const double> fractional, std::int64_t total);

/// Allocation-free variant of integerize for hot loops. `order` is scratch.
void integerize_into(std::span<const double> fractional, std::int64_t total, std::span<std::int64_t> out,
                     std::vector<std::size_t>& order);

/// Caps every entry at `cap` and pushes the excess onto the currently
/// smallest entries (lowest index first on ties). Requires sum <= L * cap.
void cap_targets(std::span<std::int64_t> targets, std::int64_t cap);

} // namespace leobuf
