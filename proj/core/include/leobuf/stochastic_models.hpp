// Arrival and feeder-link channel processes for one satellite.
#pragma once

#include <cstdint>
#include <vector>

#include "leobuf/random.hpp"

namespace leobuf {

/// Poisson packet arrivals; `lambda` is the mean number of packets per slot.
struct PoissonArrivalParams {
    double lambda = 10.0;

    void validate() const;
    friend bool operator==(const PoissonArrivalParams&, const PoissonArrivalParams&) = default;
};

/// Two-state Markov (Gilbert-Elliott) feeder link.
///
/// `alpha` is Pr(Bad -> Good), `beta` is Pr(Good -> Bad). A Good slot
/// forwards `c` packets, a Bad slot forwards none.
struct GilbertElliottParams {
    double alpha = 0.7;
    double beta = 0.3;
    std::int64_t c = 16;

    double alpha_bar() const noexcept { return 1.0 - alpha; }  ///< Pr(Bad -> Bad)
    double beta_bar() const noexcept { return 1.0 - beta; }    ///< Pr(Good -> Good)

    void validate() const;
    friend bool operator==(const GilbertElliottParams&, const GilbertElliottParams&) = default;
};

enum class ChannelState : std::uint8_t { Bad = 0, Good = 1 };

constexpr std::int64_t service_rate(ChannelState s, const GilbertElliottParams& ch) noexcept {
    return s == ChannelState::Good ? ch.c : 0;
}

struct StationaryDistribution {
    double bad;   ///< pi0
    double good;  ///< pi1
};

/// (beta, alpha) / (alpha + beta). Throws DegenerateChainError when alpha = beta = 0.
StationaryDistribution stationary_distribution(const GilbertElliottParams& ch);

/// One step of the channel chain; consumes exactly one uniform.
ChannelState step_channel(ChannelState state, const GilbertElliottParams& ch, RandomStream& rng);

/// Draws a state from the stationary law; consumes exactly one uniform.
ChannelState draw_stationary_state(const GilbertElliottParams& ch, RandomStream& rng);

/// c * pi1 - lambda. Positive iff the single-satellite queue is stable.
double stability_margin(const PoissonArrivalParams& arr, const GilbertElliottParams& ch);

/// Poisson sampler with precomputed state.
///
/// For lambda <= 30 it inverts a cached CDF table with a single uniform.
/// Larger means use Hoermann's transformed rejection (PTRS). Output is a
/// pure function of the stream, so a seeded stream reproduces exactly.
class PoissonSampler {
public:
    explicit PoissonSampler(PoissonArrivalParams arr);

    std::int64_t operator()(RandomStream& rng) const;

    double lambda() const noexcept { return lambda_; }

private:
    std::int64_t sample_inversion(RandomStream& rng) const;
    std::int64_t sample_ptrs(RandomStream& rng) const;

    double lambda_;
    std::vector<double> cdf_;
    // PTRS constants
    double sqrt_lambda_ = 0, log_lambda_ = 0, b_ = 0, a_ = 0, inv_alpha_ = 0, vr_ = 0;
};

/// Convenience wrapper; builds a sampler per call. Use PoissonSampler in loops.
std::int64_t sample_arrivals(const PoissonArrivalParams& arr, RandomStream& rng);

/// log(k!) without touching global state (std::lgamma writes signgam on glibc).
double log_factorial(std::int64_t k);

} // namespace leobuf
