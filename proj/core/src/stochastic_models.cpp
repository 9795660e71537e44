#include "leobuf/stochastic_models.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "leobuf/errors.hpp"

namespace leobuf {

namespace {

constexpr double kInversionLimit = 30.0;

bool in_unit_interval(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

} // namespace

void PoissonArrivalParams::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw ConfigError("arrival rate must be finite and non-negative", "lambda");
}

void GilbertElliottParams::validate() const {
    if (!in_unit_interval(alpha)) throw ConfigError("must lie in [0, 1]", "alpha");
    if (!in_unit_interval(beta)) throw ConfigError("must lie in [0, 1]", "beta");
    if (c < 1) throw ConfigError("service rate must be a positive integer", "c");
}

StationaryDistribution stationary_distribution(const GilbertElliottParams& ch) {
    const double sum = ch.alpha + ch.beta;
    if (!(sum > 0.0))
        throw DegenerateChainError("stationary distribution undefined for alpha = beta = 0");
    const double good = ch.alpha / sum;
    return {1.0 - good, good};
}

ChannelState step_channel(ChannelState state, const GilbertElliottParams& ch, RandomStream& rng) {
    const double u = rng.uniform();
    if (state == ChannelState::Bad) return u < ch.alpha ? ChannelState::Good : ChannelState::Bad;
    return u < ch.beta ? ChannelState::Bad : ChannelState::Good;
}

ChannelState draw_stationary_state(const GilbertElliottParams& ch, RandomStream& rng) {
    const double good = stationary_distribution(ch).good;
    return rng.uniform() < good ? ChannelState::Good : ChannelState::Bad;
}

double stability_margin(const PoissonArrivalParams& arr, const GilbertElliottParams& ch) {
    return static_cast<double>(ch.c) * stationary_distribution(ch).good - arr.lambda;
}

double log_factorial(std::int64_t k) {
    static const std::array<double, 16> table = [] {
        std::array<double, 16> t{};
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    if (k < 0) return std::numeric_limits<double>::infinity();
    if (k < static_cast<std::int64_t>(table.size())) return table[static_cast<std::size_t>(k)];
    // Stirling series, error below 1e-15 for k >= 16.
    const double x = static_cast<double>(k);
    const double x2 = x * x;
    return (x + 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + 1.0 / (12.0 * x) -
           1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x2 * x2 * x);
}

PoissonSampler::PoissonSampler(PoissonArrivalParams arr) : lambda_(arr.lambda) {
    arr.validate();
    if (lambda_ <= kInversionLimit) {
        double p = std::exp(-lambda_);
        double acc = p;
        cdf_.push_back(acc);
        for (std::int64_t k = 1; acc < 1.0; ++k) {
            p *= lambda_ / static_cast<double>(k);
            if (p < 1e-300 || (static_cast<double>(k) > lambda_ && p < 1e-18)) break;
            acc += p;
            cdf_.push_back(acc);
        }
    } else {
        sqrt_lambda_ = std::sqrt(lambda_);
        log_lambda_ = std::log(lambda_);
        b_ = 0.931 + 2.53 * sqrt_lambda_;
        a_ = -0.059 + 0.02483 * b_;
        inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
        vr_ = 0.9277 - 3.6224 / (b_ - 2.0);
    }
}

std::int64_t PoissonSampler::operator()(RandomStream& rng) const {
    if (lambda_ == 0.0) return 0;
    return cdf_.empty() ? sample_ptrs(rng) : sample_inversion(rng);
}

std::int64_t PoissonSampler::sample_inversion(RandomStream& rng) const {
    const double u = rng.uniform();
    const std::size_t n = cdf_.size();
    for (std::size_t k = 0; k < n; ++k)
        if (u < cdf_[k]) return static_cast<std::int64_t>(k);
    // Rounding left u above the cached tail; continue the sequential search.
    auto k = static_cast<std::int64_t>(n);
    double acc = cdf_.back();
    double p = std::exp(-lambda_ + static_cast<double>(k) * std::log(lambda_) - log_factorial(k));
    while (u >= acc && p > 0.0) {
        acc += p;
        if (u < acc) return k;
        ++k;
        p *= lambda_ / static_cast<double>(k);
    }
    return k;
}

std::int64_t PoissonSampler::sample_ptrs(RandomStream& rng) const {
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a_ / us + b_) * u + lambda_ + 0.43));
        if (us >= 0.07 && v <= vr_) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha_) - std::log(a_ / (us * us) + b_) <=
            -lambda_ + static_cast<double>(k) * log_lambda_ - log_factorial(k))
            return k;
    }
}

std::int64_t sample_arrivals(const PoissonArrivalParams& arr, RandomStream& rng) {
    return PoissonSampler(arr)(rng);
}

} // namespace leobuf
