#include "leobuf/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "leobuf/allocation.hpp"
#include "leobuf/errors.hpp"

namespace leobuf {

namespace {

std::vector<double> truncated_poisson(double lambda, std::int64_t a_max) {
    std::vector<double> pmf(static_cast<std::size_t>(a_max) + 1, 0.0);
    if (lambda == 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    const double log_lambda = std::log(lambda);
    double head = 0.0;
    for (std::int64_t k = 0; k < a_max; ++k) {
        pmf[static_cast<std::size_t>(k)] =
            std::exp(-lambda + static_cast<double>(k) * log_lambda - log_factorial(k));
        head += pmf[static_cast<std::size_t>(k)];
    }
    pmf.back() = std::max(0.0, 1.0 - head);
    return pmf;
}

// Pushes mass `m` at queue level q through the arrival pmf with service d.
void spread(std::vector<double>& out, const std::vector<double>& pmf, std::int64_t q, std::int64_t d, double m,
            std::int64_t q_cap) {
    const auto a_max = static_cast<std::int64_t>(pmf.size()) - 1;
    // Arrivals a with q + a - d <= 0 all land on 0; those with q + a - d >= q_cap land on q_cap.
    for (std::int64_t a = 0; a <= a_max; ++a) {
        const std::int64_t next = std::clamp<std::int64_t>(q + a - d, 0, q_cap);
        out[static_cast<std::size_t>(next)] += m * pmf[static_cast<std::size_t>(a)];
    }
}

void transition(const std::vector<double>& bad, const std::vector<double>& good, std::vector<double>& next_bad,
                std::vector<double>& next_good, const std::vector<double>& pmf, const GilbertElliottParams& ch) {
    const auto q_cap = static_cast<std::int64_t>(bad.size()) - 1;
    std::vector<double> after_bad(bad.size(), 0.0);   // queue after a Bad-served slot
    std::vector<double> after_good(bad.size(), 0.0);  // queue after a Good-served slot
    for (std::int64_t q = 0; q <= q_cap; ++q) {
        const auto i = static_cast<std::size_t>(q);
        if (bad[i] != 0.0) spread(after_bad, pmf, q, 0, bad[i], q_cap);
        if (good[i] != 0.0) spread(after_good, pmf, q, ch.c, good[i], q_cap);
    }
    const double a = ch.alpha, abar = ch.alpha_bar(), b = ch.beta, bbar = ch.beta_bar();
    for (std::size_t i = 0; i < bad.size(); ++i) {
        next_bad[i] = abar * after_bad[i] + b * after_good[i];
        next_good[i] = a * after_bad[i] + bbar * after_good[i];
    }
}

} // namespace

double SingleLeoStationary::marginal(std::int64_t q) const {
    if (q < 0 || q > q_cap()) return 0.0;
    return bad[static_cast<std::size_t>(q)] + good[static_cast<std::size_t>(q)];
}

std::int64_t default_arrival_cap(double lambda) {
    return static_cast<std::int64_t>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 20.0));
}

SingleLeoStationary single_leo_stationary(const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                          const TruncatedChainSpec& spec) {
    arr.validate();
    ch.validate();
    if (spec.q_cap < 1) throw std::invalid_argument("q_cap must be at least 1");
    if (!(spec.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const auto pi = stationary_distribution(ch);
    if (spec.require_stable && !(stability_margin(arr, ch) > 0.0))
        throw InstabilityError("single-satellite queue is unstable for these parameters");

    const std::int64_t a_max = spec.a_max > 0 ? spec.a_max : default_arrival_cap(arr.lambda);
    const auto pmf = truncated_poisson(arr.lambda, a_max);

    const auto n = static_cast<std::size_t>(spec.q_cap) + 1;
    SingleLeoStationary dist;
    dist.bad.assign(n, 0.0);
    dist.good.assign(n, 0.0);
    dist.bad[0] = pi.bad;
    dist.good[0] = pi.good;

    std::vector<double> next_bad(n), next_good(n);
    for (dist.iterations = 0; dist.iterations < spec.max_iterations; ++dist.iterations) {
        transition(dist.bad, dist.good, next_bad, next_good, pmf, ch);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            change = std::max({change, std::abs(next_bad[i] - dist.bad[i]), std::abs(next_good[i] - dist.good[i])});
        dist.bad.swap(next_bad);
        dist.good.swap(next_good);
        dist.last_change = change;
        if (change <= spec.tol) {
            dist.converged = true;
            ++dist.iterations;
            break;
        }
    }

    if (!dist.converged) {
        std::ostringstream msg;
        msg << "power iteration stopped after " << dist.iterations << " iterations (change " << dist.last_change
            << ")";
        dist.warnings.push_back(msg.str());
    }
    dist.boundary_mass = dist.marginal(spec.q_cap);
    if (dist.boundary_mass >= 1e-9) {
        std::ostringstream msg;
        msg << "truncation insufficient: mass " << dist.boundary_mass << " at q_cap = " << spec.q_cap;
        dist.warnings.push_back(msg.str());
    }
    return dist;
}

SingleLeoStationary apply_slot_transition(const SingleLeoStationary& dist, const PoissonArrivalParams& arr,
                                          const GilbertElliottParams& ch, std::int64_t a_max) {
    const auto pmf = truncated_poisson(arr.lambda, a_max > 0 ? a_max : default_arrival_cap(arr.lambda));
    SingleLeoStationary out;
    out.bad.assign(dist.bad.size(), 0.0);
    out.good.assign(dist.good.size(), 0.0);
    transition(dist.bad, dist.good, out.bad, out.good, pmf, ch);
    out.boundary_mass = out.marginal(out.q_cap());
    return out;
}

double oracle_overflow(const SingleLeoStationary& dist, std::int64_t tau) {
    double tail = 0.0;
    for (std::int64_t q = std::max<std::int64_t>(tau + 1, 0); q <= dist.q_cap(); ++q) tail += dist.marginal(q);
    return tail;
}

BruteForceAllocation brute_force_allocation(std::int64_t total, std::span<const ChannelState> prev_states,
                                            const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                            double grid_step) {
    if (prev_states.empty()) throw std::invalid_argument("at least one satellite required");
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
    const auto n = static_cast<std::int64_t>(prev_states.size());
    const auto z = static_cast<std::int64_t>(std::count(prev_states.begin(), prev_states.end(), ChannelState::Good));
    const double q = static_cast<double>(total);

    auto objective_for = [&](double x, double y) {
        double worst = -std::numeric_limits<double>::infinity();
        if (z < n) worst = std::max(worst, expected_next_load(x, ChannelState::Bad, arr, ch));
        if (z > 0) worst = std::max(worst, expected_next_load(y, ChannelState::Good, arr, ch));
        return worst;
    };

    double best_x = 0.0, best_y = 0.0;
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double x, double y) {
        const double v = objective_for(x, y);
        if (v < best) {
            best = v;
            best_x = x;
            best_y = y;
        }
    };

    if (z == 0) {
        consider(q / static_cast<double>(n), 0.0);
    } else if (z == n) {
        consider(0.0, q / static_cast<double>(n));
    } else {
        const double y_max = q / static_cast<double>(z);
        const auto steps = static_cast<std::int64_t>(std::floor(y_max / grid_step));
        for (std::int64_t k = 0; k <= steps; ++k) {
            const double y = static_cast<double>(k) * grid_step;
            consider(std::max(0.0, (q - y * static_cast<double>(z)) / static_cast<double>(n - z)), y);
        }
        consider(0.0, y_max);
    }

    BruteForceAllocation result;
    result.objective = best;
    result.bad_target = best_x;
    result.good_target = best_y;
    result.targets.reserve(prev_states.size());
    for (auto s : prev_states) result.targets.push_back(s == ChannelState::Good ? best_y : best_x);
    return result;
}

BruteForceAllocation brute_force_simplex(std::int64_t total, std::span<const ChannelState> prev_states,
                                         const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                         double grid_step) {
    if (prev_states.empty()) throw std::invalid_argument("at least one satellite required");
    const std::size_t n = prev_states.size();
    const auto units = static_cast<std::int64_t>(std::llround(static_cast<double>(total) / grid_step));
    std::vector<std::int64_t> alloc(n, 0);
    std::vector<double> targets(n);
    BruteForceAllocation best{{}, std::numeric_limits<double>::infinity(), 0.0, 0.0};

    // Enumerate compositions of `units` into n non-negative parts.
    std::function<void(std::size_t, std::int64_t)> walk = [&](std::size_t l, std::int64_t left) {
        if (l + 1 == n) {
            alloc[l] = left;
            for (std::size_t i = 0; i < n; ++i) targets[i] = static_cast<double>(alloc[i]) * grid_step;
            const double v = allocation_objective(targets, prev_states, arr, ch);
            if (v < best.objective) {
                best.objective = v;
                best.targets = targets;
            }
            return;
        }
        for (std::int64_t k = 0; k <= left; ++k) {
            alloc[l] = k;
            walk(l + 1, left - k);
        }
    };
    walk(0, units);
    return best;
}

} // namespace leobuf
