#include "leobuf/effective_bandwidth.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "leobuf/errors.hpp"

namespace leobuf {

double lmgf_arrival(const PoissonArrivalParams& arr, double theta) {
    return arr.lambda * std::expm1(theta);
}

double lmgf_departure(const GilbertElliottParams& ch, double theta) {
    if (theta == 0.0) return 0.0;
    const double abar = ch.alpha_bar();
    const double bbar = ch.beta_bar();
    const double ab4 = 4.0 * ch.alpha * ch.beta;
    const double ct = static_cast<double>(ch.c) * theta;

    // Discriminant written as (abar - bbar E)^2 + 4 alpha beta E, which is
    // never negative, instead of (abar + bbar E)^2 - 4 (bbar - alpha) E.
    double value;
    if (ct > 0.0) {
        const double s = std::exp(-ct);  // 1 / E
        const double rho_scaled = 0.5 * (abar * s + bbar + std::sqrt((abar * s - bbar) * (abar * s - bbar) + ab4 * s));
        value = ct + std::log(rho_scaled);
    } else {
        const double e = std::exp(ct);
        const double rho = 0.5 * (abar + bbar * e + std::sqrt((abar - bbar * e) * (abar - bbar * e) + ab4 * e));
        value = std::log(rho);
    }
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "lmgf_departure not representable at c*theta = " << ct;
        throw OverflowGuardError(msg.str());
    }
    return value;
}

QosSolution find_positive_root(const std::function<double(double)>& f, const RootOptions& opts) {
    double lo = opts.lower;
    double f_lo = f(lo);
    if (!(f_lo < 0.0)) throw NoBracketError("root function is not negative at the lower bracket");

    double hi = 2.0 * std::max(opts.tol, lo);
    double f_hi = f(hi);
    int iterations = 0;
    while (!(f_hi > 0.0)) {
        if (f_hi < 0.0) {
            lo = hi;
            f_lo = f_hi;
        }
        hi *= 2.0;
        if (hi > opts.theta_max) throw NoBracketError("no sign change below theta_max");
        f_hi = f(hi);
        ++iterations;
    }

    for (; iterations < opts.max_iterations; ++iterations) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        if (std::abs(f_mid) <= opts.tol) return {mid, f_mid, iterations + 1};
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if (std::abs(f_lo) <= std::abs(f_hi)) return {lo, f_lo, iterations};
    return {hi, f_hi, iterations};
}

QosSolution solve_qos_exponent(const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                               const RootOptions& opts) {
    arr.validate();
    ch.validate();
    const double margin = stability_margin(arr, ch);
    if (!(margin > 0.0)) {
        std::ostringstream msg;
        msg << "unstable queue: c*pi1 - lambda = " << margin << " <= 0";
        throw InstabilityError(msg.str());
    }
    return find_positive_root([&](double t) { return lmgf_arrival(arr, t) + lmgf_departure(ch, -t); }, opts);
}

double virtual_queue_exponent(double theta_star, std::int64_t satellites) {
    if (!(theta_star > 0.0)) throw std::invalid_argument("theta_star must be positive");
    if (satellites < 1) throw std::invalid_argument("satellite count must be at least 1");
    return static_cast<double>(satellites) * theta_star;
}

double overflow_bound(double theta, double tau) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
    return std::exp(-theta * tau);
}

std::int64_t required_buffer(double theta, double target_prob) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(target_prob > 0.0 && target_prob < 1.0)) throw std::invalid_argument("target probability must lie in (0, 1)");
    const double q = std::ceil(-std::log(target_prob) / theta);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(q));
}

} // namespace leobuf
