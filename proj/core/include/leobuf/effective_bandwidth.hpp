// Effective-bandwidth analysis of the single-satellite queue.
//
// The tail Pr(q > tau) of a stable queue decays like exp(-theta* tau), where
// theta* > 0 is the root of Lambda_A(theta) + Lambda_D(-theta) = 0 and the
// Lambdas are the asymptotic log moment generating functions of the arrival
// and service processes.
#pragma once

#include <cstdint>
#include <functional>

#include "leobuf/stochastic_models.hpp"

namespace leobuf {

/// lambda * (e^theta - 1).
double lmgf_arrival(const PoissonArrivalParams& arr, double theta);

/// Log spectral radius of the tilted channel matrix
/// [[abar, alpha e^{c theta}], [beta, bbar e^{c theta}]].
///
/// The e^{c theta} factor is pulled out for theta > 0, so the value stays
/// finite for c*theta well past 700 in either direction. Throws
/// OverflowGuardError only when the result is not representable.
double lmgf_departure(const GilbertElliottParams& ch, double theta);

struct QosSolution {
    double theta_star;
    double residual;
    int iterations;
};

struct RootOptions {
    double tol = 1e-10;         ///< stop once |f| <= tol
    double lower = 1e-8;        ///< theta = 0 is always a trivial root
    double theta_max = 1e3;     ///< give up expanding the bracket past this
    int max_iterations = 2000;
};

/// Finds the positive root of a function that is negative just above
/// `opts.lower` and eventually positive. The upper bracket grows
/// geometrically, then the bracket is bisected. If the bracket collapses to
/// adjacent doubles before |f| <= tol the endpoint with the smaller |f| is
/// returned; its residual is then at the rounding floor of f.
QosSolution find_positive_root(const std::function<double(double)>& f, const RootOptions& opts = {});

/// Root of Lambda_A(theta) + Lambda_D(-theta) = 0. Throws InstabilityError if
/// the stability margin is not positive and NoBracketError if no sign change
/// is found below opts.theta_max (e.g. lambda = 0).
QosSolution solve_qos_exponent(const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                               const RootOptions& opts = {});

inline QosSolution solve_qos_exponent(const PoissonArrivalParams& arr, const GilbertElliottParams& ch,
                                      double tol) {
    RootOptions opts;
    opts.tol = tol;
    return solve_qos_exponent(arr, ch, opts);
}

/// Exponent of the pooled queue of L satellites: L * theta_star.
double virtual_queue_exponent(double theta_star, std::int64_t satellites);

/// exp(-theta * tau).
double overflow_bound(double theta, double tau);

/// Smallest buffer whose bound exp(-theta * q) reaches `target_prob`:
/// ceil(-ln(target_prob) / theta).
std::int64_t required_buffer(double theta, double target_prob);

} // namespace leobuf
