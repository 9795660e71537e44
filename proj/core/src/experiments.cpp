#include "leobuf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "leobuf/allocation.hpp"
#include "leobuf/effective_bandwidth.hpp"
#include "leobuf/errors.hpp"
#include "leobuf/exact_oracle.hpp"

namespace leobuf {

namespace {

std::string format_value(ExperimentKind kind, double v) {
    if (kind == ExperimentKind::SweepAlpha || kind == ExperimentKind::SweepBeta) return format_double(v);
    return std::to_string(std::llround(v));
}

std::vector<double> grid(int first, int last, int step, double scale) {
    std::vector<double> out;
    for (int k = first; k <= last; k += step) out.push_back(static_cast<double>(k) / scale);
    return out;
}

std::vector<std::uint64_t> seeds_for(std::uint64_t master, std::uint64_t point, std::int64_t replications) {
    std::vector<std::uint64_t> seeds;
    for (std::int64_t r = 0; r < replications; ++r)
        seeds.push_back(replication_seed(master, point, static_cast<std::uint64_t>(r)));
    return seeds;
}

OverflowStats merged(const std::vector<OverflowStats>& reps) {
    OverflowStats out = OverflowStats::empty(reps.front().thresholds);
    for (const auto& r : reps) out = merge_stats(out, r);
    return out;
}

std::string pass_str(bool ok) { return ok ? "pass" : "fail"; }

ExperimentResult run_sweep(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.table.header = {"sweep_var", "value", "policy", "tau", "p_hat", "ci", "samples"};

    std::vector<double> values = spec.values.empty() ? default_sweep_values(spec.kind) : spec.values;
    std::sort(values.begin(), values.end());
    const std::string var(sweep_variable(spec.kind));

    auto emit = [&](const ConstellationConfig& cfg, const std::string& value_text, std::uint64_t point) {
        const bool unstable = !(stability_margin(cfg.arrivals, cfg.channel) > 0.0);
        if (unstable) result.notes.push_back("unstable: " + var + "=" + value_text + " (c*pi1 <= lambda); p_hat set to 1");
        for (PolicyKind policy : spec.policies) {
            ConstellationConfig c = cfg;
            c.policy = policy;
            const auto reps = run_replications(c, seeds_for(cfg.seed, point, spec.replications), spec.threads);
            const OverflowStats stats = merged(reps);
            if (c.q_max) {
                // Drop mode: one row at tau = q_max with the per-slot loss-event probability.
                OverflowEstimate est = estimate_drop_probability(stats);
                if (unstable) est = {1.0, 0.0};
                result.table.rows.push_back({var, value_text, std::string(to_string(policy)), std::to_string(*c.q_max),
                                             format_double(est.p_hat), format_double(est.ci_halfwidth),
                                             std::to_string(stats.samples)});
                continue;
            }
            for (std::int64_t tau : c.thresholds) {
                OverflowEstimate est = estimate_overflow(stats, tau);
                if (unstable) est = {1.0, 0.0};
                result.table.rows.push_back({var, value_text, std::string(to_string(policy)), std::to_string(tau),
                                             format_double(est.p_hat), format_double(est.ci_halfwidth),
                                             std::to_string(stats.samples)});
            }
        }
    };

    if (spec.kind == ExperimentKind::SweepTau) {
        if (spec.base.q_max) throw ConfigError("sweep-tau tracks thresholds and cannot run in drop mode", "mode");
        ConstellationConfig cfg = spec.base;
        cfg.thresholds.clear();
        for (double v : values) cfg.thresholds.push_back(std::llround(v));
        cfg.thresholds.erase(std::unique(cfg.thresholds.begin(), cfg.thresholds.end()), cfg.thresholds.end());
        cfg.validate();
        // One run tracks every threshold; rows are still grouped by value first.
        const bool unstable = !(stability_margin(cfg.arrivals, cfg.channel) > 0.0);
        if (unstable) result.notes.push_back("unstable: c*pi1 <= lambda; p_hat set to 1");
        std::vector<OverflowStats> per_policy;
        for (PolicyKind policy : spec.policies) {
            ConstellationConfig c = cfg;
            c.policy = policy;
            per_policy.push_back(merged(run_replications(c, seeds_for(cfg.seed, 0, spec.replications), spec.threads)));
        }
        for (std::int64_t tau : cfg.thresholds) {
            for (std::size_t i = 0; i < spec.policies.size(); ++i) {
                OverflowEstimate est = estimate_overflow(per_policy[i], tau);
                if (unstable) est = {1.0, 0.0};
                result.table.rows.push_back({var, std::to_string(tau), std::string(to_string(spec.policies[i])),
                                             std::to_string(tau), format_double(est.p_hat),
                                             format_double(est.ci_halfwidth), std::to_string(per_policy[i].samples)});
            }
        }
        return result;
    }

    for (std::size_t k = 0; k < values.size(); ++k) {
        const ConstellationConfig cfg = apply_sweep_value(spec.base, spec.kind, values[k]);
        emit(cfg, format_value(spec.kind, values[k]), k);
    }
    return result;
}

ExperimentResult run_analyze(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.table.header = {"tau", "theta_star", "L_theta_star", "bound_no_isl", "bound_virtual",
                           "required_buffer_no_isl", "required_buffer_virtual"};
    const auto& cfg = spec.base;
    const QosSolution qos = solve_qos_exponent(cfg.arrivals, cfg.channel);
    const double pooled = virtual_queue_exponent(qos.theta_star, cfg.satellites);
    const auto buf = required_buffer(qos.theta_star, spec.target_prob);
    const auto buf_pooled = required_buffer(pooled, spec.target_prob);
    for (std::int64_t tau : cfg.thresholds) {
        const auto t = static_cast<double>(tau);
        result.table.rows.push_back({std::to_string(tau), format_double(qos.theta_star), format_double(pooled),
                                     format_double(overflow_bound(qos.theta_star, t)),
                                     format_double(overflow_bound(pooled, t)), std::to_string(buf),
                                     std::to_string(buf_pooled)});
    }
    return result;
}

ExperimentResult run_validate(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.table.header = {"check", "case", "expected", "observed", "tolerance", "result"};
    auto row = [&](std::string check, std::string which, double expected, double observed, double tol, bool ok) {
        result.all_passed = result.all_passed && ok;
        result.table.rows.push_back({std::move(check), std::move(which), format_double(expected),
                                     format_double(observed), format_double(tol), pass_str(ok)});
    };
    const auto& base = spec.base;

    // Root solver contract and pooled-exponent scaling.
    const RootOptions defaults;
    const QosSolution coarse = solve_qos_exponent(base.arrivals, base.channel, defaults);
    row("qos_residual", "theta=" + format_double(coarse.theta_star), 0.0, coarse.residual, defaults.tol,
        std::abs(coarse.residual) <= defaults.tol);
    const QosSolution qos = solve_qos_exponent(base.arrivals, base.channel, 1e-15);
    for (std::int64_t l : {2, 5, 10}) {
        const double scale = static_cast<double>(l);
        RootOptions opts;
        opts.tol = 1e-15;
        const QosSolution scaled = find_positive_root(
            [&](double t) {
                return scale * lmgf_arrival(base.arrivals, t / scale) + scale * lmgf_departure(base.channel, -t / scale);
            },
            opts);
        const double expected = virtual_queue_exponent(qos.theta_star, l);
        const double rel = std::abs(scaled.theta_star - expected) / expected;
        row("pooled_exponent", "L=" + std::to_string(l), expected, scaled.theta_star, 1e-9, rel <= 1e-9);
    }

    // Closed-form allocation vs brute force.
    std::mt19937_64 gen(derive_seed(base.seed, {0x6c656d6d61ULL}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::int64_t failures = 0;
    for (std::int64_t i = 0; i < spec.validate_instances; ++i) {
        const auto n = std::uniform_int_distribution<std::int64_t>(1, 6)(gen);
        const auto total = std::uniform_int_distribution<std::int64_t>(0, 40)(gen);
        GilbertElliottParams ch{unit(gen), unit(gen), std::uniform_int_distribution<std::int64_t>(1, 20)(gen)};
        PoissonArrivalParams arr{20.0 * unit(gen)};
        std::vector<ChannelState> prev(static_cast<std::size_t>(n));
        for (auto& s : prev) s = unit(gen) < 0.5 ? ChannelState::Good : ChannelState::Bad;
        const auto d = mqla_allocate(total, prev, ch);
        const auto bf = brute_force_allocation(total, prev, arr, ch, 0.01);
        const double closed = allocation_objective(d.fractional, prev, arr, ch);
        const double slack = 1e-6 + 0.01 * std::max(1.0, static_cast<double>(n));
        const bool ok = closed <= bf.objective + 1e-9 && bf.objective <= closed + slack;
        if (!ok) {
            ++failures;
            row("allocation_optimality", "instance=" + std::to_string(i), bf.objective, closed, slack, false);
        }
    }
    row("allocation_optimality", "instances=" + std::to_string(spec.validate_instances), 0.0,
        static_cast<double>(failures), 0.0, failures == 0);

    // Simulator vs exact single-satellite chain.
    ConstellationConfig sim = base;
    sim.policy = PolicyKind::NoIsl;
    sim.q_max.reset();
    const auto reps = run_replications(sim, seeds_for(base.seed, 0, spec.replications), spec.threads);
    const OverflowStats stats = merged(reps);
    TruncatedChainSpec chain;
    chain.q_cap = std::max<std::int64_t>(600, sim.thresholds.back() + static_cast<std::int64_t>(std::ceil(30.0 / qos.theta_star)));
    const auto exact = single_leo_stationary(sim.arrivals, sim.channel, chain);
    for (const auto& w : exact.warnings) result.notes.push_back("oracle: " + w);
    for (std::int64_t tau : sim.thresholds) {
        const double p = oracle_overflow(exact, tau);
        if (p < spec.validate_min_prob) continue;
        const double observed = estimate_overflow(stats, tau).p_hat;
        const double rel = std::abs(observed - p) / p;
        row("oracle_overflow", "tau=" + std::to_string(tau), p, observed, spec.validate_rtol, rel <= spec.validate_rtol);
    }
    return result;
}

} // namespace

std::string_view to_string(ExperimentKind k) noexcept {
    switch (k) {
    case ExperimentKind::SweepTau: return "sweep-tau";
    case ExperimentKind::SweepC: return "sweep-c";
    case ExperimentKind::SweepL: return "sweep-L";
    case ExperimentKind::SweepAlpha: return "sweep-alpha";
    case ExperimentKind::SweepBeta: return "sweep-beta";
    case ExperimentKind::Analyze: return "analyze";
    case ExperimentKind::Validate: return "validate";
    }
    return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view s) noexcept {
    for (auto k : {ExperimentKind::SweepTau, ExperimentKind::SweepC, ExperimentKind::SweepL, ExperimentKind::SweepAlpha,
                   ExperimentKind::SweepBeta, ExperimentKind::Analyze, ExperimentKind::Validate})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string_view sweep_variable(ExperimentKind kind) noexcept {
    switch (kind) {
    case ExperimentKind::SweepTau: return "tau";
    case ExperimentKind::SweepC: return "c";
    case ExperimentKind::SweepL: return "L";
    case ExperimentKind::SweepAlpha: return "alpha";
    case ExperimentKind::SweepBeta: return "beta";
    default: return "";
    }
}

std::vector<double> default_sweep_values(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::SweepTau: return grid(10, 60, 5, 1.0);
    case ExperimentKind::SweepC: return grid(14, 22, 1, 1.0);
    case ExperimentKind::SweepL: return grid(2, 20, 1, 1.0);
    case ExperimentKind::SweepAlpha: return grid(3, 9, 1, 10.0);
    case ExperimentKind::SweepBeta: return grid(1, 7, 1, 10.0);
    default: return {};
    }
}

ConstellationConfig apply_sweep_value(const ConstellationConfig& base, ExperimentKind kind, double value) {
    ConstellationConfig cfg = base;
    auto integral = [&](const char* key) {
        if (value != std::round(value)) throw ConfigError("sweep value must be an integer", key);
        return static_cast<std::int64_t>(std::llround(value));
    };
    switch (kind) {
    case ExperimentKind::SweepC: cfg.channel.c = integral("c"); break;
    case ExperimentKind::SweepL: cfg.satellites = integral("L"); break;
    case ExperimentKind::SweepAlpha: cfg.channel.alpha = value; break;
    case ExperimentKind::SweepBeta: cfg.channel.beta = value; break;
    case ExperimentKind::SweepTau: cfg.thresholds = {integral("tau")}; break;
    default: break;
    }
    cfg.validate();
    return cfg;
}

void ExperimentSpec::validate() const {
    base.validate();
    if (replications < 1) throw ConfigError("must be at least 1", "replications");
    if (policies.empty()) throw ConfigError("at least one policy required", "policy");
    if (!(target_prob > 0.0 && target_prob < 1.0)) throw ConfigError("must lie in (0, 1)", "target");
    if (!values.empty()) {
        for (double v : values)
            if (!std::isfinite(v)) throw ConfigError("sweep values must be finite", "values");
    }
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case ExperimentKind::Analyze: return run_analyze(spec);
    case ExperimentKind::Validate: return run_validate(spec);
    default: return run_sweep(spec);
    }
}

} // namespace leobuf
