// leobuf: buffer-overflow experiments for LEO store-and-forward constellations.
//
//   leobuf sweep-tau --replications 4 --out tau.csv
//   leobuf sweep-c --tau 15,30 --slots 200000
//   leobuf analyze --tau 40,259
//   leobuf validate --slots 2000000
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leobuf/config.hpp"
#include "leobuf/errors.hpp"
#include "leobuf/experiments.hpp"

namespace {

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kUsage = 2, kIo = 3, kRuntime = 4 };

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Buffer-overflow simulator and analysis for LEO satellite networks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> alpha, beta, lambda, c, sats, qmax, slots, warmup, seed, measure, mode, initial;
    std::vector<std::string> tau, values;
    std::string policy = "all";
    std::string config_path, out_path;
    std::int64_t replications = 1;
    unsigned threads = 0;
    double target = 1e-4, rtol = 0.05, min_prob = 1e-3;
    std::int64_t instances = 200;

    app.add_option("--config", config_path, "key=value configuration file; flags override it");
    app.add_option("--alpha", alpha, "Pr(Bad -> Good) of the feeder link");
    app.add_option("--beta", beta, "Pr(Good -> Bad) of the feeder link");
    app.add_option("--lambda", lambda, "mean Poisson arrivals per slot per satellite");
    app.add_option("--c", c, "packets forwarded per Good slot");
    app.add_option("--L", sats, "satellites per orbit");
    app.add_option("--qmax", qmax, "buffer size; tracked threshold in exceed mode, capacity in drop mode");
    app.add_option("--tau", tau, "thresholds to track (comma separated)")->delimiter(',');
    app.add_option("--slots", slots, "slots per replication, warmup included");
    app.add_option("--warmup", warmup, "slots discarded before measuring");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--replications", replications, "independent replications per point")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--policy", policy, "no-isl, virtual, mqla or all")
        ->check(CLI::IsMember({"no-isl", "virtual", "mqla", "all"}));
    app.add_option("--measure", measure, "measure queues pre or post reallocation")
        ->check(CLI::IsMember({"pre", "post"}));
    app.add_option("--mode", mode, "exceed: count q > tau; drop: finite buffers of size qmax")
        ->check(CLI::IsMember({"exceed", "drop"}));
    app.add_option("--initial-channel", initial, "stationary, good or bad");
    app.add_option("--values", values, "sweep grid (comma separated); defaults per subcommand")->delimiter(',');
    app.add_option("--target", target, "analyze: overflow probability for buffer sizing");
    app.add_option("--rtol", rtol, "validate: relative tolerance, simulation vs exact chain");
    app.add_option("--min-prob", min_prob, "validate: smallest exact probability compared");
    app.add_option("--instances", instances, "validate: random allocation instances");
    app.add_option("--out", out_path, "output CSV path (default stdout)");

    app.add_subcommand("sweep-tau", "overflow probability vs threshold tau");
    app.add_subcommand("sweep-c", "overflow probability vs Good-slot service c");
    app.add_subcommand("sweep-L", "overflow probability vs satellites per orbit");
    app.add_subcommand("sweep-alpha", "overflow probability vs Pr(Bad -> Good)");
    app.add_subcommand("sweep-beta", "overflow probability vs Pr(Good -> Bad)");
    app.add_subcommand("analyze", "QoS exponents, overflow bounds and required buffer sizes");
    app.add_subcommand("validate", "self-checks against the exact chain and brute-force allocation");

    CLI11_PARSE(app, argc, argv);

    leobuf::ExperimentSpec spec;
    try {
        spec.kind = *leobuf::parse_experiment_kind(app.get_subcommands().front()->get_name());

        leobuf::Settings settings;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot read " << config_path << '\n';
                return kIo;
            }
            std::ostringstream text;
            text << in.rdbuf();
            settings = leobuf::read_settings(text.str());
        }
        auto put = [&](const char* key, const std::optional<std::string>& v) {
            if (v) settings[key] = leobuf::SettingValue{*v, 0};
        };
        put("alpha", alpha);
        put("beta", beta);
        put("lambda", lambda);
        put("c", c);
        put("L", sats);
        put("qmax", qmax);
        put("slots", slots);
        put("warmup", warmup);
        put("seed", seed);
        put("measure", measure);
        put("mode", mode);
        put("initial_channel", initial);
        if (!tau.empty()) settings["tau"] = leobuf::SettingValue{join(tau), 0};
        if (policy != "all") settings["policy"] = leobuf::SettingValue{policy, 0};

        // Non-tau sweeps track q_max in {15, 30} by default.
        const bool tau_given = settings.contains("tau") || settings.contains("qmax");
        spec.base = leobuf::build_config(settings);
        if (!tau_given && spec.kind != leobuf::ExperimentKind::SweepTau && spec.kind != leobuf::ExperimentKind::Analyze &&
            spec.kind != leobuf::ExperimentKind::Validate)
            spec.base.thresholds = {15, 30};
        if (!tau_given && spec.kind == leobuf::ExperimentKind::Validate)
            spec.base.thresholds = {0, 20, 40, 60, 80, 100, 120, 140, 160, 180};

        if (policy != "all") spec.policies = {*leobuf::parse_policy(policy)};
        for (const auto& v : values) spec.values.push_back(std::stod(v));
        spec.replications = replications;
        spec.threads = threads;
        spec.target_prob = target;
        spec.validate_rtol = rtol;
        spec.validate_min_prob = min_prob;
        spec.validate_instances = instances;
        spec.validate();
    } catch (const leobuf::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid number: " << e.what() << '\n';
        return kUsage;
    }

    leobuf::ExperimentResult result;
    try {
        result = leobuf::run_experiment(spec);
    } catch (const leobuf::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    for (const auto& note : result.notes) std::cerr << "note: " << note << '\n';

    if (out_path.empty()) {
        leobuf::write_csv(std::cout, result.table);
        std::cout.flush();
        if (!std::cout) return kIo;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << '\n';
            return kIo;
        }
        leobuf::write_csv(out, result.table);
        out.close();
        if (!out) {
            std::cerr << "error: write failed for " << out_path << '\n';
            return kIo;
        }
    }
    return result.all_passed ? kOk : kValidationFailed;
}
