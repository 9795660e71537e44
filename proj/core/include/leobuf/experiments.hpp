// Parameter sweeps, analytical summaries and self-validation, as CSV tables.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leobuf/csv.hpp"
#include "leobuf/simulator.hpp"

namespace leobuf {

enum class ExperimentKind { SweepTau, SweepC, SweepL, SweepAlpha, SweepBeta, Analyze, Validate };

std::string_view to_string(ExperimentKind k) noexcept;  ///< CLI subcommand name
std::optional<ExperimentKind> parse_experiment_kind(std::string_view s) noexcept;

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::SweepTau;
    ConstellationConfig base{};
    std::vector<double> values;   ///< empty selects default_sweep_values(kind)
    std::vector<PolicyKind> policies{PolicyKind::NoIsl, PolicyKind::VirtualQueue, PolicyKind::MqlaIsl};
    std::int64_t replications = 1;
    unsigned threads = 0;
    double target_prob = 1e-4;            ///< Analyze: buffer-sizing target
    double validate_rtol = 0.05;          ///< Validate: simulator vs exact chain
    double validate_min_prob = 1e-3;      ///< Validate: compare only where exact p >= this
    std::int64_t validate_instances = 200;

    void validate() const;
};

/// Default grids:
/// tau 10..60 step 5, c 14..22, L 2..20, alpha 0.3..0.9, beta 0.1..0.7.
std::vector<double> default_sweep_values(ExperimentKind kind);

/// Name of the swept quantity as written to the sweep_var column.
std::string_view sweep_variable(ExperimentKind kind) noexcept;

struct ExperimentResult {
    CsvTable table;
    bool all_passed = true;           ///< false if any Validate comparison failed
    std::vector<std::string> notes;   ///< e.g. unstable sweep points
};

/// Sweeps emit `sweep_var,value,policy,tau,p_hat,ci,samples` ordered by
/// (value, policy, tau). Unstable points are simulated but reported with
/// p_hat = 1 and ci = 0, and flagged in `notes`.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Applies one sweep value to a configuration.
ConstellationConfig apply_sweep_value(const ConstellationConfig& base, ExperimentKind kind, double value);

} // namespace leobuf
