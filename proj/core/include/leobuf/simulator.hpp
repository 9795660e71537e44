// Slotted Monte Carlo of L satellites in one orbit.
//
// Slot t:
//   1. MqlaIsl only: pool Q(t) = sum q_l and reassign it by mqla_allocate,
//      using the channel states of slot t-1 (the initial states at t = 0).
//   2. Measure q_l > tau for every tracked tau (before step 1 under
//      PreReallocation). VirtualQueue measures Q/L, counted once per satellite.
//   3. Draw arrivals, serve c packets on Good channels, clamp at zero; the
//      VirtualQueue evolves only its aggregate. With q_max set, excess is dropped.
//   4. Step every channel chain.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "leobuf/allocation.hpp"
#include "leobuf/random.hpp"
#include "leobuf/stochastic_models.hpp"

namespace leobuf {

enum class MeasureEpoch : std::uint8_t { PreReallocation, PostReallocation };
enum class InitialChannel : std::uint8_t { Stationary, Good, Bad };

struct ConstellationConfig {
    std::int64_t satellites = 10;
    PoissonArrivalParams arrivals{};
    GilbertElliottParams channel{};
    PolicyKind policy = PolicyKind::MqlaIsl;
    std::int64_t slots = 1'000'000;       ///< total slots, warmup included
    std::int64_t warmup_slots = 10'000;
    std::uint64_t seed = 1;
    std::vector<std::int64_t> thresholds{10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
    std::optional<std::int64_t> q_max;    ///< drop-on-full capacity per satellite
    MeasureEpoch measure = MeasureEpoch::PreReallocation;
    InitialChannel initial_channel = InitialChannel::Stationary;
    bool per_satellite = false;           ///< also keep per-satellite exceedance counters

    std::int64_t recorded_slots() const noexcept { return slots - warmup_slots; }

    /// Throws ConfigError naming the offending key.
    void validate() const;
    friend bool operator==(const ConstellationConfig&, const ConstellationConfig&) = default;
};

struct QueueStateVector {
    std::vector<std::int64_t> q;
    std::vector<ChannelState> channel;
};

struct OverflowStats {
    std::vector<std::int64_t> thresholds;
    std::int64_t samples = 0;               ///< slot-satellite measurements
    std::vector<std::int64_t> exceed;       ///< exceed[i] = #samples with value > thresholds[i]
    std::int64_t dropped_packets = 0;
    std::int64_t arrived_packets = 0;
    std::int64_t drop_events = 0;           ///< slot-satellite pairs that lost at least one packet
    std::int64_t max_queue_seen = 0;
    std::vector<std::vector<std::int64_t>> per_satellite_exceed;  ///< [satellite][threshold]

    static OverflowStats empty(std::vector<std::int64_t> thresholds);
    friend bool operator==(const OverflowStats&, const OverflowStats&) = default;
};

/// Runs one replication slot by slot. Exposed so tests can observe trajectories.
class ConstellationSimulator {
public:
    explicit ConstellationSimulator(ConstellationConfig config);

    void step();
    void run();

    std::int64_t slot() const noexcept { return slot_; }
    const ConstellationConfig& config() const noexcept { return config_; }
    const QueueStateVector& state() const noexcept { return state_; }
    std::span<const ChannelState> previous_channel() const noexcept { return prev_channel_; }
    /// Aggregate queue of the VirtualQueue policy; sum of q otherwise.
    std::int64_t total_queue() const noexcept;
    /// Totals immediately before and after the latest reallocation (MqlaIsl).
    std::int64_t last_total_before_reallocation() const noexcept { return realloc_before_; }
    std::int64_t last_total_after_reallocation() const noexcept { return realloc_after_; }

    /// Statistics with the exceedance histogram folded in.
    OverflowStats stats() const;

private:
    void reallocate();
    void measure_satellites(bool record);
    void evolve(bool record);

    ConstellationConfig config_;
    QueueStateVector state_;
    std::vector<ChannelState> prev_channel_;
    std::int64_t aggregate_ = 0;
    std::int64_t slot_ = 0;
    std::int64_t realloc_before_ = 0;
    std::int64_t realloc_after_ = 0;

    PoissonSampler sampler_;
    std::vector<RandomStream> arrival_rng_;
    std::vector<RandomStream> channel_rng_;

    // bucket[k] counts samples exceeding exactly the first k thresholds.
    std::vector<std::int64_t> bucket_;
    std::vector<std::vector<std::int64_t>> satellite_bucket_;
    OverflowStats counters_;

    std::vector<double> fractional_;
    std::vector<std::int64_t> targets_;
    std::vector<std::size_t> order_;
};

OverflowStats run_simulation(const ConstellationConfig& config);

/// Runs one replication per seed (config.seed is replaced), concurrently on
/// up to `threads` workers (0 = hardware concurrency). Results keep seed order.
std::vector<OverflowStats> run_replications(const ConstellationConfig& config, std::span<const std::uint64_t> seeds,
                                            unsigned threads = 0);

struct OverflowEstimate {
    double p_hat;
    double ci_halfwidth;
};

/// exceed/samples with a 95% normal-approximation half-width. Slot samples
/// are autocorrelated, so the half-width understates the true uncertainty.
/// With no exceedances the half-width is the rule-of-three bound 3/samples.
OverflowEstimate estimate_overflow(const OverflowStats& stats, std::int64_t tau);

/// drop_events/samples: probability that a satellite loses at least one
/// packet in a slot (drop mode). Same half-width convention as above.
OverflowEstimate estimate_drop_probability(const OverflowStats& stats);

/// Mean of per-replication estimates with a 95% half-width from their
/// spread (1.96 sd / sqrt(R)); accounts for autocorrelation within runs.
OverflowEstimate estimate_overflow_across(std::span<const OverflowStats> replications, std::int64_t tau);

/// Counter-wise sum; max_queue_seen takes the max. Throws ThresholdMismatchError.
OverflowStats merge_stats(const OverflowStats& a, const OverflowStats& b);

/// Seed of replication `r` of sweep point `point` under `master`.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t point, std::uint64_t r);

} // namespace leobuf
