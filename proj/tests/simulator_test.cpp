#include <gtest/gtest.h>

#include <numeric>

#include "leobuf/errors.hpp"
#include "leobuf/simulator.hpp"

using namespace leobuf;

namespace {

ConstellationConfig small_config(PolicyKind policy) {
    ConstellationConfig cfg;
    cfg.policy = policy;
    cfg.slots = 20'000;
    cfg.warmup_slots = 1'000;
    cfg.seed = 123;
    cfg.thresholds = {0, 5, 10, 20, 40};
    return cfg;
}

constexpr PolicyKind kPolicies[] = {PolicyKind::NoIsl, PolicyKind::VirtualQueue, PolicyKind::MqlaIsl};

} // namespace

// =============================================================================
// Configuration checks
// =============================================================================

TEST(ConstellationConfig, RejectsInvalid) {
    auto cfg = small_config(PolicyKind::NoIsl);
    cfg.warmup_slots = cfg.slots;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_config(PolicyKind::NoIsl);
    cfg.thresholds = {5, 3};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.thresholds = {};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_config(PolicyKind::NoIsl);
    cfg.satellites = 0;
    EXPECT_THROW(run_simulation(cfg), ConfigError);
}

// =============================================================================
// Engine behaviour
// =============================================================================

TEST(RunSimulation, NoTrafficNeverExceeds) {
    for (auto policy : kPolicies) {
        auto cfg = small_config(policy);
        cfg.arrivals.lambda = 0.0;
        const auto stats = run_simulation(cfg);
        EXPECT_EQ(stats.samples, (cfg.slots - cfg.warmup_slots) * cfg.satellites);
        for (auto e : stats.exceed) EXPECT_EQ(e, 0);
    }
}

TEST(RunSimulation, UnstableChannelSaturates) {
    for (auto policy : kPolicies) {
        auto cfg = small_config(policy);
        cfg.channel.c = 14;
        cfg.slots = 200'000;
        cfg.warmup_slots = 10'000;
        cfg.thresholds = {30};
        const auto est = estimate_overflow(run_simulation(cfg), 30);
        EXPECT_GT(est.p_hat, 0.95) << to_string(policy);
    }
}

TEST(RunSimulation, DeterministicPerSeed) {
    for (auto policy : kPolicies) {
        auto cfg = small_config(policy);
        cfg.per_satellite = true;
        EXPECT_EQ(run_simulation(cfg), run_simulation(cfg));
        auto other = cfg;
        other.seed = 124;
        EXPECT_NE(run_simulation(cfg).exceed, run_simulation(other).exceed);
    }
}

TEST(RunSimulation, ExceedanceMonotoneAndPerSatelliteConsistent) {
    for (auto policy : kPolicies) {
        auto cfg = small_config(policy);
        cfg.per_satellite = true;
        const auto s = run_simulation(cfg);
        for (std::size_t i = 1; i < s.exceed.size(); ++i) EXPECT_LE(s.exceed[i], s.exceed[i - 1]);
        EXPECT_LE(s.exceed.front(), s.samples);
        ASSERT_EQ(s.per_satellite_exceed.size(), static_cast<std::size_t>(cfg.satellites));
        for (std::size_t i = 0; i < s.exceed.size(); ++i) {
            std::int64_t total = 0;
            for (const auto& sat : s.per_satellite_exceed) total += sat[i];
            EXPECT_EQ(total, s.exceed[i]);
        }
    }
}

TEST(RunSimulation, MeasureEpochOnlyAffectsMqla) {
    for (auto policy : {PolicyKind::NoIsl, PolicyKind::VirtualQueue}) {
        auto pre = small_config(policy);
        auto post = pre;
        post.measure = MeasureEpoch::PostReallocation;
        EXPECT_EQ(run_simulation(pre), run_simulation(post));
    }
    auto pre = small_config(PolicyKind::MqlaIsl);
    auto post = pre;
    post.measure = MeasureEpoch::PostReallocation;
    // Reallocation equalises, so the post-reallocation tail is lighter.
    EXPECT_GT(run_simulation(pre).exceed[3], run_simulation(post).exceed[3]);
}

TEST(ConstellationSimulator, MqlaConservesPacketsAndStaysNonNegative) {
    auto cfg = small_config(PolicyKind::MqlaIsl);
    cfg.channel = {0.3, 0.2, 25};  // delta != 0 exercises the unequal cases
    cfg.arrivals.lambda = 12.0;
    ConstellationSimulator sim(cfg);
    for (int t = 0; t < 20'000; ++t) {
        sim.step();
        ASSERT_EQ(sim.last_total_before_reallocation(), sim.last_total_after_reallocation());
        for (auto q : sim.state().q) ASSERT_GE(q, 0);
    }
}

TEST(ConstellationSimulator, VirtualQueueLowerBoundsIslAndNoIslTotals) {
    // Streams depend only on (seed, satellite, purpose), so the three
    // policies see identical arrivals and channel trajectories.
    auto base = small_config(PolicyKind::VirtualQueue);
    base.channel = {0.5, 0.3, 18};
    ConstellationSimulator vq(base);
    auto m = base;
    m.policy = PolicyKind::MqlaIsl;
    ConstellationSimulator mqla(m);
    auto n = base;
    n.policy = PolicyKind::NoIsl;
    ConstellationSimulator noisl(n);
    for (int t = 0; t < 20'000; ++t) {
        vq.step();
        mqla.step();
        noisl.step();
        ASSERT_EQ(vq.state().channel, mqla.state().channel);
        ASSERT_LE(vq.total_queue(), mqla.total_queue()) << "slot " << t;
        ASSERT_LE(vq.total_queue(), noisl.total_queue()) << "slot " << t;
    }
}

TEST(ConstellationSimulator, DropModeRespectsCapacity) {
    for (auto policy : kPolicies) {
        auto cfg = small_config(policy);
        cfg.channel.c = 14;  // unstable, so drops are certain
        cfg.q_max = 15;
        cfg.thresholds = {15};
        ConstellationSimulator sim(cfg);
        for (int t = 0; t < 5'000; ++t) {
            sim.step();
            for (auto q : sim.state().q) ASSERT_LE(q, 15);
            ASSERT_LE(sim.total_queue(), 15 * cfg.satellites);
        }
        sim.run();
        const auto s = sim.stats();
        EXPECT_GT(s.dropped_packets, 0);
        EXPECT_GT(s.drop_events, 0);
        EXPECT_LE(s.drop_events, s.samples);
        EXPECT_LE(s.dropped_packets, s.arrived_packets);
        EXPECT_EQ(s.exceed[0], 0);
    }
}

TEST(ConstellationSimulator, InitialChannelOverride) {
    auto cfg = small_config(PolicyKind::NoIsl);
    cfg.initial_channel = InitialChannel::Bad;
    ConstellationSimulator bad(cfg);
    for (auto s : bad.state().channel) EXPECT_EQ(s, ChannelState::Bad);
    cfg.initial_channel = InitialChannel::Good;
    ConstellationSimulator good(cfg);
    for (auto s : good.state().channel) EXPECT_EQ(s, ChannelState::Good);
}

// =============================================================================
// Estimation and merging
// =============================================================================

TEST(EstimateOverflow, Arithmetic) {
    auto s = OverflowStats::empty({10, 20});
    s.samples = 1'000'000;
    s.exceed = {100, 0};
    const auto e = estimate_overflow(s, 10);
    EXPECT_DOUBLE_EQ(e.p_hat, 1e-4);
    EXPECT_NEAR(e.ci_halfwidth, 1.96 * std::sqrt(1e-4 * (1 - 1e-4) / 1e6), 1e-15);
    const auto z = estimate_overflow(s, 20);
    EXPECT_EQ(z.p_hat, 0.0);
    EXPECT_DOUBLE_EQ(z.ci_halfwidth, 3e-6);
    EXPECT_THROW(estimate_overflow(s, 15), UntrackedThresholdError);
}

TEST(MergeStats, IdentityAndSums) {
    const auto a = run_simulation(small_config(PolicyKind::NoIsl));
    auto cfg_b = small_config(PolicyKind::NoIsl);
    cfg_b.seed = 999;
    const auto b = run_simulation(cfg_b);
    EXPECT_EQ(merge_stats(a, OverflowStats::empty(a.thresholds)), a);
    const auto m = merge_stats(a, b);
    EXPECT_EQ(m.samples, a.samples + b.samples);
    for (std::size_t i = 0; i < m.exceed.size(); ++i) EXPECT_EQ(m.exceed[i], a.exceed[i] + b.exceed[i]);
    EXPECT_EQ(m.max_queue_seen, std::max(a.max_queue_seen, b.max_queue_seen));
    EXPECT_THROW(merge_stats(a, OverflowStats::empty({1, 2})), ThresholdMismatchError);
}

TEST(MergeStats, PoolingIdentityAcrossReplications) {
    auto cfg = small_config(PolicyKind::MqlaIsl);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t r = 0; r < 10; ++r) seeds.push_back(replication_seed(7, 3, r));

    const auto parallel = run_replications(cfg, seeds, 4);
    OverflowStats merged = OverflowStats::empty(cfg.thresholds);
    for (const auto& r : parallel) merged = merge_stats(merged, r);

    std::int64_t samples = 0, exceed = 0;
    for (auto seed : seeds) {
        auto c = cfg;
        c.seed = seed;
        const auto s = run_simulation(c);
        samples += s.samples;
        exceed += s.exceed[2];
    }
    EXPECT_EQ(merged.samples, samples);
    EXPECT_EQ(estimate_overflow(merged, 10).p_hat, static_cast<double>(exceed) / static_cast<double>(samples));
    EXPECT_EQ(parallel, run_replications(cfg, seeds, 1));
}

TEST(ReplicationSeed, StableAndDistinct) {
    EXPECT_EQ(replication_seed(1, 2, 3), replication_seed(1, 2, 3));
    EXPECT_NE(replication_seed(1, 2, 3), replication_seed(1, 3, 2));
    EXPECT_NE(replication_seed(1, 2, 3), replication_seed(2, 2, 3));
}
