#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "leobuf/allocation.hpp"
#include "leobuf/errors.hpp"
#include "leobuf/exact_oracle.hpp"

using namespace leobuf;

namespace {

constexpr auto G = ChannelState::Good;
constexpr auto B = ChannelState::Bad;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }
std::int64_t sum(const std::vector<std::int64_t>& v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); }

} // namespace

// =============================================================================
// Closed-form cases
// =============================================================================

TEST(MqlaAllocate, ZeroDeltaSplitsEvenly) {
    const GilbertElliottParams ch{0.7, 0.3, 16};
    for (int z = 0; z <= 10; ++z) {
        std::vector<ChannelState> prev(10, B);
        std::fill(prev.begin(), prev.begin() + z, G);
        const auto d = mqla_allocate(100, prev, ch);
        EXPECT_EQ(d.case_tag, AllocationCase::III);
        EXPECT_NEAR(d.delta, 0.0, 1e-12);
        for (double x : d.fractional) EXPECT_NEAR(x, 10.0, 1e-12);
        for (auto t : d.targets) EXPECT_EQ(t, 10);
        // Brute force agrees on the objective.
        const auto bf = brute_force_allocation(100, prev, {10.0}, ch, 0.01);
        EXPECT_NEAR(allocation_objective(d.fractional, prev, {10.0}, ch), bf.objective, 1e-9);
    }
}

TEST(MqlaAllocate, CaseOne) {
    const std::vector<ChannelState> prev{G, G, B, B};
    const GilbertElliottParams ch{0.1, 0.1, 16};
    const auto d = mqla_allocate(20, prev, ch);
    EXPECT_EQ(d.case_tag, AllocationCase::I);
    EXPECT_NEAR(d.delta, 12.8, 1e-12);
    EXPECT_EQ(d.z_count, 2);
    EXPECT_EQ(d.fractional, (std::vector<double>{10, 10, 0, 0}));
    EXPECT_EQ(d.targets, (std::vector<std::int64_t>{10, 10, 0, 0}));
    const auto bf = brute_force_allocation(20, prev, {10.0}, ch, 0.01);
    EXPECT_NEAR(bf.bad_target, 0.0, 1e-9);
    EXPECT_NEAR(bf.good_target, 10.0, 1e-9);
}

TEST(MqlaAllocate, CaseTwo) {
    const std::vector<ChannelState> prev{B, B, G, G};
    const GilbertElliottParams ch{0.9, 0.9, 16};
    const auto d = mqla_allocate(20, prev, ch);
    EXPECT_EQ(d.case_tag, AllocationCase::II);
    EXPECT_NEAR(d.delta, -12.8, 1e-12);
    EXPECT_EQ(d.fractional, (std::vector<double>{10, 10, 0, 0}));
    const auto bf = brute_force_allocation(20, prev, {10.0}, ch, 0.01);
    EXPECT_NEAR(bf.bad_target, 10.0, 1e-9);
    EXPECT_NEAR(bf.good_target, 0.0, 1e-9);
}

TEST(MqlaAllocate, CaseThree) {
    const std::vector<ChannelState> prev{B, B, G, G};
    const GilbertElliottParams ch{0.6, 0.5, 16};
    const auto d = mqla_allocate(20, prev, ch);
    EXPECT_EQ(d.case_tag, AllocationCase::III);
    EXPECT_NEAR(d.delta, -1.6, 1e-12);
    EXPECT_NEAR(d.fractional[0], 5.8, 1e-12);
    EXPECT_NEAR(d.fractional[1], 5.8, 1e-12);
    EXPECT_NEAR(d.fractional[2], 4.2, 1e-12);
    EXPECT_NEAR(d.fractional[3], 4.2, 1e-12);
    EXPECT_EQ(d.targets, (std::vector<std::int64_t>{6, 6, 4, 4}));
    const auto bf = brute_force_allocation(20, prev, {10.0}, ch, 0.01);
    EXPECT_NEAR(bf.bad_target, 5.8, 0.01);
    EXPECT_NEAR(bf.good_target, 4.2, 0.01);
}

TEST(MqlaAllocate, DegenerateGroupsAndEmptyTotal) {
    const GilbertElliottParams ch{0.1, 0.1, 16};  // delta = 12.8
    const auto all_bad = mqla_allocate(30, std::vector<ChannelState>(3, B), ch);
    EXPECT_EQ(all_bad.case_tag, AllocationCase::III);
    for (double x : all_bad.fractional) EXPECT_NEAR(x, 10.0, 1e-12);

    const GilbertElliottParams neg{0.9, 0.9, 16};  // delta = -12.8
    const auto all_good = mqla_allocate(30, std::vector<ChannelState>(3, G), neg);
    EXPECT_EQ(all_good.case_tag, AllocationCase::III);
    for (double x : all_good.fractional) EXPECT_NEAR(x, 10.0, 1e-12);

    const auto empty = mqla_allocate(0, std::vector<ChannelState>{G, B, B}, ch);
    EXPECT_EQ(empty.case_tag, AllocationCase::I);  // delta > 0 = Q/Z
    for (double x : empty.fractional) EXPECT_EQ(x, 0.0);
    for (auto t : empty.targets) EXPECT_EQ(t, 0);
}

TEST(MqlaAllocate, CaseBoundaryContinuity) {
    // Z = 2, L = 4, Q = 20: Case I starts at delta = Q/Z = 10 -> c (bbar - alpha) = 10.
    const std::vector<ChannelState> prev{G, G, B, B};
    auto at = [&](double delta) {
        // c = 20, alpha = 0.1  =>  bbar = 0.1 + delta / 20.
        return mqla_allocate(20, prev, {0.1, 1.0 - (0.1 + delta / 20.0), 20});
    };
    const auto below = at(10.0 - 1e-9);
    const auto above = at(10.0 + 1e-9);
    EXPECT_EQ(below.case_tag, AllocationCase::III);
    EXPECT_EQ(above.case_tag, AllocationCase::I);
    for (std::size_t l = 0; l < prev.size(); ++l) EXPECT_NEAR(below.fractional[l], above.fractional[l], 1e-8);
}

TEST(MqlaAllocate, PropertiesOnRandomInstances) {
    std::mt19937_64 gen(314);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const auto n = std::uniform_int_distribution<int>(1, 12)(gen);
        const auto total = std::uniform_int_distribution<std::int64_t>(0, 500)(gen);
        const GilbertElliottParams ch{u(gen), u(gen), std::uniform_int_distribution<std::int64_t>(1, 40)(gen)};
        std::vector<ChannelState> prev(static_cast<std::size_t>(n));
        for (auto& s : prev) s = u(gen) < 0.5 ? G : B;
        const auto d = mqla_allocate(total, prev, ch);

        // Conservation and non-negativity.
        EXPECT_NEAR(sum(d.fractional), static_cast<double>(total), 1e-9 * std::max<double>(1.0, total));
        EXPECT_EQ(sum(d.targets), total);
        for (std::size_t l = 0; l < prev.size(); ++l) {
            EXPECT_GE(d.fractional[l], 0.0);
            EXPECT_GE(d.targets[l], 0);
            EXPECT_LE(std::abs(static_cast<double>(d.targets[l]) - d.fractional[l]), 1.0);
            // Same previous state, same fractional share.
            EXPECT_EQ(d.fractional[l], prev[l] == G ? d.good_target : d.bad_target);
        }

        // Case tag follows the analytic conditions.
        const double q = static_cast<double>(total);
        const auto z = d.z_count;
        AllocationCase expected = AllocationCase::III;
        if (z > 0 && d.delta > q / z) expected = AllocationCase::I;
        else if (z < n && d.delta < -q / (n - z)) expected = AllocationCase::II;
        EXPECT_EQ(d.case_tag, expected);

        // Permutation equivariance.
        std::vector<std::size_t> perm(prev.size());
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), gen);
        std::vector<ChannelState> shuffled(prev.size());
        for (std::size_t l = 0; l < perm.size(); ++l) shuffled[l] = prev[perm[l]];
        const auto ds = mqla_allocate(total, shuffled, ch);
        for (std::size_t l = 0; l < perm.size(); ++l) EXPECT_EQ(ds.fractional[l], d.fractional[perm[l]]);
    }
}

// =============================================================================
// Integerization
// =============================================================================

TEST(Integerize, Examples) {
    EXPECT_EQ(integerize(std::vector<double>{5.8, 5.8, 4.2, 4.2}, 20), (std::vector<std::int64_t>{6, 6, 4, 4}));
    EXPECT_EQ(integerize(std::vector<double>{10, 10, 0, 0}, 20), (std::vector<std::int64_t>{10, 10, 0, 0}));
    EXPECT_EQ(integerize(std::vector<double>{3.5, 3.5, 3.0}, 10), (std::vector<std::int64_t>{4, 3, 3}));
    EXPECT_EQ(integerize(std::vector<double>{10.1, 10.1, 10.1, 10.1, 10.1, 10.1, 10.1, 10.1, 10.1, 10.1}, 101),
              (std::vector<std::int64_t>{11, 10, 10, 10, 10, 10, 10, 10, 10, 10}));
}

TEST(Integerize, SumMismatchThrows) {
    EXPECT_THROW(integerize(std::vector<double>{1.0, 2.0}, 4), SumMismatchError);
}

TEST(Integerize, ToleratesRoundingNoise) {
    const auto out = integerize(std::vector<double>{10.0 + 1e-12, 10.0 - 1e-12, -1e-15}, 20);
    EXPECT_EQ(out, (std::vector<std::int64_t>{10, 10, 0}));
}

TEST(CapTargets, PushesExcessToSmallest) {
    std::vector<std::int64_t> t{12, 9, 3, 0};
    cap_targets(t, 8);
    EXPECT_EQ(std::accumulate(t.begin(), t.end(), std::int64_t{0}), 24);
    for (auto v : t) EXPECT_LE(v, 8);
    EXPECT_EQ(t[0], 8);
    EXPECT_EQ(t[1], 8);
    EXPECT_EQ(t[2], 4);
    EXPECT_EQ(t[3], 4);
}

// =============================================================================
// Expected next-slot load
// =============================================================================

TEST(ExpectedNextLoad, Values) {
    const GilbertElliottParams ch{0.6, 0.5, 16};
    EXPECT_NEAR(expected_next_load(5, B, {10.0}, ch), 5.4, 1e-12);
    EXPECT_NEAR(expected_next_load(5, G, {10.0}, ch), 7.0, 1e-12);
    // Balanced: lambda = c alpha = c bbar.
    EXPECT_NEAR(expected_next_load(0, B, {8.0}, {0.5, 0.5, 16}), 0.0, 1e-12);
    EXPECT_NEAR(expected_next_load(0, G, {8.0}, {0.5, 0.5, 16}), 0.0, 1e-12);
}

TEST(PolicyKind, NamesRoundTrip) {
    for (auto p : {PolicyKind::NoIsl, PolicyKind::VirtualQueue, PolicyKind::MqlaIsl})
        EXPECT_EQ(parse_policy(to_string(p)), p);
    EXPECT_FALSE(parse_policy("both").has_value());
}
