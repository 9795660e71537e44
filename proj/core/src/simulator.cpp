#include "leobuf/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "leobuf/errors.hpp"

namespace leobuf {

void ConstellationConfig::validate() const {
    if (satellites < 1) throw ConfigError("must be at least 1", "L");
    arrivals.validate();
    channel.validate();
    if (!(channel.alpha + channel.beta > 0.0)) throw ConfigError("alpha + beta must be positive", "alpha");
    if (slots < 1) throw ConfigError("must be positive", "slots");
    if (warmup_slots < 0 || warmup_slots >= slots) throw ConfigError("must satisfy 0 <= warmup < slots", "warmup");
    if (thresholds.empty()) throw ConfigError("at least one threshold required", "tau");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0) throw ConfigError("thresholds must be non-negative", "tau");
        if (i > 0 && thresholds[i] <= thresholds[i - 1])
            throw ConfigError("thresholds must be strictly increasing", "tau");
    }
    if (q_max && *q_max < 1) throw ConfigError("must be a positive integer", "qmax");
}

OverflowStats OverflowStats::empty(std::vector<std::int64_t> thresholds) {
    OverflowStats s;
    s.exceed.assign(thresholds.size(), 0);
    s.thresholds = std::move(thresholds);
    return s;
}

ConstellationSimulator::ConstellationSimulator(ConstellationConfig config)
    : config_(std::move(config)), sampler_((config_.validate(), config_.arrivals)) {
    const auto n = static_cast<std::size_t>(config_.satellites);
    state_.q.assign(n, 0);
    state_.channel.resize(n);
    arrival_rng_.reserve(n);
    channel_rng_.reserve(n);
    for (std::size_t l = 0; l < n; ++l) {
        arrival_rng_.emplace_back(
            derive_seed(config_.seed, {l, static_cast<std::uint64_t>(StreamPurpose::Arrivals)}));
        channel_rng_.emplace_back(derive_seed(config_.seed, {l, static_cast<std::uint64_t>(StreamPurpose::Channel)}));
        switch (config_.initial_channel) {
        case InitialChannel::Stationary: state_.channel[l] = draw_stationary_state(config_.channel, channel_rng_[l]); break;
        case InitialChannel::Good: state_.channel[l] = ChannelState::Good; break;
        case InitialChannel::Bad: state_.channel[l] = ChannelState::Bad; break;
        }
    }
    prev_channel_ = state_.channel;

    counters_ = OverflowStats::empty(config_.thresholds);
    bucket_.assign(config_.thresholds.size() + 1, 0);
    if (config_.per_satellite) satellite_bucket_.assign(n, std::vector<std::int64_t>(config_.thresholds.size() + 1, 0));
    fractional_.resize(n);
    targets_.resize(n);
}

std::int64_t ConstellationSimulator::total_queue() const noexcept {
    if (config_.policy == PolicyKind::VirtualQueue) return aggregate_;
    return std::accumulate(state_.q.begin(), state_.q.end(), std::int64_t{0});
}

void ConstellationSimulator::reallocate() {
    const std::int64_t total = total_queue();
    const auto n = config_.satellites;
    const auto z = static_cast<std::int64_t>(std::count(prev_channel_.begin(), prev_channel_.end(), ChannelState::Good));
    const AllocationLevels lv = mqla_levels(total, n, z, config_.channel);
    for (std::size_t l = 0; l < fractional_.size(); ++l)
        fractional_[l] = prev_channel_[l] == ChannelState::Good ? lv.good_target : lv.bad_target;
    integerize_into(fractional_, total, targets_, order_);
    if (config_.q_max) cap_targets(targets_, *config_.q_max);
    std::copy(targets_.begin(), targets_.end(), state_.q.begin());
    realloc_before_ = total;
    realloc_after_ = total_queue();
}

void ConstellationSimulator::measure_satellites(bool record) {
    if (!record) return;
    const auto& th = config_.thresholds;
    auto bucket_of = [&](std::int64_t v) {
        return static_cast<std::size_t>(std::lower_bound(th.begin(), th.end(), v) - th.begin());
    };
    const auto n = static_cast<std::size_t>(config_.satellites);
    if (config_.policy == PolicyKind::VirtualQueue) {
        // Q/L > tau  <=>  Q > tau L, kept in integers.
        std::size_t k = 0;
        while (k < th.size() && aggregate_ > th[k] * config_.satellites) ++k;
        bucket_[k] += config_.satellites;
        if (config_.per_satellite)
            for (auto& sb : satellite_bucket_) ++sb[k];
        const std::int64_t ceil_mean = (aggregate_ + config_.satellites - 1) / config_.satellites;
        counters_.max_queue_seen = std::max(counters_.max_queue_seen, ceil_mean);
    } else {
        for (std::size_t l = 0; l < n; ++l) {
            const std::int64_t v = state_.q[l];
            // Number of thresholds strictly below v.
            const std::size_t k = bucket_of(v);
            ++bucket_[k];
            if (config_.per_satellite) ++satellite_bucket_[l][k];
            counters_.max_queue_seen = std::max(counters_.max_queue_seen, v);
        }
    }
    counters_.samples += config_.satellites;
}

void ConstellationSimulator::evolve(bool record) {
    const auto n = static_cast<std::size_t>(config_.satellites);
    const auto& ch = config_.channel;
    if (config_.policy == PolicyKind::VirtualQueue) {
        std::int64_t arrived = 0, served = 0;
        for (std::size_t l = 0; l < n; ++l) {
            arrived += sampler_(arrival_rng_[l]);
            served += service_rate(state_.channel[l], ch);
        }
        aggregate_ = std::max<std::int64_t>(0, aggregate_ + arrived - served);
        if (record) counters_.arrived_packets += arrived;
        if (config_.q_max) {
            const std::int64_t cap = *config_.q_max * config_.satellites;
            if (aggregate_ > cap) {
                if (record) {
                    counters_.dropped_packets += aggregate_ - cap;
                    counters_.drop_events += config_.satellites;
                }
                aggregate_ = cap;
            }
        }
        return;
    }
    for (std::size_t l = 0; l < n; ++l) {
        const std::int64_t a = sampler_(arrival_rng_[l]);
        std::int64_t q = std::max<std::int64_t>(0, state_.q[l] + a - service_rate(state_.channel[l], ch));
        if (record) counters_.arrived_packets += a;
        if (config_.q_max && q > *config_.q_max) {
            if (record) {
                counters_.dropped_packets += q - *config_.q_max;
                ++counters_.drop_events;
            }
            q = *config_.q_max;
        }
        state_.q[l] = q;
    }
}

void ConstellationSimulator::step() {
    const bool record = slot_ >= config_.warmup_slots;
    if (config_.policy == PolicyKind::MqlaIsl) {
        if (config_.measure == MeasureEpoch::PreReallocation) measure_satellites(record);
        reallocate();
        if (config_.measure == MeasureEpoch::PostReallocation) measure_satellites(record);
    } else {
        measure_satellites(record);
    }
    evolve(record);
    for (std::size_t l = 0; l < state_.channel.size(); ++l) {
        prev_channel_[l] = state_.channel[l];
        state_.channel[l] = step_channel(state_.channel[l], config_.channel, channel_rng_[l]);
    }
    ++slot_;
}

void ConstellationSimulator::run() {
    while (slot_ < config_.slots) step();
}

OverflowStats ConstellationSimulator::stats() const {
    OverflowStats out = counters_;
    const std::size_t m = config_.thresholds.size();
    auto fold = [m](const std::vector<std::int64_t>& bucket) {
        std::vector<std::int64_t> exceed(m, 0);
        std::int64_t running = 0;
        for (std::size_t i = m; i-- > 0;) {
            running += bucket[i + 1];
            exceed[i] = running;
        }
        return exceed;
    };
    out.exceed = fold(bucket_);
    for (const auto& sb : satellite_bucket_) out.per_satellite_exceed.push_back(fold(sb));
    return out;
}

OverflowStats run_simulation(const ConstellationConfig& config) {
    ConstellationSimulator sim(config);
    sim.run();
    return sim.stats();
}

std::vector<OverflowStats> run_replications(const ConstellationConfig& config, std::span<const std::uint64_t> seeds,
                                            unsigned threads) {
    config.validate();
    std::vector<OverflowStats> results(seeds.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto worker = [&](unsigned id) {
        try {
            for (std::size_t i = next++; i < seeds.size(); i = next++) {
                ConstellationConfig c = config;
                c.seed = seeds[i];
                results[i] = run_simulation(c);
            }
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

namespace {

std::size_t threshold_index(const OverflowStats& stats, std::int64_t tau) {
    auto it = std::find(stats.thresholds.begin(), stats.thresholds.end(), tau);
    if (it == stats.thresholds.end())
        throw UntrackedThresholdError("threshold " + std::to_string(tau) + " is not tracked");
    return static_cast<std::size_t>(it - stats.thresholds.begin());
}

} // namespace

OverflowEstimate estimate_overflow(const OverflowStats& stats, std::int64_t tau) {
    const std::size_t i = threshold_index(stats, tau);
    if (stats.samples <= 0) throw std::invalid_argument("no samples recorded");
    const double n = static_cast<double>(stats.samples);
    const double p = static_cast<double>(stats.exceed[i]) / n;
    if (stats.exceed[i] == 0) return {0.0, 3.0 / n};
    return {p, 1.96 * std::sqrt(p * (1.0 - p) / n)};
}

OverflowEstimate estimate_drop_probability(const OverflowStats& stats) {
    if (stats.samples <= 0) throw std::invalid_argument("no samples recorded");
    const double n = static_cast<double>(stats.samples);
    if (stats.drop_events == 0) return {0.0, 3.0 / n};
    const double p = static_cast<double>(stats.drop_events) / n;
    return {p, 1.96 * std::sqrt(p * (1.0 - p) / n)};
}

OverflowEstimate estimate_overflow_across(std::span<const OverflowStats> replications, std::int64_t tau) {
    if (replications.empty()) throw std::invalid_argument("no replications");
    std::vector<double> p;
    p.reserve(replications.size());
    for (const auto& r : replications) p.push_back(estimate_overflow(r, tau).p_hat);
    const double r = static_cast<double>(p.size());
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / r;
    if (p.size() < 2) return {mean, estimate_overflow(replications.front(), tau).ci_halfwidth};
    double ss = 0.0;
    for (double v : p) ss += (v - mean) * (v - mean);
    return {mean, 1.96 * std::sqrt(ss / (r - 1.0) / r)};
}

OverflowStats merge_stats(const OverflowStats& a, const OverflowStats& b) {
    if (a.thresholds != b.thresholds) throw ThresholdMismatchError("cannot merge stats with different thresholds");
    OverflowStats out = a;
    out.samples += b.samples;
    for (std::size_t i = 0; i < out.exceed.size(); ++i) out.exceed[i] += b.exceed[i];
    out.dropped_packets += b.dropped_packets;
    out.arrived_packets += b.arrived_packets;
    out.drop_events += b.drop_events;
    out.max_queue_seen = std::max(a.max_queue_seen, b.max_queue_seen);
    if (out.per_satellite_exceed.empty()) {
        out.per_satellite_exceed = b.per_satellite_exceed;
    } else if (!b.per_satellite_exceed.empty()) {
        if (b.per_satellite_exceed.size() != out.per_satellite_exceed.size())
            throw ThresholdMismatchError("per-satellite counters have different satellite counts");
        for (std::size_t l = 0; l < out.per_satellite_exceed.size(); ++l)
            for (std::size_t i = 0; i < out.per_satellite_exceed[l].size(); ++i)
                out.per_satellite_exceed[l][i] += b.per_satellite_exceed[l][i];
    }
    return out;
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t point, std::uint64_t r) {
    return derive_seed(master, {point, r});
}

} // namespace leobuf
