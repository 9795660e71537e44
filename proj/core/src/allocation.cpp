#include "leobuf/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "leobuf/errors.hpp"

namespace leobuf {

std::string_view to_string(PolicyKind p) noexcept {
    switch (p) {
    case PolicyKind::NoIsl: return "no-isl";
    case PolicyKind::VirtualQueue: return "virtual";
    case PolicyKind::MqlaIsl: return "mqla";
    }
    return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view s) noexcept {
    if (s == "no-isl") return PolicyKind::NoIsl;
    if (s == "virtual") return PolicyKind::VirtualQueue;
    if (s == "mqla") return PolicyKind::MqlaIsl;
    return std::nullopt;
}

double expected_next_load(double q, ChannelState prev_state, const PoissonArrivalParams& arr,
                          const GilbertElliottParams& ch) {
    const double c = static_cast<double>(ch.c);
    const double expected_service = prev_state == ChannelState::Bad ? c * ch.alpha : c * ch.beta_bar();
    return q + arr.lambda - expected_service;
}

double allocation_objective(std::span<const double> targets, std::span<const ChannelState> prev_states,
                            const PoissonArrivalParams& arr, const GilbertElliottParams& ch) {
    if (targets.size() != prev_states.size() || targets.empty())
        throw std::invalid_argument("targets and states must be non-empty and of equal length");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < targets.size(); ++l)
        worst = std::max(worst, expected_next_load(targets[l], prev_states[l], arr, ch));
    return worst;
}

AllocationLevels mqla_levels(std::int64_t total, std::int64_t satellites, std::int64_t good_count,
                             const GilbertElliottParams& ch) {
    if (satellites < 1) throw std::invalid_argument("at least one satellite required");
    if (total < 0) throw std::invalid_argument("total queue length must be non-negative");
    if (good_count < 0 || good_count > satellites) throw std::invalid_argument("good count out of range");

    const std::int64_t n = satellites;
    const std::int64_t z = good_count;
    const double q = static_cast<double>(total);
    AllocationLevels lv{AllocationCase::III, static_cast<double>(ch.c) * (ch.beta_bar() - ch.alpha), 0.0, 0.0};

    // An empty group makes its case bound infinite, so that case cannot fire.
    // Q = 0 still follows the case split; every case then allocates zeros.
    if (z > 0 && lv.delta > q / static_cast<double>(z)) {
        lv.case_tag = AllocationCase::I;
        lv.good_target = q / static_cast<double>(z);
    } else if (z < n && lv.delta < -q / static_cast<double>(n - z)) {
        lv.case_tag = AllocationCase::II;
        lv.bad_target = q / static_cast<double>(n - z);
    } else {
        const double nl = static_cast<double>(n);
        // Clamp rounding noise at the case boundaries.
        lv.bad_target = std::max(0.0, (q - static_cast<double>(z) * lv.delta) / nl);
        lv.good_target = std::max(0.0, (q + static_cast<double>(n - z) * lv.delta) / nl);
    }
    return lv;
}

AllocationDecision mqla_allocate(std::int64_t total, std::span<const ChannelState> prev_states,
                                 const GilbertElliottParams& ch) {
    const auto n = static_cast<std::int64_t>(prev_states.size());
    const auto z = static_cast<std::int64_t>(std::count(prev_states.begin(), prev_states.end(), ChannelState::Good));
    const AllocationLevels lv = mqla_levels(total, n, z, ch);

    AllocationDecision d;
    d.case_tag = lv.case_tag;
    d.delta = lv.delta;
    d.z_count = z;
    d.bad_target = lv.bad_target;
    d.good_target = lv.good_target;
    d.fractional.resize(prev_states.size());
    for (std::size_t l = 0; l < prev_states.size(); ++l)
        d.fractional[l] = prev_states[l] == ChannelState::Good ? d.good_target : d.bad_target;
    d.targets = integerize(d.fractional, total);
    return d;
}

std::vector<std::int64_t> integerize(std::span<const double> fractional, std::int64_t total) {
    std::vector<std::int64_t> out(fractional.size());
    std::vector<std::size_t> order;
    integerize_into(fractional, total, out, order);
    return out;
}

void integerize_into(std::span<const double> fractional, std::int64_t total, std::span<std::int64_t> out,
                     std::vector<std::size_t>& order) {
    const double sum = std::accumulate(fractional.begin(), fractional.end(), 0.0);
    if (!(std::abs(sum - static_cast<double>(total)) <= 1e-6)) {
        std::ostringstream msg;
        msg << "fractional targets sum to " << sum << ", expected " << total;
        throw SumMismatchError(msg.str());
    }
    if (out.size() != fractional.size()) throw std::invalid_argument("output size mismatch");

    const std::size_t n = fractional.size();
    std::int64_t assigned = 0;
    for (std::size_t l = 0; l < n; ++l) {
        out[l] = static_cast<std::int64_t>(std::floor(std::max(0.0, fractional[l])));
        assigned += out[l];
    }
    auto remainder = [&](std::size_t l) { return std::max(0.0, fractional[l]) - static_cast<double>(out[l]); };

    std::int64_t left = total - assigned;
    if (left > 0) {
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return remainder(a) > remainder(b); });
        // Remainders are taken before any increment, so sort first, then add.
        for (std::size_t i = 0; left > 0; i = (i + 1) % n, --left) ++out[order[i]];
    } else {
        // Floors exceed the total only through rounding noise in the input.
        for (std::size_t l = n; left < 0 && l-- > 0;) {
            const std::int64_t take = std::min(out[l], -left);
            out[l] -= take;
            left += take;
        }
    }
}

void cap_targets(std::span<std::int64_t> targets, std::int64_t cap) {
    std::int64_t excess = 0;
    for (auto& t : targets) {
        if (t > cap) {
            excess += t - cap;
            t = cap;
        }
    }
    for (; excess > 0; --excess) {
        auto it = std::min_element(targets.begin(), targets.end());
        if (*it >= cap) throw std::invalid_argument("total exceeds aggregate capacity");
        ++*it;
    }
}

} // namespace leobuf
