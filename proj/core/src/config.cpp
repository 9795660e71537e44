#include "leobuf/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "leobuf/csv.hpp"
#include "leobuf/errors.hpp"

namespace leobuf {

namespace {

constexpr std::array<std::string_view, 15> kKeys = {
    "alpha", "beta", "lambda", "c", "L", "policy", "slots", "warmup",
    "seed", "tau", "qmax", "mode", "measure", "initial_channel", "per_satellite",
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const SettingValue& v) {
    const std::string_view text = trim(v.value);
    T out{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("cannot parse '" + v.value + "' as a number", key, v.line);
    return out;
}

std::vector<std::int64_t> parse_list(const std::string& key, const SettingValue& v) {
    std::vector<std::int64_t> out;
    std::string_view rest = v.value;
    while (true) {
        const auto comma = rest.find(',');
        SettingValue item{std::string(trim(rest.substr(0, comma))), v.line};
        out.push_back(parse_number<std::int64_t>(key, item));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

bool parse_bool(const std::string& key, const SettingValue& v) {
    const auto t = trim(v.value);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw ConfigError("expected true or false", key, v.line);
}

} // namespace

bool is_config_key(std::string_view key) noexcept {
    return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

Settings read_settings(std::string_view text) {
    Settings out;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key=value", {}, line_no);
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("missing key", {}, line_no);
        if (!is_config_key(key)) throw ConfigError("unknown key", key, line_no);
        if (out.contains(key)) throw ConfigError("duplicate key", key, line_no);
        out.emplace(key, SettingValue{value, line_no});
    }
    return out;
}

ConstellationConfig build_config(const Settings& settings) {
    ConstellationConfig cfg;
    auto get = [&](std::string_view key) -> const SettingValue* {
        auto it = settings.find(key);
        return it == settings.end() ? nullptr : &it->second;
    };
    for (const auto& [key, _] : settings)
        if (!is_config_key(key)) throw ConfigError("unknown key", key);

    auto number = [&]<typename T>(const char* key, T& dst) {
        if (const auto* v = get(key)) dst = parse_number<T>(key, *v);
    };
    number("alpha", cfg.channel.alpha);
    number("beta", cfg.channel.beta);
    number("lambda", cfg.arrivals.lambda);
    number("c", cfg.channel.c);
    number("L", cfg.satellites);
    number("slots", cfg.slots);
    number("warmup", cfg.warmup_slots);
    number("seed", cfg.seed);

    if (const auto* v = get("policy")) {
        auto p = parse_policy(trim(v->value));
        if (!p) throw ConfigError("expected no-isl, virtual or mqla", "policy", v->line);
        cfg.policy = *p;
    }
    if (const auto* v = get("measure")) {
        const auto t = trim(v->value);
        if (t == "pre") cfg.measure = MeasureEpoch::PreReallocation;
        else if (t == "post") cfg.measure = MeasureEpoch::PostReallocation;
        else throw ConfigError("expected pre or post", "measure", v->line);
    }
    if (const auto* v = get("initial_channel")) {
        const auto t = trim(v->value);
        if (t == "stationary") cfg.initial_channel = InitialChannel::Stationary;
        else if (t == "good") cfg.initial_channel = InitialChannel::Good;
        else if (t == "bad") cfg.initial_channel = InitialChannel::Bad;
        else throw ConfigError("expected stationary, good or bad", "initial_channel", v->line);
    }
    if (const auto* v = get("per_satellite")) cfg.per_satellite = parse_bool("per_satellite", *v);

    bool drop = false;
    if (const auto* v = get("mode")) {
        const auto t = trim(v->value);
        if (t == "drop") drop = true;
        else if (t != "exceed") throw ConfigError("expected exceed or drop", "mode", v->line);
    }
    std::optional<std::int64_t> qmax;
    if (const auto* v = get("qmax")) {
        qmax = parse_number<std::int64_t>("qmax", *v);
        if (*qmax < 1) throw ConfigError("must be a positive integer", "qmax", v->line);
    }
    if (drop && !qmax) throw ConfigError("drop mode requires qmax", "mode", get("mode")->line);
    if (drop) cfg.q_max = qmax;

    if (const auto* v = get("tau")) {
        cfg.thresholds = parse_list("tau", *v);
        std::sort(cfg.thresholds.begin(), cfg.thresholds.end());
        cfg.thresholds.erase(std::unique(cfg.thresholds.begin(), cfg.thresholds.end()), cfg.thresholds.end());
    } else if (qmax) {
        cfg.thresholds = {*qmax};
    }

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const auto* v = get(e.key());
        if (v && v->line > 0) throw ConfigError(e.detail(), e.key(), v->line);
        throw;
    }
    return cfg;
}

ConstellationConfig parse_config(std::string_view text) { return build_config(read_settings(text)); }

std::string serialize_config(const ConstellationConfig& cfg) {
    std::ostringstream out;
    out << "alpha=" << format_double(cfg.channel.alpha) << '\n';
    out << "beta=" << format_double(cfg.channel.beta) << '\n';
    out << "lambda=" << format_double(cfg.arrivals.lambda) << '\n';
    out << "c=" << cfg.channel.c << '\n';
    out << "L=" << cfg.satellites << '\n';
    out << "policy=" << to_string(cfg.policy) << '\n';
    out << "slots=" << cfg.slots << '\n';
    out << "warmup=" << cfg.warmup_slots << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "tau=";
    for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) out << (i ? "," : "") << cfg.thresholds[i];
    out << '\n';
    if (cfg.q_max) {
        out << "mode=drop\n";
        out << "qmax=" << *cfg.q_max << '\n';
    } else {
        out << "mode=exceed\n";
    }
    out << "measure=" << (cfg.measure == MeasureEpoch::PreReallocation ? "pre" : "post") << '\n';
    out << "initial_channel="
        << (cfg.initial_channel == InitialChannel::Stationary ? "stationary"
            : cfg.initial_channel == InitialChannel::Good     ? "good"
                                                              : "bad")
        << '\n';
    out << "per_satellite=" << (cfg.per_satellite ? "true" : "false") << '\n';
    return out.str();
}

} // namespace leobuf
