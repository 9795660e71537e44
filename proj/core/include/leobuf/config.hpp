// key=value configuration files.
//
//   # comment
//   alpha = 0.7
//   tau = 10,20,30
//
// Keys: alpha beta lambda c L policy slots warmup seed tau qmax mode
// measure initial_channel per_satellite. Omitted keys take the defaults of
// ConstellationConfig. `mode=drop` requires `qmax`; in the default
// `mode=exceed` a `qmax` without `tau` tracks tau = qmax.
#pragma once

#include <map>
#include <string>
#include <string_view>

#include "leobuf/simulator.hpp"

namespace leobuf {

struct SettingValue {
    std::string value;
    int line = 0;  ///< 0 for values that did not come from a file
};

using Settings = std::map<std::string, SettingValue, std::less<>>;

/// Tokenises the file; rejects malformed lines, unknown and duplicate keys.
Settings read_settings(std::string_view text);

/// Builds and validates a configuration from settings.
ConstellationConfig build_config(const Settings& settings);

ConstellationConfig parse_config(std::string_view text);

/// Canonical text listing every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ConstellationConfig& config);

bool is_config_key(std::string_view key) noexcept;

} // namespace leobuf
