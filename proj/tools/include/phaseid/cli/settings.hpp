#pragma once

#include <phaseid/types.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace phaseid::cli {

/// Fully resolved options for `identify` and `sweep`.
struct RunSettings {
    ScoringConfig scoring;
    std::optional<std::string> preset;
    double margin_threshold = 0.0;
    std::int64_t tolerance_us = -1;  ///< negative: quarter sample period
    double min_overlap = 0.9;
    std::size_t windows = 21;
    std::string schedule = "linear";
    std::string ref_bus;
    std::string tgt_bus;
    std::optional<double> ref_nominal_v;
    std::optional<double> tgt_nominal_v;
};

/// One layer of user-supplied settings; unset fields defer to lower layers.
struct SettingsLayer {
    std::optional<std::string> preset;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<std::string> magnitude_mode;
    std::optional<std::string> angle_mode;
    std::optional<std::string> sign_convention;
    std::optional<double> margin_threshold;
    std::optional<std::int64_t> tolerance_us;
    std::optional<double> min_overlap;
    std::optional<std::size_t> windows;
    std::optional<std::string> schedule;
    std::optional<std::string> ref_bus;
    std::optional<std::string> tgt_bus;
    std::optional<double> ref_nominal_v;
    std::optional<double> tgt_nominal_v;
};

/// Reads a configuration file layer. Unknown keys are rejected.
SettingsLayer layer_from_json(const nlohmann::json& j);

/// Sets alpha and beta for a named preset: "sim" (1, 1) or "field" (10000, 1).
void apply_preset(ScoringConfig& cfg, std::string_view preset);

/// Precedence, lowest first: defaults, config-file preset, config-file
/// values, flag preset, flag values. Throws InvalidInput on bad values.
RunSettings resolve_settings(const SettingsLayer& file, const SettingsLayer& flags);

nlohmann::json settings_to_json(const RunSettings& s);

}  // namespace phaseid::cli
