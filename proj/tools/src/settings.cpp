#include "phaseid/cli/settings.hpp"

#include <phaseid/errors.hpp>

#include <set>

namespace phaseid::cli {
namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void apply_layer(RunSettings& s, const SettingsLayer& layer) {
    if (layer.alpha) s.scoring.alpha = *layer.alpha;
    if (layer.beta) s.scoring.beta = *layer.beta;
    if (layer.magnitude_mode) {
        const auto m = parse_magnitude_mode(*layer.magnitude_mode);
        if (!m) throw Error(ErrorKind::InvalidInput, "unknown magnitude mode '" + *layer.magnitude_mode + "'");
        s.scoring.magnitude_mode = *m;
    }
    if (layer.angle_mode) {
        const auto m = parse_angle_mode(*layer.angle_mode);
        if (!m) throw Error(ErrorKind::InvalidInput, "unknown angle mode '" + *layer.angle_mode + "'");
        s.scoring.angle_mode = *m;
    }
    if (layer.sign_convention) {
        const auto c = parse_sign_convention(*layer.sign_convention);
        if (!c) throw Error(ErrorKind::InvalidInput, "unknown sign convention '" + *layer.sign_convention + "'");
        s.scoring.sign_convention = *c;
    }
    if (layer.margin_threshold) s.margin_threshold = *layer.margin_threshold;
    if (layer.tolerance_us) s.tolerance_us = *layer.tolerance_us;
    if (layer.min_overlap) s.min_overlap = *layer.min_overlap;
    if (layer.windows) s.windows = *layer.windows;
    if (layer.schedule) s.schedule = *layer.schedule;
    if (layer.ref_bus) s.ref_bus = *layer.ref_bus;
    if (layer.tgt_bus) s.tgt_bus = *layer.tgt_bus;
    if (layer.ref_nominal_v) s.ref_nominal_v = layer.ref_nominal_v;
    if (layer.tgt_nominal_v) s.tgt_nominal_v = layer.tgt_nominal_v;
}

}  // namespace

SettingsLayer layer_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "preset", "alpha", "beta", "magnitude_mode", "angle_mode", "sign_convention", "margin_threshold",
        "tolerance_us", "min_overlap", "windows", "schedule", "ref", "tgt", "ref_nominal_v", "tgt_nominal_v"};
    if (!j.is_object()) throw Error(ErrorKind::Parse, "config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");
    }
    SettingsLayer layer;
    try {
        read(j, "preset", layer.preset);
        read(j, "alpha", layer.alpha);
        read(j, "beta", layer.beta);
        read(j, "magnitude_mode", layer.magnitude_mode);
        read(j, "angle_mode", layer.angle_mode);
        read(j, "sign_convention", layer.sign_convention);
        read(j, "margin_threshold", layer.margin_threshold);
        read(j, "tolerance_us", layer.tolerance_us);
        read(j, "min_overlap", layer.min_overlap);
        read(j, "windows", layer.windows);
        read(j, "schedule", layer.schedule);
        read(j, "ref", layer.ref_bus);
        read(j, "tgt", layer.tgt_bus);
        read(j, "ref_nominal_v", layer.ref_nominal_v);
        read(j, "tgt_nominal_v", layer.tgt_nominal_v);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("config file: ") + e.what());
    }
    return layer;
}

void apply_preset(ScoringConfig& cfg, std::string_view preset) {
    if (preset == "sim") {
        cfg.alpha = 1.0;
        cfg.beta = 1.0;
    } else if (preset == "field") {
        cfg.alpha = 10000.0;
        cfg.beta = 1.0;
    } else {
        throw Error(ErrorKind::InvalidInput, "unknown preset '" + std::string(preset) + "' (expected sim or field)");
    }
}

RunSettings resolve_settings(const SettingsLayer& file, const SettingsLayer& flags) {
    RunSettings s;
    if (file.preset) {
        apply_preset(s.scoring, *file.preset);
        s.preset = file.preset;
    }
    apply_layer(s, file);
    if (flags.preset) {
        apply_preset(s.scoring, *flags.preset);
        s.preset = flags.preset;
    }
    apply_layer(s, flags);

    s.scoring.validate();
    if (!(s.margin_threshold >= 0.0)) throw Error(ErrorKind::InvalidInput, "margin threshold must be >= 0");
    if (!(s.min_overlap >= 0.0 && s.min_overlap <= 1.0)) throw Error(ErrorKind::InvalidInput, "min overlap must lie in [0, 1]");
    if (s.windows == 0) throw Error(ErrorKind::InvalidInput, "windows must be positive");
    if (s.schedule != "linear") throw Error(ErrorKind::InvalidInput, "only the linear schedule is supported");
    if (s.ref_bus.empty() || s.tgt_bus.empty()) throw Error(ErrorKind::InvalidInput, "both --ref and --tgt bus ids are required");
    return s;
}

nlohmann::json settings_to_json(const RunSettings& s) {
    nlohmann::json j;
    j["alpha"] = s.scoring.alpha;
    j["beta"] = s.scoring.beta;
    j["magnitude_mode"] = std::string(to_string(s.scoring.magnitude_mode));
    j["angle_mode"] = std::string(to_string(s.scoring.angle_mode));
    j["sign_convention"] = std::string(to_string(s.scoring.sign_convention));
    j["preset"] = s.preset ? nlohmann::json(*s.preset) : nlohmann::json(nullptr);
    j["margin_threshold"] = s.margin_threshold;
    j["tolerance_us"] = s.tolerance_us;
    j["min_overlap"] = s.min_overlap;
    j["ref"] = s.ref_bus;
    j["tgt"] = s.tgt_bus;
    j["ref_nominal_v"] = s.ref_nominal_v ? nlohmann::json(*s.ref_nominal_v) : nlohmann::json(nullptr);
    j["tgt_nominal_v"] = s.tgt_nominal_v ? nlohmann::json(*s.tgt_nominal_v) : nlohmann::json(nullptr);
    return j;
}

}  // namespace phaseid::cli
