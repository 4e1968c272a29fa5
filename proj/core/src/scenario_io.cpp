#include "phaseid/errors.hpp"
#include "phaseid/synthfeeder.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace phaseid {
namespace {

using nlohmann::json;

PhaseMask parse_phases(const std::string& s) {
    PhaseMask mask{false, false, false};
    if (s.empty()) throw Error(ErrorKind::Parse, "line phases must not be empty");
    for (char c : s) {
        const auto p = phase_from_letter(std::string_view(&c, 1));
        if (!p) throw Error(ErrorKind::Parse, "line phases must be letters from 'ABC'");
        mask[static_cast<std::size_t>(*p)] = true;
    }
    return mask;
}

std::string phases_string(const PhaseMask& mask) {
    std::string s;
    for (std::size_t p = 0; p < 3; ++p)
        if (mask[p]) s.push_back(static_cast<char>('A' + p));
    return s;
}

Matrix3c parse_matrix(const json& j) {
    Matrix3c z{};
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != 3 || im.size() != 3) throw Error(ErrorKind::Parse, "impedance matrices must be 3x3");
    for (std::size_t i = 0; i < 3; ++i) {
        if (re[i].size() != 3 || im[i].size() != 3) throw Error(ErrorKind::Parse, "impedance matrices must be 3x3");
        for (std::size_t k = 0; k < 3; ++k) z[i][k] = Complex(re[i][k].get<double>(), im[i][k].get<double>());
    }
    return z;
}

json matrix_json(const Matrix3c& z) {
    json re = json::array();
    json im = json::array();
    for (const auto& row : z) {
        json r = json::array();
        json i = json::array();
        for (const auto& v : row) {
            r.push_back(v.real());
            i.push_back(v.imag());
        }
        re.push_back(r);
        im.push_back(i);
    }
    return json{{"re", re}, {"im", im}};
}

}  // namespace

FeederScenario parse_scenario(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("scenario JSON: ") + e.what());
    }

    try {
        FeederScenario s;
        s.name = j.value("name", std::string("unnamed"));
        s.base_kv_ll = j.at("base_kv_ll").get<double>();
        const auto& src = j.at("source");
        s.source_bus = src.at("bus").get<std::string>();
        s.source_magnitude_pu = src.value("magnitude_pu", 1.0);
        if (src.contains("angles_deg")) {
            const auto a = src.at("angles_deg").get<std::vector<double>>();
            if (a.size() != 3) throw Error(ErrorKind::Parse, "source.angles_deg needs three entries");
            s.source_angles_deg = {a[0], a[1], a[2]};
        }
        s.buses = j.at("buses").get<std::vector<std::string>>();
        s.snapshots = j.value("snapshots", std::size_t{1000});
        s.seed = j.value("seed", std::uint64_t{42});
        s.start_time_us = j.value("start_time_us", Timestamp{0});
        s.interval_us = j.value("interval_us", std::int64_t{1'000'000});
        s.load_asymmetry = j.value("load_asymmetry", 0.0);
        if (j.contains("noise")) {
            s.noise.magnitude_std_pu = j["noise"].value("magnitude_std_pu", s.noise.magnitude_std_pu);
            s.noise.angle_std_deg = j["noise"].value("angle_std_deg", s.noise.angle_std_deg);
        }
        double default_step = 0.02;
        if (j.contains("load_walk")) {
            default_step = j["load_walk"].value("step_std", default_step);
            s.walk_reversion = j["load_walk"].value("reversion", s.walk_reversion);
        }
        for (const auto& l : j.at("lines")) {
            LineSpec line;
            line.from = l.at("from").get<std::string>();
            line.to = l.at("to").get<std::string>();
            line.phases = parse_phases(l.value("phases", std::string("ABC")));
            line.impedance_ohm = parse_matrix(l.at("impedance_ohm"));
            line.transformer_shift = l.value("transformer_shift", 0);
            s.lines.push_back(std::move(line));
        }
        for (const auto& l : j.at("loads")) {
            LoadSpec load;
            load.bus = l.at("bus").get<std::string>();
            const auto phase = phase_from_letter(l.at("phase").get<std::string>());
            if (!phase) throw Error(ErrorKind::Parse, "load phase must be A, B or C");
            load.phase = *phase;
            load.kw = l.at("kw").get<double>();
            load.kvar = l.value("kvar", 0.0);
            load.step_std = l.value("step_std", default_step);
            s.loads.push_back(std::move(load));
        }
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("scenario JSON: ") + e.what());
    }
}

FeederScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open scenario '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

std::string scenario_to_json(const FeederScenario& s) {
    json j;
    j["name"] = s.name;
    j["base_kv_ll"] = s.base_kv_ll;
    j["source"] = {{"bus", s.source_bus},
                   {"magnitude_pu", s.source_magnitude_pu},
                   {"angles_deg", {s.source_angles_deg[0], s.source_angles_deg[1], s.source_angles_deg[2]}}};
    j["buses"] = s.buses;
    j["snapshots"] = s.snapshots;
    j["seed"] = s.seed;
    j["start_time_us"] = s.start_time_us;
    j["interval_us"] = s.interval_us;
    j["load_asymmetry"] = s.load_asymmetry;
    j["noise"] = {{"magnitude_std_pu", s.noise.magnitude_std_pu}, {"angle_std_deg", s.noise.angle_std_deg}};
    j["load_walk"] = {{"reversion", s.walk_reversion}};
    json lines = json::array();
    for (const auto& l : s.lines) {
        lines.push_back({{"from", l.from},
                         {"to", l.to},
                         {"phases", phases_string(l.phases)},
                         {"impedance_ohm", matrix_json(l.impedance_ohm)},
                         {"transformer_shift", l.transformer_shift}});
    }
    j["lines"] = lines;
    json loads = json::array();
    for (const auto& l : s.loads) {
        loads.push_back({{"bus", l.bus},
                         {"phase", std::string(1, phase_letter(l.phase))},
                         {"kw", l.kw},
                         {"kvar", l.kvar},
                         {"step_std", l.step_std}});
    }
    j["loads"] = loads;
    return j.dump(2);
}

}  // namespace phaseid
