#include "phaseid/cli/run_report.hpp"

#include <phaseid/errors.hpp>

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace phaseid::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::Io, "sha256: digest initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

nlohmann::json alignment_json(const AlignmentReport& r) {
    return {{"paired_count", r.paired_count},
            {"dropped_ref", r.dropped_ref},
            {"dropped_tgt", r.dropped_tgt},
            {"overlap_fraction", r.overlap_fraction}};
}

namespace {

std::string channel_letters(const BusRecord& rec) {
    std::string s;
    for (const auto& ch : rec.channels()) s.push_back(phase_letter(ch.phase()));
    return s;
}

nlohmann::json ranked_json(const IdentificationResult& result, const BusRecord& ref, const BusRecord& tgt) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& s : result.ranked) {
        nlohmann::json pairs = nlohmann::json::array();
        for (std::size_t c = 0; c < s.assignment.arity(); ++c) {
            pairs.push_back({{"target", std::string(1, phase_letter(tgt.channel(c).phase()))},
                             {"reference", std::string(1, phase_letter(ref.channel(s.assignment[c]).phase()))}});
        }
        ranked.push_back({{"rank", s.rank},
                          {"assignment", assignment_label(s.assignment, ref)},
                          {"pairs", pairs},
                          {"f_score", s.f_score},
                          {"g_score", s.g_score},
                          {"objective", s.objective}});
    }
    return ranked;
}

}  // namespace

nlohmann::json identification_json(const IdentificationResult& result, const BusRecord& ref, const BusRecord& tgt,
                                   double margin_threshold) {
    return {{"reference_channels", channel_letters(ref)},
            {"target_channels", channel_letters(tgt)},
            {"winner", assignment_label(result.winner, ref)},
            {"margin", result.margin},
            {"ambiguous", result.margin < margin_threshold},
            {"tie", result.margin == 0.0},
            {"window", {{"start_us", result.window.start}, {"end_us", result.window.end}, {"n", result.window.count}}},
            {"ranked", ranked_json(result, ref, tgt)}};
}

nlohmann::json sweep_json(const SweepResult& sweep, const BusRecord& ref, const BusRecord& tgt,
                          double margin_threshold) {
    nlohmann::json windows = nlohmann::json::array();
    double min_margin = sweep.entries.front().result.margin;
    bool any_ambiguous = false;
    for (const auto& e : sweep.entries) {
        auto j = identification_json(e.result, ref, tgt, margin_threshold);
        j["window_length"] = e.window_length;
        min_margin = std::min(min_margin, e.result.margin);
        any_ambiguous = any_ambiguous || e.result.margin < margin_threshold;
        windows.push_back(std::move(j));
    }
    return {{"consistent", sweep.consistent},
            {"winner", assignment_label(sweep.entries.back().result.winner, ref)},
            {"min_margin", min_margin},
            {"ambiguous", any_ambiguous},
            {"windows", windows}};
}

void write_sweep_plot_csv(std::ostream& out, const SweepResult& sweep, const BusRecord& ref) {
    out << "window_length,assignment,f_score,g_score,objective,rank\n";
    char buf[128];
    for (const auto& e : sweep.entries) {
        for (const auto& s : e.result.ranked) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,", s.f_score, s.g_score, s.objective);
            out << e.window_length << ',' << assignment_label(s.assignment, ref) << buf << s.rank << '\n';
        }
    }
}

std::string render_report(const nlohmann::json& report) {
    if (!report.is_object() || report.value("schema_version", 0) != kReportSchemaVersion) {
        throw Error(ErrorKind::Parse, "not a phaseid run report (schema_version " + std::to_string(kReportSchemaVersion) + ")");
    }
    std::ostringstream os;
    char line[256];
    try {
        const auto& cfg = report.at("config");
        const auto command = report.at("command").get<std::string>();
        os << command << ": " << cfg.at("ref").get<std::string>() << " -> " << cfg.at("tgt").get<std::string>() << '\n';
        std::snprintf(line, sizeof line, "  alpha=%g beta=%g magnitude=%s angle=%s sign=%s\n",
                      cfg.at("alpha").get<double>(), cfg.at("beta").get<double>(),
                      cfg.at("magnitude_mode").get<std::string>().c_str(), cfg.at("angle_mode").get<std::string>().c_str(),
                      cfg.at("sign_convention").get<std::string>().c_str());
        os << line;
        const auto& al = report.at("alignment");
        std::snprintf(line, sizeof line, "  aligned %zu samples (overlap %.4f)\n", al.at("paired_count").get<std::size_t>(),
                      al.at("overlap_fraction").get<double>());
        os << line;

        auto table = [&](const nlohmann::json& r) {
            for (const auto& row : r.at("ranked")) {
                std::snprintf(line, sizeof line, "    #%zu %-4s F=%-12.6g G=%-12.6g J=%.6g\n",
                              row.at("rank").get<std::size_t>(), row.at("assignment").get<std::string>().c_str(),
                              row.at("f_score").get<double>(), row.at("g_score").get<double>(),
                              row.at("objective").get<double>());
                os << line;
            }
        };
        const auto& res = report.at("result");
        if (command == "identify") {
            std::snprintf(line, sizeof line, "  winner %s  margin %.6g%s\n", res.at("winner").get<std::string>().c_str(),
                          res.at("margin").get<double>(), res.at("ambiguous").get<bool>() ? "  [AMBIGUOUS]" : "");
            os << line;
            table(res);
        } else {
            std::snprintf(line, sizeof line, "  %zu windows, consistent=%s, final winner %s, min margin %.6g%s\n",
                          res.at("windows").size(), res.at("consistent").get<bool>() ? "yes" : "no",
                          res.at("winner").get<std::string>().c_str(), res.at("min_margin").get<double>(),
                          res.at("ambiguous").get<bool>() ? "  [AMBIGUOUS]" : "");
            os << line;
            for (const auto& w : res.at("windows")) {
                std::snprintf(line, sizeof line, "  n=%-8zu winner %s margin %.6g\n", w.at("window_length").get<std::size_t>(),
                              w.at("winner").get<std::string>().c_str(), w.at("margin").get<double>());
                os << line;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed run report: ") + e.what());
    }
    return os.str();
}

}  // namespace phaseid::cli
