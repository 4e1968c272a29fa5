#pragma once

#include <phaseid/ingest.hpp>
#include <phaseid/search.hpp>

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace phaseid::cli {

inline constexpr int kReportSchemaVersion = 1;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

nlohmann::json alignment_json(const AlignmentReport& report);

/// Ranked assignments, winner, margin, window, and ambiguity flags.
nlohmann::json identification_json(const IdentificationResult& result, const BusRecord& ref, const BusRecord& tgt,
                                   double margin_threshold);

nlohmann::json sweep_json(const SweepResult& sweep, const BusRecord& ref, const BusRecord& tgt,
                          double margin_threshold);

/// One row per (window, assignment):
/// window_length,assignment,f_score,g_score,objective,rank
void write_sweep_plot_csv(std::ostream& out, const SweepResult& sweep, const BusRecord& ref);

/// Human-readable summary of an identify or sweep report. Throws Parse on a
/// document that is not a run report of the supported schema version.
std::string render_report(const nlohmann::json& report);

}  // namespace phaseid::cli
