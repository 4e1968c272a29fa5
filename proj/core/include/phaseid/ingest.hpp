#pragma once

#include "phaseid/types.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace phaseid {

/// Header line of the canonical long-format phasor CSV.
inline constexpr std::string_view kPhasorCsvHeader = "timestamp_us,bus_id,phase,magnitude_v,angle_deg";

struct ParseOptions {
    /// Nominal line-to-neutral voltage per bus id. Buses not listed get the
    /// mean magnitude over all of their samples.
    std::map<std::string, double> nominal_voltage;
};

/// Reads the canonical CSV. One BusRecord per distinct bus id, in order of
/// first appearance; channels sorted A, B, C; samples time-sorted. The
/// nominal rate of each channel is inferred from its median sample spacing.
std::vector<BusRecord> parse_phasor_csv(const std::filesystem::path& path, const ParseOptions& options = {});
std::vector<BusRecord> parse_phasor_csv(std::istream& in, const ParseOptions& options = {});

/// Writes records in canonical form: rows ordered by timestamp, then record
/// order, then channel order. Magnitudes and angles carry six decimals.
void write_phasor_csv(std::ostream& out, std::span<const BusRecord> records);

struct AlignmentReport {
    std::size_t paired_count = 0;
    std::size_t dropped_ref = 0;
    std::size_t dropped_tgt = 0;
    double overlap_fraction = 0.0;
};

struct AlignmentOptions {
    /// Matching window in microseconds; negative selects a quarter of the
    /// shorter of the two nominal periods.
    std::int64_t tolerance_us = -1;
    double min_overlap = 0.9;
};

struct AlignedPair {
    BusRecord ref;
    BusRecord tgt;
    AlignmentReport report;
};

/// Pairs two records onto the reference's time base.
///
/// Samples are matched one-to-one in time order when their timestamps lie
/// within the tolerance; everything else is dropped (no interpolation). Both
/// outputs share the reference timestamps. A bus whose own channels are not
/// co-sampled is first reduced to the timestamps all its channels share.
///
/// Throws InvalidInput when the tolerance reaches half a sample period,
/// InsufficientData on empty input, and InsufficientOverlap when
/// paired / min(ref count, tgt count) falls below `min_overlap`.
AlignedPair align_records(const BusRecord& ref, const BusRecord& tgt, const AlignmentOptions& options = {});

/// Finds a record by bus id; throws InsufficientData when absent.
const BusRecord& find_bus(std::span<const BusRecord> records, std::string_view bus_id);

}  // namespace phaseid
