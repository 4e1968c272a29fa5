#pragma once

#include "phaseid/scoring.hpp"
#include "phaseid/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace phaseid {

struct SampleWindow {
    Timestamp start = 0;
    Timestamp end = 0;
    std::size_t count = 0;
};

struct IdentificationResult {
    std::vector<ScoredAssignment> ranked;  ///< descending objective
    PhaseAssignment winner;
    double margin = 0.0;  ///< objective of rank 1 minus rank 2
    SampleWindow window;
};

struct SweepEntry {
    std::size_t window_length = 0;
    IdentificationResult result;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  ///< strictly increasing window length
    bool consistent = false;          ///< every window chose the same winner
};

/// All injective maps from `m` target channels onto `reference_channels`
/// reference phases, in lexicographic order. With three reference phases
/// this yields 3, 6 and 6 maps for m = 1, 2, 3.
std::vector<PhaseAssignment> enumerate_assignments(std::size_t m, std::size_t reference_channels = 3);

/// Scores every candidate assignment of `tgt` onto `ref` and ranks them.
///
/// Records must already share a time base (see align_records). Ranking is
/// by objective, descending, with ties resolved lexicographically on the
/// mapping, so the output is a deterministic function of the inputs.
IdentificationResult identify(const BusRecord& ref, const BusRecord& tgt, const ScoringConfig& cfg);

/// Reference phase letters in target-channel order, taken from the
/// reference record's channel labels (e.g. "BCA").
std::string assignment_label(const PhaseAssignment& a, const BusRecord& ref);

/// identify() restricted to the first `n` aligned samples.
IdentificationResult identify_prefix(const BusRecord& ref, const BusRecord& tgt, const ScoringConfig& cfg,
                                     std::size_t n);

/// `count` window lengths spread linearly from total/count up to total.
std::vector<std::size_t> linear_schedule(std::size_t total, std::size_t count = 21);

/// Runs identify on the leading `lengths[k]` samples for every k.
SweepResult window_sweep(const BusRecord& ref, const BusRecord& tgt, const ScoringConfig& cfg,
                         const std::vector<std::size_t>& lengths);

}  // namespace phaseid
