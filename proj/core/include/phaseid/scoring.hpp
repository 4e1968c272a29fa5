#pragma once

#include "phaseid/types.hpp"

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace phaseid {

/// Grid onto which ShiftRemoved snaps the per-pair angle offset (degrees).
inline constexpr double kTransformerShiftStep = 30.0;

// All batch scorers per-unitise magnitudes on each record's nominal voltage,
// require `ref` and `tgt` to share one timestamp vector, and require
// `a.arity() == tgt.channel_count()` with every mapped index below
// `ref.channel_count()`. Scores are averaged over the n samples and the m
// matched channel pairs.

/// Mean product of per-unit magnitudes over matched pairs.
double f_inner(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a);

/// Mean Pearson correlation of per-unit magnitudes over matched pairs.
/// Throws InsufficientVariance when a matched channel is constant.
double f_pearson(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a);

/// Mean angular distance (degrees) over matched pairs and samples.
///
/// ShiftRemoved first estimates each pair's offset as the circular median of
/// the signed target-minus-reference angle, snaps it to the nearest multiple
/// of 30 degrees, and scores the residual.
double g_angle(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a, AngleMode mode);

/// PenalizeAngle: alpha * f - beta * g. RewardAngle: alpha * f + beta * g.
double objective(double f, double g, const ScoringConfig& cfg);

/// Magnitude and angle terms for every (target channel, reference channel)
/// combination over the first `n` samples. Assignment scores are averages
/// of table entries, so each of the candidate assignments costs O(m).
class PairwiseTerms {
public:
    static constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

    PairwiseTerms(const BusRecord& ref, const BusRecord& tgt, MagnitudeMode magnitude_mode, AngleMode angle_mode,
                  std::size_t n = kAll);

    std::size_t sample_count() const noexcept { return n_; }
    std::size_t ref_channels() const noexcept { return ref_channels_; }
    std::size_t tgt_channels() const noexcept { return tgt_channels_; }

    double magnitude(std::size_t tgt_channel, std::size_t ref_channel) const {
        return magnitude_.at(tgt_channel).at(ref_channel);
    }
    double angle(std::size_t tgt_channel, std::size_t ref_channel) const {
        return angle_.at(tgt_channel).at(ref_channel);
    }

    double f(const PhaseAssignment& a) const;
    double g(const PhaseAssignment& a) const;

private:
    std::size_t n_;
    std::size_t ref_channels_;
    std::size_t tgt_channels_;
    std::array<std::array<double, 3>, 3> magnitude_{};
    std::array<std::array<double, 3>, 3> angle_{};
};

/// Finalised streaming scores for one assignment.
struct StreamingScores {
    double f_inner = 0.0;
    double f_pearson = 0.0;
    double g_raw = 0.0;
    double g_shift_removed = 0.0;
};

/// Running statistics for one assignment, foldable one sample at a time and
/// mergeable across disjoint windows.
///
/// Magnitude sums are kept about a fixed pivot of 1 pu so that the
/// second-moment sums do not cancel catastrophically for near-nominal
/// voltages. Signed angle offsets are retained only when `track_offsets` is
/// set; they are needed for the circular-median shift estimate.
class PairStatistics {
public:
    explicit PairStatistics(PhaseAssignment assignment, double ref_base = 1.0, double tgt_base = 1.0,
                            bool track_offsets = true);

    /// `ref_tuple[r]` is reference channel r, `tgt_tuple[c]` target channel c,
    /// all at the same timestamp.
    void update(std::span<const PhasorSample> ref_tuple, std::span<const PhasorSample> tgt_tuple);

    /// Appends another window's statistics. Both must describe the same
    /// assignment and bases.
    void merge(const PairStatistics& other);

    const PhaseAssignment& assignment() const noexcept { return assignment_; }
    std::size_t count() const noexcept { return n_; }
    bool tracks_offsets() const noexcept { return track_offsets_; }

    double f_inner() const;
    double f_pearson() const;
    double g_raw() const;
    /// Throws InvalidInput when offsets are not tracked.
    double g_shift_removed() const;
    /// Circular median of the signed offset of matched pair `p` (degrees).
    double offset_estimate(std::size_t p) const;

    /// All four scores; throws InsufficientData when no sample was folded.
    StreamingScores finalize() const;

private:
    struct Sums {
        double x = 0.0;
        double y = 0.0;
        double xy = 0.0;
        double xx = 0.0;
        double yy = 0.0;
        double distance = 0.0;
        std::vector<double> offsets;
    };

    void require_data() const;

    PhaseAssignment assignment_;
    double ref_base_;
    double tgt_base_;
    bool track_offsets_;
    std::size_t n_ = 0;
    std::array<Sums, 3> pairs_{};
};

/// Returns `stats` with one more aligned sample tuple folded in.
PairStatistics update_statistics(PairStatistics stats, std::span<const PhasorSample> ref_tuple,
                                 std::span<const PhasorSample> tgt_tuple);

/// Folds samples [begin, end) of two aligned records.
PairStatistics fold_statistics(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a,
                               std::size_t begin, std::size_t end, bool track_offsets = true);

}  // namespace phaseid
