#include "phaseid/scoring.hpp"

#include "phaseid/angles.hpp"
#include "phaseid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace phaseid {
namespace {

constexpr double kPivot = 1.0;

// Series whose standard deviation is below 1e-9 of their RMS value are
// treated as constant.
bool degenerate_variance(double variance, double mean_square) { return variance <= 1e-18 * mean_square; }

void check_inputs(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a, std::size_t n) {
    if (a.arity() != tgt.channel_count()) {
        throw Error(ErrorKind::InvalidInput, "assignment arity does not match target channel count");
    }
    for (auto r : a.mapping()) {
        if (r >= ref.channel_count()) throw Error(ErrorKind::InvalidInput, "assignment maps onto a missing reference channel");
    }
    if (!ref.is_aligned() || !tgt.is_aligned()) {
        throw Error(ErrorKind::Alignment, "channels within a record do not share timestamps");
    }
    const auto rs = ref.channel(0).samples();
    const auto ts = tgt.channel(0).samples();
    if (rs.size() != ts.size()) throw Error(ErrorKind::Alignment, "records have different lengths; align them first");
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (rs[i].t != ts[i].t) throw Error(ErrorKind::Alignment, "records have different timestamps; align them first");
    }
    if (n == 0 || rs.empty()) throw Error(ErrorKind::InsufficientData, "empty series");
    if (n > rs.size()) throw Error(ErrorKind::InvalidInput, "window exceeds available samples");
}

double pair_inner(std::span<const PhasorSample> r, std::span<const PhasorSample> t, double rb, double tb) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += (r[i].magnitude / rb) * (t[i].magnitude / tb);
    return sum / static_cast<double>(r.size());
}

double pair_pearson(std::span<const PhasorSample> r, std::span<const PhasorSample> t, double rb, double tb) {
    const auto n = static_cast<double>(r.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        mx += r[i].magnitude / rb;
        my += t[i].magnitude / tb;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double dx = r[i].magnitude / rb - mx;
        const double dy = t[i].magnitude / tb - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (degenerate_variance(sxx / n, mx * mx + sxx / n) || degenerate_variance(syy / n, my * my + syy / n)) {
        throw Error(ErrorKind::InsufficientVariance, "constant magnitude channel; Pearson correlation undefined");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pair_raw_angle(std::span<const PhasorSample> r, std::span<const PhasorSample> t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += angular_distance(r[i].angle, t[i].angle);
    return sum / static_cast<double>(r.size());
}

double residual_distance(std::span<const double> offsets, double shift) {
    double sum = 0.0;
    for (double d : offsets) sum += angular_distance(d, shift);
    return sum / static_cast<double>(offsets.size());
}

double pair_shift_removed_angle(std::span<const PhasorSample> r, std::span<const PhasorSample> t) {
    std::vector<double> offsets(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) offsets[i] = signed_difference(r[i].angle, t[i].angle);
    const double shift = snap_to_multiple(circular_median(offsets), kTransformerShiftStep);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += angular_distance(r[i].angle, t[i].angle - shift);
    return sum / static_cast<double>(r.size());
}

template <typename PairFn>
double average_over_pairs(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a, PairFn&& fn) {
    check_inputs(ref, tgt, a, ref.sample_count());
    double total = 0.0;
    for (std::size_t c = 0; c < a.arity(); ++c) {
        total += fn(ref.channel(a[c]).samples(), tgt.channel(c).samples());
    }
    return total / static_cast<double>(a.arity());
}

}  // namespace

double f_inner(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a) {
    const double rb = ref.nominal_voltage();
    const double tb = tgt.nominal_voltage();
    return average_over_pairs(ref, tgt, a, [&](auto r, auto t) { return pair_inner(r, t, rb, tb); });
}

double f_pearson(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a) {
    const double rb = ref.nominal_voltage();
    const double tb = tgt.nominal_voltage();
    return average_over_pairs(ref, tgt, a, [&](auto r, auto t) { return pair_pearson(r, t, rb, tb); });
}

double g_angle(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a, AngleMode mode) {
    if (mode == AngleMode::Raw) return average_over_pairs(ref, tgt, a, pair_raw_angle);
    return average_over_pairs(ref, tgt, a, pair_shift_removed_angle);
}

double objective(double f, double g, const ScoringConfig& cfg) {
    return cfg.sign_convention == SignConvention::PenalizeAngle ? cfg.alpha * f - cfg.beta * g
                                                                : cfg.alpha * f + cfg.beta * g;
}

// ---------------------------------------------------------------------------
// PairwiseTerms

PairwiseTerms::PairwiseTerms(const BusRecord& ref, const BusRecord& tgt, MagnitudeMode magnitude_mode,
                             AngleMode angle_mode, std::size_t n)
    : n_(n == kAll ? ref.sample_count() : n), ref_channels_(ref.channel_count()), tgt_channels_(tgt.channel_count()) {
    std::vector<std::uint8_t> identity(tgt_channels_);
    for (std::size_t c = 0; c < tgt_channels_; ++c) identity[c] = static_cast<std::uint8_t>(c);
    // Validation only needs a well-formed assignment of the right arity.
    if (tgt_channels_ <= ref_channels_) {
        check_inputs(ref, tgt, PhaseAssignment(std::span<const std::uint8_t>(identity)), n_);
    } else {
        throw Error(ErrorKind::InvalidInput, "target has more channels than the reference");
    }

    const double rb = ref.nominal_voltage();
    const double tb = tgt.nominal_voltage();
    for (std::size_t c = 0; c < tgt_channels_; ++c) {
        const auto t = tgt.channel(c).samples().first(n_);
        for (std::size_t r = 0; r < ref_channels_; ++r) {
            const auto s = ref.channel(r).samples().first(n_);
            magnitude_[c][r] = magnitude_mode == MagnitudeMode::Pearson ? pair_pearson(s, t, rb, tb)
                                                                        : pair_inner(s, t, rb, tb);
            angle_[c][r] = angle_mode == AngleMode::Raw ? pair_raw_angle(s, t) : pair_shift_removed_angle(s, t);
        }
    }
}

double PairwiseTerms::f(const PhaseAssignment& a) const {
    double total = 0.0;
    for (std::size_t c = 0; c < a.arity(); ++c) total += magnitude(c, a[c]);
    return total / static_cast<double>(a.arity());
}

double PairwiseTerms::g(const PhaseAssignment& a) const {
    double total = 0.0;
    for (std::size_t c = 0; c < a.arity(); ++c) total += angle(c, a[c]);
    return total / static_cast<double>(a.arity());
}

// ---------------------------------------------------------------------------
// PairStatistics

PairStatistics::PairStatistics(PhaseAssignment assignment, double ref_base, double tgt_base, bool track_offsets)
    : assignment_(assignment), ref_base_(ref_base), tgt_base_(tgt_base), track_offsets_(track_offsets) {
    if (assignment_.arity() == 0) throw Error(ErrorKind::InvalidInput, "PairStatistics: empty assignment");
    if (!(ref_base_ > 0.0) || !(tgt_base_ > 0.0)) throw Error(ErrorKind::InvalidInput, "PairStatistics: bases must be positive");
}

void PairStatistics::update(std::span<const PhasorSample> ref_tuple, std::span<const PhasorSample> tgt_tuple) {
    if (tgt_tuple.size() != assignment_.arity()) {
        throw Error(ErrorKind::InvalidInput, "PairStatistics::update: target tuple size mismatch");
    }
    for (std::size_t c = 0; c < assignment_.arity(); ++c) {
        const PhasorSample& r = ref_tuple[assignment_[c]];
        const PhasorSample& t = tgt_tuple[c];
        const double x = r.magnitude / ref_base_ - kPivot;
        const double y = t.magnitude / tgt_base_ - kPivot;
        Sums& s = pairs_[c];
        s.x += x;
        s.y += y;
        s.xy += x * y;
        s.xx += x * x;
        s.yy += y * y;
        s.distance += angular_distance(r.angle, t.angle);
        if (track_offsets_) s.offsets.push_back(signed_difference(r.angle, t.angle));
    }
    ++n_;
}

void PairStatistics::merge(const PairStatistics& other) {
    if (!(other.assignment_ == assignment_) || other.ref_base_ != ref_base_ || other.tgt_base_ != tgt_base_) {
        throw Error(ErrorKind::InvalidInput, "PairStatistics::merge: incompatible statistics");
    }
    for (std::size_t c = 0; c < assignment_.arity(); ++c) {
        Sums& s = pairs_[c];
        const Sums& o = other.pairs_[c];
        s.x += o.x;
        s.y += o.y;
        s.xy += o.xy;
        s.xx += o.xx;
        s.yy += o.yy;
        s.distance += o.distance;
        if (track_offsets_ && other.track_offsets_) {
            s.offsets.insert(s.offsets.end(), o.offsets.begin(), o.offsets.end());
        }
    }
    track_offsets_ = track_offsets_ && other.track_offsets_;
    n_ += other.n_;
}

void PairStatistics::require_data() const {
    if (n_ == 0) throw Error(ErrorKind::InsufficientData, "PairStatistics: no samples folded");
}

double PairStatistics::f_inner() const {
    require_data();
    const auto n = static_cast<double>(n_);
    double total = 0.0;
    for (std::size_t c = 0; c < assignment_.arity(); ++c) {
        const Sums& s = pairs_[c];
        // sum (x+p)(y+p) = sum xy + p (sum x + sum y) + n p^2
        total += (s.xy + kPivot * (s.x + s.y) + n * kPivot * kPivot) / n;
    }
    return total / static_cast<double>(assignment_.arity());
}

double PairStatistics::f_pearson() const {
    require_data();
    const auto n = static_cast<double>(n_);
    double total = 0.0;
    for (std::size_t c = 0; c < assignment_.arity(); ++c) {
        const Sums& s = pairs_[c];
        const double sxx = std::max(0.0, s.xx - s.x * s.x / n);
        const double syy = std::max(0.0, s.yy - s.y * s.y / n);
        const double sxy = s.xy - s.x * s.y / n;
        const double mx = s.x / n + kPivot;
        const double my = s.y / n + kPivot;
        if (degenerate_variance(sxx / n, mx * mx + sxx / n) || degenerate_variance(syy / n, my * my + syy / n)) {
            throw Error(ErrorKind::InsufficientVariance, "constant magnitude channel; Pearson correlation undefined");
        }
        total += std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    }
    return total / static_cast<double>(assignment_.arity());
}

double PairStatistics::g_raw() const {
    require_data();
    double total = 0.0;
    for (std::size_t c = 0; c < assignment_.arity(); ++c) total += pairs_[c].distance / static_cast<double>(n_);
    return total / static_cast<double>(assignment_.arity());
}

double PairStatistics::offset_estimate(std::size_t p) const {
    require_data();
    if (!track_offsets_) throw Error(ErrorKind::InvalidInput, "PairStatistics: offsets not tracked");
    return circular_median(pairs_.at(p).offsets);
}

double PairStatistics::g_shift_removed() const {
    require_data();
    if (!track_offsets_) throw Error(ErrorKind::InvalidInput, "PairStatistics: offsets not tracked");
    double total = 0.0;
    for (std::size_t c = 0; c < assignment_.arity(); ++c) {
        const auto& offsets = pairs_[c].offsets;
        const double shift = snap_to_multiple(circular_median(offsets), kTransformerShiftStep);
        total += residual_distance(offsets, shift);
    }
    return total / static_cast<double>(assignment_.arity());
}

StreamingScores PairStatistics::finalize() const {
    require_data();
    StreamingScores out;
    out.f_inner = f_inner();
    out.f_pearson = f_pearson();
    out.g_raw = g_raw();
    if (track_offsets_) out.g_shift_removed = g_shift_removed();
    return out;
}

PairStatistics update_statistics(PairStatistics stats, std::span<const PhasorSample> ref_tuple,
                                 std::span<const PhasorSample> tgt_tuple) {
    stats.update(ref_tuple, tgt_tuple);
    return stats;
}

PairStatistics fold_statistics(const BusRecord& ref, const BusRecord& tgt, const PhaseAssignment& a,
                               std::size_t begin, std::size_t end, bool track_offsets) {
    check_inputs(ref, tgt, a, std::max<std::size_t>(end, 1));
    if (begin > end) throw Error(ErrorKind::InvalidInput, "fold_statistics: begin after end");
    PairStatistics stats(a, ref.nominal_voltage(), tgt.nominal_voltage(), track_offsets);
    std::array<PhasorSample, 3> r{};
    std::array<PhasorSample, 3> t{};
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t c = 0; c < ref.channel_count(); ++c) r[c] = ref.channel(c).samples()[i];
        for (std::size_t c = 0; c < tgt.channel_count(); ++c) t[c] = tgt.channel(c).samples()[i];
        stats.update(std::span(r).first(ref.channel_count()), std::span(t).first(tgt.channel_count()));
    }
    return stats;
}

}  // namespace phaseid
