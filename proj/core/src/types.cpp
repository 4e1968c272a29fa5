#include "phaseid/types.hpp"

#include "phaseid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace phaseid {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::DuplicateSample: return "duplicate-sample";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Alignment: return "alignment";
        case ErrorKind::InsufficientOverlap: return "insufficient-overlap";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::InsufficientVariance: return "insufficient-variance";
        case ErrorKind::SolverDivergence: return "solver-divergence";
    }
    return "unknown";
}

char phase_letter(Phase p) noexcept {
    switch (p) {
        case Phase::A: return 'A';
        case Phase::B: return 'B';
        case Phase::C: return 'C';
        case Phase::Unknown: break;
    }
    return '?';
}

std::optional<Phase> phase_from_letter(std::string_view s) noexcept {
    if (s == "A") return Phase::A;
    if (s == "B") return Phase::B;
    if (s == "C") return Phase::C;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// ChannelSeries

ChannelSeries::ChannelSeries(Phase phase, double nominal_rate, std::vector<PhasorSample> samples)
    : phase_(phase), nominal_rate_(nominal_rate), samples_(std::move(samples)) {
    if (!(nominal_rate_ > 0.0) || !std::isfinite(nominal_rate_)) {
        throw Error(ErrorKind::InvalidInput, "ChannelSeries: nominal rate must be positive");
    }
    const double period = period_us();
    const double tolerance = period / 4.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (!(s.magnitude > 0.0) || !std::isfinite(s.magnitude)) {
            throw Error(ErrorKind::Validation, "ChannelSeries: magnitude must be positive and finite");
        }
        if (!(s.angle >= -180.0 && s.angle < 180.0)) {
            throw Error(ErrorKind::Validation, "ChannelSeries: angle outside [-180, 180)");
        }
        if (i == 0) continue;
        const auto dt = s.t - samples_[i - 1].t;
        if (dt <= 0) {
            throw Error(ErrorKind::Validation, "ChannelSeries: timestamps must be strictly increasing");
        }
        const double steps = std::round(static_cast<double>(dt) / period);
        if (steps < 1.0 || std::fabs(static_cast<double>(dt) - steps * period) > tolerance) {
            throw Error(ErrorKind::Validation, "ChannelSeries: sample spacing off the nominal rate grid");
        }
    }
}

ChannelSeries ChannelSeries::prefix(std::size_t n) const {
    if (n > samples_.size()) throw Error(ErrorKind::InvalidInput, "ChannelSeries::prefix: n exceeds length");
    return ChannelSeries(phase_, nominal_rate_, {samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(n)});
}

std::int64_t default_tolerance_us(double nominal_rate) {
    if (!(nominal_rate > 0.0)) throw Error(ErrorKind::InvalidInput, "nominal rate must be positive");
    return static_cast<std::int64_t>(std::floor(1e6 / nominal_rate / 4.0));
}

// ---------------------------------------------------------------------------
// BusRecord

BusRecord::BusRecord(std::string bus_id, double nominal_voltage, std::vector<ChannelSeries> channels)
    : bus_id_(std::move(bus_id)), nominal_voltage_(nominal_voltage), channels_(std::move(channels)) {
    if (!(nominal_voltage_ > 0.0) || !std::isfinite(nominal_voltage_)) {
        throw Error(ErrorKind::InvalidInput, "BusRecord '" + bus_id_ + "': nominal voltage must be positive");
    }
    if (channels_.empty() || channels_.size() > 3) {
        throw Error(ErrorKind::InvalidInput, "BusRecord '" + bus_id_ + "': needs 1 to 3 channels");
    }
}

bool BusRecord::is_aligned() const noexcept {
    const auto first = channels_.front().samples();
    for (std::size_t c = 1; c < channels_.size(); ++c) {
        const auto other = channels_[c].samples();
        if (other.size() != first.size()) return false;
        for (std::size_t i = 0; i < first.size(); ++i) {
            if (other[i].t != first[i].t) return false;
        }
    }
    return true;
}

std::size_t BusRecord::sample_count() const noexcept { return channels_.front().size(); }

BusRecord BusRecord::prefix(std::size_t n) const {
    std::vector<ChannelSeries> out;
    out.reserve(channels_.size());
    for (const auto& ch : channels_) out.push_back(ch.prefix(n));
    return BusRecord(bus_id_, nominal_voltage_, std::move(out));
}

BusRecord BusRecord::with_nominal_voltage(double volts) const { return BusRecord(bus_id_, volts, channels_); }

ChannelSeries per_unit(const ChannelSeries& series, double base) {
    if (!(base > 0.0) || !std::isfinite(base)) throw Error(ErrorKind::InvalidInput, "per_unit: base must be positive");
    std::vector<PhasorSample> out(series.samples().begin(), series.samples().end());
    for (auto& s : out) s.magnitude /= base;
    return ChannelSeries(series.phase(), series.nominal_rate(), std::move(out));
}

BusRecord per_unit(const BusRecord& record) {
    std::vector<ChannelSeries> out;
    out.reserve(record.channel_count());
    for (const auto& ch : record.channels()) out.push_back(per_unit(ch, record.nominal_voltage()));
    return BusRecord(record.bus_id(), 1.0, std::move(out));
}

// ---------------------------------------------------------------------------
// PhaseAssignment

PhaseAssignment::PhaseAssignment(std::span<const std::uint8_t> mapping) : arity_(mapping.size()) {
    if (arity_ == 0 || arity_ > 3) throw Error(ErrorKind::InvalidInput, "PhaseAssignment: arity must be 1..3");
    for (std::size_t i = 0; i < arity_; ++i) {
        if (mapping[i] > 2) throw Error(ErrorKind::InvalidInput, "PhaseAssignment: reference index out of range");
        for (std::size_t j = 0; j < i; ++j) {
            if (mapping[j] == mapping[i]) throw Error(ErrorKind::InvalidInput, "PhaseAssignment: mapping not injective");
        }
        mapping_[i] = mapping[i];
    }
}

PhaseAssignment::PhaseAssignment(std::initializer_list<std::uint8_t> mapping)
    : PhaseAssignment(std::span<const std::uint8_t>(mapping.begin(), mapping.size())) {}

PhaseAssignment PhaseAssignment::permuted(std::span<const std::uint8_t> perm) const {
    if (perm.size() != arity_) throw Error(ErrorKind::InvalidInput, "PhaseAssignment::permuted: size mismatch");
    std::array<std::uint8_t, 3> out{};
    for (std::size_t c = 0; c < arity_; ++c) out[c] = mapping_.at(perm[c]);
    return PhaseAssignment(std::span<const std::uint8_t>(out.data(), arity_));
}

std::string PhaseAssignment::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < arity_; ++i) s.push_back(static_cast<char>('A' + mapping_[i]));
    return s;
}

std::strong_ordering operator<=>(const PhaseAssignment& a, const PhaseAssignment& b) noexcept {
    const std::size_t n = std::min(a.arity_, b.arity_);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = a.mapping_[i] <=> b.mapping_[i]; c != 0) return c;
    }
    return a.arity_ <=> b.arity_;
}

// ---------------------------------------------------------------------------
// ScoringConfig

std::string_view to_string(MagnitudeMode m) noexcept {
    return m == MagnitudeMode::Pearson ? "pearson" : "inner-product";
}
std::string_view to_string(AngleMode m) noexcept { return m == AngleMode::Raw ? "raw" : "shift-removed"; }
std::string_view to_string(SignConvention s) noexcept {
    return s == SignConvention::PenalizeAngle ? "penalize-angle" : "reward-angle";
}

std::optional<MagnitudeMode> parse_magnitude_mode(std::string_view s) noexcept {
    if (s == "pearson") return MagnitudeMode::Pearson;
    if (s == "inner-product" || s == "inner") return MagnitudeMode::InnerProduct;
    return std::nullopt;
}
std::optional<AngleMode> parse_angle_mode(std::string_view s) noexcept {
    if (s == "raw") return AngleMode::Raw;
    if (s == "shift-removed") return AngleMode::ShiftRemoved;
    return std::nullopt;
}
std::optional<SignConvention> parse_sign_convention(std::string_view s) noexcept {
    if (s == "penalize-angle" || s == "penalize") return SignConvention::PenalizeAngle;
    if (s == "reward-angle" || s == "reward") return SignConvention::RewardAngle;
    return std::nullopt;
}

void ScoringConfig::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha < 0.0 || beta < 0.0) {
        throw Error(ErrorKind::InvalidInput, "ScoringConfig: alpha and beta must be finite and >= 0");
    }
    if (alpha == 0.0 && beta == 0.0) {
        throw Error(ErrorKind::InvalidInput, "ScoringConfig: alpha and beta cannot both be zero");
    }
}

}  // namespace phaseid
