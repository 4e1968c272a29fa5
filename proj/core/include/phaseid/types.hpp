#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phaseid {

/// Microseconds since the Unix epoch.
using Timestamp = std::int64_t;

enum class Phase : std::uint8_t { A = 0, B = 1, C = 2, Unknown = 3 };

char phase_letter(Phase p) noexcept;
std::optional<Phase> phase_from_letter(std::string_view s) noexcept;

/// One voltage phasor: magnitude in volts (or per-unit after normalisation),
/// angle in degrees on [-180, 180).
struct PhasorSample {
    Timestamp t = 0;
    double magnitude = 0.0;
    double angle = 0.0;

    friend bool operator==(const PhasorSample&, const PhasorSample&) = default;
};

/// Time-ordered phasor stream for one conductor.
///
/// Construction validates every sample (positive magnitude, wrapped angle),
/// strictly increasing timestamps, and that consecutive timestamps sit on the
/// nominal sampling grid to within a quarter period. Gaps of whole periods
/// are allowed.
class ChannelSeries {
public:
    ChannelSeries(Phase phase, double nominal_rate, std::vector<PhasorSample> samples);

    Phase phase() const noexcept { return phase_; }
    double nominal_rate() const noexcept { return nominal_rate_; }
    /// Nominal sample period in microseconds.
    double period_us() const noexcept { return 1e6 / nominal_rate_; }
    std::span<const PhasorSample> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    /// First `n` samples.
    ChannelSeries prefix(std::size_t n) const;

    friend bool operator==(const ChannelSeries&, const ChannelSeries&) = default;

private:
    Phase phase_;
    double nominal_rate_;
    std::vector<PhasorSample> samples_;
};

/// Default alignment tolerance: a quarter of the nominal sample period.
std::int64_t default_tolerance_us(double nominal_rate);

/// One measurement point with 1-3 conductors.
class BusRecord {
public:
    BusRecord(std::string bus_id, double nominal_voltage, std::vector<ChannelSeries> channels);

    const std::string& bus_id() const noexcept { return bus_id_; }
    double nominal_voltage() const noexcept { return nominal_voltage_; }
    std::span<const ChannelSeries> channels() const noexcept { return channels_; }
    std::size_t channel_count() const noexcept { return channels_.size(); }
    const ChannelSeries& channel(std::size_t i) const { return channels_.at(i); }

    /// True when every channel carries the same timestamp vector.
    bool is_aligned() const noexcept;
    /// Shared sample count n; only meaningful when aligned.
    std::size_t sample_count() const noexcept;

    BusRecord prefix(std::size_t n) const;
    BusRecord with_nominal_voltage(double volts) const;

    friend bool operator==(const BusRecord&, const BusRecord&) = default;

private:
    std::string bus_id_;
    double nominal_voltage_;
    std::vector<ChannelSeries> channels_;
};

/// Divides every magnitude by `base`. Throws InvalidInput when base <= 0.
ChannelSeries per_unit(const ChannelSeries& series, double base);

/// Per-unitises every channel on the record's nominal voltage; the result
/// has nominal voltage 1.
BusRecord per_unit(const BusRecord& record);

/// Injective map from target channel index (0-based, position in the target
/// record) to reference channel index. For three target channels this is the
/// (i, j, k) permutation; letters render as reference phase labels.
class PhaseAssignment {
public:
    PhaseAssignment() = default;
    explicit PhaseAssignment(std::span<const std::uint8_t> mapping);
    PhaseAssignment(std::initializer_list<std::uint8_t> mapping);

    std::size_t arity() const noexcept { return arity_; }
    std::uint8_t operator[](std::size_t target) const { return mapping_.at(target); }
    std::span<const std::uint8_t> mapping() const noexcept { return {mapping_.data(), arity_}; }

    /// Composition with a target reordering: result[c] = (*this)[perm[c]].
    PhaseAssignment permuted(std::span<const std::uint8_t> perm) const;

    /// Reference labels in target-channel order, e.g. "ACB".
    std::string to_string() const;

    friend bool operator==(const PhaseAssignment& a, const PhaseAssignment& b) noexcept {
        return a.arity_ == b.arity_ && a.mapping_ == b.mapping_;
    }
    /// Lexicographic on the mapping tuple.
    friend std::strong_ordering operator<=>(const PhaseAssignment& a, const PhaseAssignment& b) noexcept;

private:
    std::array<std::uint8_t, 3> mapping_{};
    std::size_t arity_ = 0;
};

enum class MagnitudeMode { InnerProduct, Pearson };
enum class AngleMode { Raw, ShiftRemoved };
enum class SignConvention { PenalizeAngle, RewardAngle };

std::string_view to_string(MagnitudeMode m) noexcept;
std::string_view to_string(AngleMode m) noexcept;
std::string_view to_string(SignConvention s) noexcept;
std::optional<MagnitudeMode> parse_magnitude_mode(std::string_view s) noexcept;
std::optional<AngleMode> parse_angle_mode(std::string_view s) noexcept;
std::optional<SignConvention> parse_sign_convention(std::string_view s) noexcept;

struct ScoringConfig {
    double alpha = 1.0;
    double beta = 1.0;
    MagnitudeMode magnitude_mode = MagnitudeMode::Pearson;
    AngleMode angle_mode = AngleMode::Raw;
    SignConvention sign_convention = SignConvention::PenalizeAngle;

    /// Throws InvalidInput unless alpha, beta >= 0, finite, and not both 0.
    void validate() const;

    friend bool operator==(const ScoringConfig&, const ScoringConfig&) = default;
};

struct ScoredAssignment {
    PhaseAssignment assignment;
    double f_score = 0.0;
    double g_score = 0.0;  ///< degrees
    double objective = 0.0;
    std::size_t rank = 0;  ///< 1-based
};

}  // namespace phaseid
