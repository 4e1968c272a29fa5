#pragma once

#include <span>

namespace phaseid {

/// Wraps an angle in degrees onto [-180, 180).
double wrap_degrees(double angle) noexcept;

/// Shortest arc between two angles, in [0, 180]. Throws InvalidInput on
/// non-finite arguments.
double angular_distance(double a, double b);

/// Signed shortest rotation taking `from` onto `to`, in [-180, 180).
double signed_difference(double from, double to) noexcept;

/// Angle minimising the summed arc distance to `angles` (degrees).
///
/// The minimiser is always attained at one of the samples; among equal costs
/// the sample that comes first in [0, 360) order wins. Runs in O(n log n).
/// Throws InsufficientData on an empty input.
double circular_median(std::span<const double> angles);

/// Nearest multiple of `step` degrees (halves round away from zero).
double snap_to_multiple(double angle, double step) noexcept;

}  // namespace phaseid
