#include "phaseid/angles.hpp"

#include "phaseid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace phaseid {

double wrap_degrees(double angle) noexcept {
    double w = std::fmod(angle + 180.0, 360.0);
    if (w < 0.0) w += 360.0;
    w -= 180.0;
    // fmod can land exactly on +180 after the shift for inputs like -540 - eps.
    if (w >= 180.0) w -= 360.0;
    return w;
}

double angular_distance(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw Error(ErrorKind::InvalidInput, "angular_distance: non-finite angle");
    }
    const double d = std::fmod(std::fabs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

double signed_difference(double from, double to) noexcept { return wrap_degrees(to - from); }

double circular_median(std::span<const double> angles) {
    const std::size_t n = angles.size();
    if (n == 0) throw Error(ErrorKind::InsufficientData, "circular_median: no samples");

    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = std::fmod(angles[i], 360.0);
        if (w < 0.0) w += 360.0;
        if (w >= 360.0) w -= 360.0;
        a[i] = w;
    }
    std::sort(a.begin(), a.end());

    // Unrolled copy b = a ++ (a + 360) with prefix sums, so every candidate's
    // forward half-circle is a contiguous run.
    std::vector<double> b(2 * n);
    std::vector<long double> prefix(2 * n + 1, 0.0L);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        b[i] = i < n ? a[i] : a[i - n] + 360.0;
        prefix[i + 1] = prefix[i] + b[i];
    }

    std::size_t best = 0;
    long double best_cost = 0.0L;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = a[i];
        k = std::max(k, i);
        while (k < i + n && b[k] - theta <= 180.0) ++k;
        const long double ahead = (prefix[k] - prefix[i]) - static_cast<long double>(k - i) * theta;
        const long double behind =
            static_cast<long double>(i + n - k) * (theta + 360.0) - (prefix[i + n] - prefix[k]);
        const long double cost = ahead + behind;
        if (i == 0 || cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }
    return wrap_degrees(a[best]);
}

double snap_to_multiple(double angle, double step) noexcept { return step * std::round(angle / step); }

}  // namespace phaseid
