#pragma once

// Test-only builders and brute-force oracles. Nothing here calls into the
// scoring or search code paths it is used to check.

#include <phaseid/synthfeeder.hpp>
#include <phaseid/types.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace phaseid::test {

inline double wrap180(double a) {
    double w = std::fmod(a + 180.0, 360.0);
    if (w < 0) w += 360.0;
    w -= 180.0;
    return w >= 180.0 ? w - 360.0 : w;
}

/// Arc distance through complex exponentials, independent of angular_distance.
inline double oracle_distance(double a, double b) {
    const double rad = (a - b) * std::numbers::pi / 180.0;
    return std::fabs(std::arg(std::polar(1.0, rad))) * 180.0 / std::numbers::pi;
}

struct ChannelData {
    Phase phase;
    std::vector<double> magnitude;
    std::vector<double> angle;
};

inline BusRecord make_record(std::string id, double nominal, const std::vector<ChannelData>& channels,
                             double rate = 1.0, Timestamp t0 = 0) {
    std::vector<ChannelSeries> out;
    const auto step = static_cast<Timestamp>(std::llround(1e6 / rate));
    for (const auto& ch : channels) {
        std::vector<PhasorSample> s(ch.magnitude.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = PhasorSample{t0 + static_cast<Timestamp>(i) * step, ch.magnitude[i], wrap180(ch.angle[i])};
        }
        out.emplace_back(ch.phase, rate, std::move(s));
    }
    return BusRecord(std::move(id), nominal, std::move(out));
}

/// Constant three-phase record.
inline BusRecord constant_record(std::string id, double nominal, double magnitude, std::size_t n,
                                 std::array<double, 3> angles = {0.0, -120.0, 120.0}) {
    std::vector<ChannelData> ch;
    for (std::size_t p = 0; p < 3; ++p) {
        ch.push_back({static_cast<Phase>(p), std::vector<double>(n, magnitude), std::vector<double>(n, angles[p])});
    }
    return make_record(std::move(id), nominal, ch);
}

/// The closed-form dataset evaluated by tests/support/frozen_values.py.
struct ClosedFormPair {
    BusRecord ref;
    BusRecord tgt;
};

inline ClosedFormPair closed_form_pair() {
    constexpr std::size_t n = 100;
    std::vector<ChannelData> r;
    std::vector<ChannelData> g;
    for (std::size_t p = 0; p < 3; ++p) {
        ChannelData rc{static_cast<Phase>(p), {}, {}};
        ChannelData tc{static_cast<Phase>(p), {}, {}};
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i);
            const double pp = static_cast<double>(p);
            rc.magnitude.push_back(2400.0 * (1 + 0.02 * std::sin(0.1 * t + pp)));
            const double ra = wrap180(-120.0 * pp + 0.5 * std::sin(0.05 * t));
            rc.angle.push_back(ra);
            tc.magnitude.push_back(2350.0 * (1 + 0.015 * std::sin(0.1 * t + pp) + 0.005 * std::cos(0.37 * t * (pp + 1))));
            tc.angle.push_back(wrap180(ra - 1.5 + 0.2 * std::cos(0.2 * t)));
        }
        r.push_back(std::move(rc));
        g.push_back(std::move(tc));
    }
    return {make_record("ref", 2400.0, r), make_record("tgt", 2350.0, g)};
}

/// Random aligned pair with `m` target channels. Magnitudes follow a
/// mean-reverting walk around nominal; angles sit near the nominal phase
/// spacing with random jitter.
inline ClosedFormPair random_pair(std::uint64_t seed, std::size_t n, std::size_t m = 3, double rate = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-180.0, 180.0);
    std::vector<ChannelData> r;
    std::vector<ChannelData> g;
    const double offset = uni(rng) * 0.02;
    for (std::size_t p = 0; p < 3; ++p) {
        ChannelData c{static_cast<Phase>(p), {}, {}};
        double level = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            level = 1.0 + 0.99 * (level - 1.0) + 0.003 * noise(rng);
            c.magnitude.push_back(240.0 * (level + 0.001 * noise(rng)));
            c.angle.push_back(-120.0 * static_cast<double>(p) + 2.0 * noise(rng));
        }
        r.push_back(std::move(c));
    }
    for (std::size_t k = 0; k < m; ++k) {
        ChannelData c{static_cast<Phase>(k), {}, {}};
        for (std::size_t i = 0; i < n; ++i) {
            c.magnitude.push_back(r[k].magnitude[i] * (0.98 + 0.004 * noise(rng)));
            c.angle.push_back(r[k].angle[i] + offset + 3.0 * noise(rng));
        }
        g.push_back(std::move(c));
    }
    return {make_record("ref", 240.0, r, rate), make_record("tgt", 235.0, g, rate)};
}

/// Direct evaluation of the objective for one assignment: per-unit magnitude
/// products (or textbook Pearson) and arc distances, summed with plain loops.
struct OracleScore {
    double f;
    double g;
    double j;
};

inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline OracleScore oracle_objective(const BusRecord& ref, const BusRecord& tgt, const std::vector<int>& map,
                                    const ScoringConfig& cfg) {
    const std::size_t n = ref.sample_count();
    const std::size_t m = map.size();
    double f = 0.0;
    double g = 0.0;
    if (cfg.magnitude_mode == MagnitudeMode::InnerProduct) {
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t c = 0; c < m; ++c) {
                const auto& rs = ref.channel(static_cast<std::size_t>(map[c])).samples()[t];
                const auto& ts = tgt.channel(c).samples()[t];
                f += (rs.magnitude / ref.nominal_voltage()) * (ts.magnitude / tgt.nominal_voltage());
            }
        }
        f /= static_cast<double>(n * m);
    } else {
        for (std::size_t c = 0; c < m; ++c) {
            std::vector<double> x, y;
            for (std::size_t t = 0; t < n; ++t) {
                x.push_back(ref.channel(static_cast<std::size_t>(map[c])).samples()[t].magnitude / ref.nominal_voltage());
                y.push_back(tgt.channel(c).samples()[t].magnitude / tgt.nominal_voltage());
            }
            f += oracle_pearson(x, y);
        }
        f /= static_cast<double>(m);
    }
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t c = 0; c < m; ++c) {
            g += oracle_distance(ref.channel(static_cast<std::size_t>(map[c])).samples()[t].angle,
                                 tgt.channel(c).samples()[t].angle);
        }
    }
    g /= static_cast<double>(n * m);
    const double j = cfg.sign_convention == SignConvention::PenalizeAngle ? cfg.alpha * f - cfg.beta * g
                                                                          : cfg.alpha * f + cfg.beta * g;
    return {f, g, j};
}

/// Every injective map of m targets into {0,1,2}, via std::next_permutation.
inline std::vector<std::vector<int>> oracle_injections(std::size_t m) {
    std::vector<std::vector<int>> out;
    std::vector<int> all = {0, 1, 2};
    std::vector<std::vector<int>> seen;
    do {
        std::vector<int> head(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
        if (std::find(seen.begin(), seen.end(), head) == seen.end()) {
            seen.push_back(head);
            out.push_back(head);
        }
    } while (std::next_permutation(all.begin(), all.end()));
    return out;
}

/// O(n^2) circular median: cost evaluated at every sample.
inline double oracle_circular_median_cost(const std::vector<double>& angles, double at) {
    double c = 0.0;
    for (double a : angles) c += oracle_distance(a, at);
    return c;
}

inline double oracle_min_median_cost(const std::vector<double>& angles) {
    double best = 1e300;
    for (double a : angles) best = std::min(best, oracle_circular_median_cost(angles, a));
    return best;
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::fabs(a - b) <= std::max(rel * std::max(std::fabs(a), std::fabs(b)), abs_floor);
}

/// Diagonal per-phase impedance (ohms).
inline Matrix3c diagonal_impedance(Complex z) {
    Matrix3c m{};
    for (std::size_t p = 0; p < 3; ++p) m[p][p] = z;
    return m;
}

/// Source plus one downstream bus over a single line.
inline FeederScenario two_bus_scenario(const Matrix3c& z, std::vector<LoadSpec> loads) {
    FeederScenario s;
    s.name = "two-bus-test";
    s.buses = {"src", "load"};
    s.source_bus = "src";
    s.base_kv_ll = 4.16;
    s.lines = {LineSpec{"src", "load", {true, true, true}, z, 0}};
    s.loads = std::move(loads);
    s.snapshots = 10;
    return s;
}

}  // namespace phaseid::test
