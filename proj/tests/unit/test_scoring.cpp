#include <doctest.h>
#include <fixtures.hpp>

#include <phaseid/errors.hpp>
#include <phaseid/scoring.hpp>

using namespace phaseid;

namespace {

struct Frozen {
    PhaseAssignment a;
    double f_inner;
    double f_pearson;
    double g_raw;
};

// Computed with numpy by tests/support/frozen_values.py on the closed-form pair.
const Frozen kFrozen[] = {
    {{0, 1, 2}, 1.0016342456082534, 0.94733744529977992, 1.4903090813699087},
    {{0, 2, 1}, 1.0015905545640718, 0.69593435123481073, 80.496769693789972},
    {{1, 0, 2}, 1.001588421507176, 0.65857524282275137, 80.496769693789972},
    {{1, 2, 0}, 1.0015220412348713, 0.25344960215881723, 118.5096909186301},
    {{2, 0, 1}, 1.0015220824793507, 0.25446645367671644, 121.4903090813699},
    {{2, 1, 0}, 1.0014993932512277, 0.10074390707775155, 80.496769693789972},
};

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidInput;
}

BusRecord with_angles(const BusRecord& r, auto&& fn) {
    std::vector<test::ChannelData> ch;
    for (const auto& c : r.channels()) {
        test::ChannelData d{c.phase(), {}, {}};
        for (const auto& s : c.samples()) {
            d.magnitude.push_back(s.magnitude);
            d.angle.push_back(fn(s.angle));
        }
        ch.push_back(std::move(d));
    }
    return test::make_record(r.bus_id(), r.nominal_voltage(), ch);
}

BusRecord with_magnitudes(const BusRecord& r, auto&& fn) {
    std::vector<test::ChannelData> ch;
    for (std::size_t k = 0; k < r.channel_count(); ++k) {
        const auto& c = r.channel(k);
        test::ChannelData d{c.phase(), {}, {}};
        for (const auto& s : c.samples()) {
            d.magnitude.push_back(fn(k, s.magnitude));
            d.angle.push_back(s.angle);
        }
        ch.push_back(std::move(d));
    }
    return test::make_record(r.bus_id(), r.nominal_voltage(), ch);
}

const PhaseAssignment kIdentity{0, 1, 2};

}  // namespace

TEST_CASE("f_inner on constant records") {
    const auto ref = test::constant_record("r", 240.0, 240.0, 10);
    CHECK(f_inner(ref, ref, kIdentity) == doctest::Approx(1.0));
    const auto tgt = test::constant_record("t", 240.0, 228.0, 10);
    CHECK(f_inner(ref, tgt, kIdentity) == doctest::Approx(0.95));
    CHECK(f_inner(ref, tgt, PhaseAssignment{2, 0, 1}) == doctest::Approx(0.95));
}

TEST_CASE("batch scores match frozen numpy values") {
    const auto pair = test::closed_form_pair();
    for (const auto& fz : kFrozen) {
        CAPTURE(fz.a.to_string());
        CHECK(f_inner(pair.ref, pair.tgt, fz.a) == doctest::Approx(fz.f_inner).epsilon(1e-12));
        CHECK(f_pearson(pair.ref, pair.tgt, fz.a) == doctest::Approx(fz.f_pearson).epsilon(1e-10));
        CHECK(g_angle(pair.ref, pair.tgt, fz.a, AngleMode::Raw) == doctest::Approx(fz.g_raw).epsilon(1e-10));
    }
}

TEST_CASE("batch scores match the naive evaluation on random records") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto pair = test::random_pair(seed, 100);
        for (const auto& map : test::oracle_injections(3)) {
            const PhaseAssignment a{static_cast<std::uint8_t>(map[0]), static_cast<std::uint8_t>(map[1]),
                                    static_cast<std::uint8_t>(map[2])};
            ScoringConfig inner;
            inner.magnitude_mode = MagnitudeMode::InnerProduct;
            const auto oi = test::oracle_objective(pair.ref, pair.tgt, map, inner);
            const auto op = test::oracle_objective(pair.ref, pair.tgt, map, ScoringConfig{});
            CHECK(test::rel_close(f_inner(pair.ref, pair.tgt, a), oi.f, 1e-12));
            CHECK(test::rel_close(f_pearson(pair.ref, pair.tgt, a), op.f, 1e-9));
            CHECK(test::rel_close(g_angle(pair.ref, pair.tgt, a, AngleMode::Raw), oi.g, 1e-12));
        }
    }
}

TEST_CASE("f_pearson self, mirrored and constant") {
    const auto pair = test::closed_form_pair();
    CHECK(f_pearson(pair.ref, pair.ref, kIdentity) == doctest::Approx(1.0).epsilon(1e-12));

    std::array<double, 3> mean{};
    for (std::size_t k = 0; k < 3; ++k) {
        for (const auto& s : pair.ref.channel(k).samples()) mean[k] += s.magnitude;
        mean[k] /= 100.0;
    }
    const auto mirrored = with_magnitudes(pair.ref, [&](std::size_t k, double m) { return 2.0 * mean[k] - m; });
    CHECK(f_pearson(pair.ref, mirrored, kIdentity) == doctest::Approx(-1.0).epsilon(1e-12));

    const auto flat = test::constant_record("t", 240.0, 240.0, 100);
    CHECK(kind_of([&] { f_pearson(pair.ref, flat, kIdentity); }) == ErrorKind::InsufficientVariance);
}

TEST_CASE("f_pearson is affine invariant per channel") {
    const auto pair = test::closed_form_pair();
    const std::array<double, 3> scale{0.5, 3.0, 1.7};
    const std::array<double, 3> shift{10.0, -200.0, 0.0};
    const auto moved =
        with_magnitudes(pair.tgt, [&](std::size_t k, double m) { return scale[k] * m + shift[k]; });
    for (const auto& fz : kFrozen) {
        CHECK(f_pearson(pair.ref, moved, fz.a) == doctest::Approx(f_pearson(pair.ref, pair.tgt, fz.a)).epsilon(1e-12));
    }
}

TEST_CASE("g_angle examples") {
    const auto pair = test::closed_form_pair();
    CHECK(g_angle(pair.ref, pair.ref, kIdentity, AngleMode::Raw) == 0.0);
    CHECK(g_angle(pair.ref, pair.ref, kIdentity, AngleMode::ShiftRemoved) == 0.0);

    const auto plus120 = with_angles(pair.ref, [](double a) { return a + 120.0; });
    CHECK(g_angle(pair.ref, plus120, kIdentity, AngleMode::Raw) == doctest::Approx(120.0).epsilon(1e-12));

    const auto minus30 = with_angles(pair.ref, [](double a) { return a - 30.0; });
    CHECK(g_angle(pair.ref, minus30, kIdentity, AngleMode::Raw) == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(g_angle(pair.ref, minus30, kIdentity, AngleMode::ShiftRemoved) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("ShiftRemoved changes by at most the snap residual under a constant offset") {
    const auto pair = test::closed_form_pair();
    const double base = g_angle(pair.ref, pair.tgt, kIdentity, AngleMode::ShiftRemoved);
    for (double c : {-170.0, -95.0, -60.0, -31.0, -7.5, 0.0, 4.0, 30.0, 44.0, 90.0, 150.0}) {
        const auto moved = with_angles(pair.tgt, [c](double a) { return a + c; });
        const double g = g_angle(pair.ref, moved, kIdentity, AngleMode::ShiftRemoved);
        const double residual = std::fabs(c - 30.0 * std::round(c / 30.0));
        CAPTURE(c);
        CHECK(std::fabs(g - base) <= residual + 1e-9);
        if (residual == 0.0) CHECK(g == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("objective sign conventions") {
    ScoringConfig cfg;
    CHECK(objective(1.0, 0.0, cfg) == 1.0);
    CHECK(objective(1.0, 120.0, cfg) == -119.0);
    cfg.sign_convention = SignConvention::RewardAngle;
    CHECK(objective(1.0, 120.0, cfg) == 121.0);
    cfg.alpha = 10000.0;
    cfg.sign_convention = SignConvention::PenalizeAngle;
    CHECK(objective(0.9, 2.0, cfg) == doctest::Approx(8998.0));
}

TEST_CASE("scorer input errors") {
    const auto pair = test::closed_form_pair();
    const auto shorter = pair.tgt.prefix(50);
    CHECK(kind_of([&] { f_inner(pair.ref, shorter, kIdentity); }) == ErrorKind::Alignment);
    CHECK(kind_of([&] { f_inner(pair.ref.prefix(0), pair.tgt.prefix(0), kIdentity); }) ==
          ErrorKind::InsufficientData);
    CHECK(kind_of([&] { f_inner(pair.ref, pair.tgt, PhaseAssignment{0, 1}); }) == ErrorKind::InvalidInput);
}

TEST_CASE("pairwise table agrees with the per-assignment scorers") {
    const auto pair = test::closed_form_pair();
    const PairwiseTerms terms(pair.ref, pair.tgt, MagnitudeMode::Pearson, AngleMode::Raw);
    for (const auto& fz : kFrozen) {
        CHECK(terms.f(fz.a) == doctest::Approx(fz.f_pearson).epsilon(1e-10));
        CHECK(terms.g(fz.a) == doctest::Approx(fz.g_raw).epsilon(1e-10));
    }
    const PairwiseTerms head(pair.ref, pair.tgt, MagnitudeMode::InnerProduct, AngleMode::Raw, 40);
    CHECK(head.sample_count() == 40);
    CHECK(head.f(kIdentity) == doctest::Approx(f_inner(pair.ref.prefix(40), pair.tgt.prefix(40), kIdentity)));
}

TEST_CASE("streaming statistics") {
    const auto pair = test::closed_form_pair();

    SUBCASE("folding one tuple at a time equals batch") {
        for (const auto& fz : kFrozen) {
            PairStatistics stats(fz.a, pair.ref.nominal_voltage(), pair.tgt.nominal_voltage());
            for (std::size_t i = 0; i < 100; ++i) {
                std::array<PhasorSample, 3> r{}, t{};
                for (std::size_t k = 0; k < 3; ++k) {
                    r[k] = pair.ref.channel(k).samples()[i];
                    t[k] = pair.tgt.channel(k).samples()[i];
                }
                stats = update_statistics(std::move(stats), r, t);
            }
            const auto s = stats.finalize();
            CHECK(test::rel_close(s.f_inner, fz.f_inner, 1e-9));
            CHECK(test::rel_close(s.f_pearson, fz.f_pearson, 1e-9));
            CHECK(test::rel_close(s.g_raw, fz.g_raw, 1e-9));
            CHECK(test::rel_close(s.g_shift_removed,
                                  g_angle(pair.ref, pair.tgt, fz.a, AngleMode::ShiftRemoved), 1e-9, 1e-12));
        }
    }

    SUBCASE("merged halves equal the full window") {
        const auto full = fold_statistics(pair.ref, pair.tgt, kIdentity, 0, 100);
        auto left = fold_statistics(pair.ref, pair.tgt, kIdentity, 0, 37);
        left.merge(fold_statistics(pair.ref, pair.tgt, kIdentity, 37, 100));
        CHECK(left.count() == full.count());
        const auto a = left.finalize();
        const auto b = full.finalize();
        CHECK(test::rel_close(a.f_inner, b.f_inner, 1e-14));
        CHECK(test::rel_close(a.f_pearson, b.f_pearson, 1e-12));
        CHECK(test::rel_close(a.g_raw, b.g_raw, 1e-14));
        CHECK(a.g_shift_removed == b.g_shift_removed);
        CHECK(left.offset_estimate(0) == full.offset_estimate(0));
    }

    SUBCASE("empty statistics") {
        const PairStatistics empty(kIdentity);
        CHECK(kind_of([&] { empty.finalize(); }) == ErrorKind::InsufficientData);
    }

    SUBCASE("untracked offsets cannot give the shift-removed score") {
        const auto lean = fold_statistics(pair.ref, pair.tgt, kIdentity, 0, 100, false);
        CHECK(lean.f_inner() == doctest::Approx(kFrozen[0].f_inner).epsilon(1e-12));
        CHECK(kind_of([&] { lean.g_shift_removed(); }) == ErrorKind::InvalidInput);
    }

    SUBCASE("merging a different assignment is rejected") {
        auto a = fold_statistics(pair.ref, pair.tgt, kIdentity, 0, 10);
        const auto b = fold_statistics(pair.ref, pair.tgt, PhaseAssignment{1, 0, 2}, 10, 20);
        CHECK_THROWS_AS(a.merge(b), Error);
    }
}
