#include "amlab/arithmetic/predicates.hpp"
#include "amlab/denjoy/denjoy.hpp"
#include "amlab/errors.hpp"

#include <doctest.h>

#include <random>

using namespace amlab;

namespace {

const ContinuedFraction& golden() {
    static const ContinuedFraction cf = ContinuedFraction::golden(80);
    return cf;
}

DenjoyModel classical() {
    return DenjoyModel(golden(), {HoleSpec::geometric(Angle::exact(0, 1), 1.0 / 3.0, 0.5, 200)}, 0.0);
}

DenjoyModel two_hole(double cantor_mass) {
    return DenjoyModel(golden(),
                       {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 200),
                        HoleSpec::geometric(Angle::exact(1, 2), 1.0, 0.5, 200)},
                       cantor_mass);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const LabError& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::kInvalidInput;
}

} // namespace

TEST_CASE("classical one-hole model: full gap mass, disjoint gaps") {
    const DenjoyModel m = classical();
    double total = 0.0;
    std::vector<std::pair<double, double>> iv;
    for (std::int64_t k = -200; k <= 200; ++k) {
        const GapId id{0, k};
        total += m.gap_length(id);
        iv.emplace_back(m.gap_left(id), m.gap_right(id));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    std::sort(iv.begin(), iv.end());
    for (std::size_t i = 1; i < iv.size(); ++i) CHECK(iv[i].first >= iv[i - 1].second - 1e-15);
    CHECK(m.staircase(std::nextafter(1.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero holes degenerate to the rotation") {
    const DenjoyModel m(golden(), {}, 1.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const double x = unit(rng);
        const CantorPoint p = m.locate(x);
        CHECK(m.semiconj_h(p) == doctest::Approx(x).epsilon(1e-15));
        CHECK(m.semiconj_h_inv(x).x == doctest::Approx(x).epsilon(1e-15));
        CHECK(circle_norm(m.map(p).x - x - golden().alpha_double()) < 1e-15);
    }
}

TEST_CASE("construction errors") {
    CHECK(code_of([] {
              DenjoyModel(golden(),
                          {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 10),
                           HoleSpec::geometric(golden().alpha() + golden().alpha(), 1.0, 0.5, 10)},
                          0.0);
          }) == ErrorCode::kInvalidHoles);
    CHECK(code_of([] { DenjoyModel(golden(), {}, 0.5); }) == ErrorCode::kInvalidMass);
    CHECK(code_of([] {
              DenjoyModel(golden(), {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 10)}, 1.5);
          }) == ErrorCode::kInvalidMass);
}

TEST_CASE("h and its right inverse at hole points") {
    const DenjoyModel m = two_hole(0.5);
    for (int j = 0; j < 2; ++j) {
        const double beta = m.holes()[static_cast<std::size_t>(j)].beta.value();
        const CantorPoint p = m.semiconj_h_inv(beta);
        CHECK(p.x == doctest::Approx(m.gap_right({j, 0})).epsilon(1e-15));
        CHECK(m.semiconj_h(m.locate(m.gap_right({j, 0}))) == doctest::Approx(beta).epsilon(1e-15));
    }
}

TEST_CASE("h inverts the staircase on generic Cantor points") {
    const DenjoyModel m = two_hole(0.5);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double x = unit(rng);
        const CantorPoint p = m.locate(x);
        const double th = m.semiconj_h(p);
        CHECK(m.staircase_left(th) <= x + 1e-15);
        CHECK(x <= m.staircase(th) + 1e-15);
    }
}

TEST_CASE("property: h(h^-1(theta)) = theta on 1e4 samples") {
    for (const DenjoyModel& m : {classical(), two_hole(0.5), two_hole(0.0)}) {
        std::mt19937_64 rng(3);
        double worst = 0.0;
        for (int i = 0; i < 10'000; ++i) {
            const double th = unit(rng);
            worst = std::max(worst, circle_norm(m.semiconj_h(m.semiconj_h_inv(th)) - th));
        }
        CHECK(worst == 0.0);
    }
}

TEST_CASE("property: conjugacy residual below 1e-12 on 1e4 points") {
    for (const DenjoyModel& m : {classical(), two_hole(0.5)}) {
        std::mt19937_64 rng(4);
        double worst = 0.0;
        for (int i = 0; i < 10'000; ++i) {
            const CantorPoint p = m.locate(unit(rng));
            worst = std::max(worst, circle_norm(m.semiconj_h(m.map(p)) - m.semiconj_h(p) - m.alpha()));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("gap endpoints map to gap endpoints") {
    const DenjoyModel m = two_hole(0.2);
    for (int j = 0; j < 2; ++j) {
        for (std::int64_t k = -20; k < 20; ++k) {
            const CantorPoint p = m.locate(m.gap_left({j, k}) + 0.5 * m.gap_length({j, k}));
            REQUIRE(p.gap.has_value());
            CHECK(p.gap->k == k);
            const CantorPoint img = m.map(p);
            REQUIRE(img.gap.has_value());
            CHECK(img.gap->k == k + 1);
            CHECK(img.x == doctest::Approx(m.gap_left({j, k + 1}) + 0.5 * m.gap_length({j, k + 1})));
            const CantorPoint right = m.semiconj_h_inv(m.gap_theta({j, k}));
            CHECK(m.map(right).x == doctest::Approx(m.gap_right({j, k + 1})).epsilon(1e-14));
        }
    }
}

TEST_CASE("property: gaps are wandering for 1e3 iterates") {
    const DenjoyModel m = two_hole(0.3);
    for (int j = 0; j < 2; ++j) {
        const double a = m.gap_left({j, 0}), b = m.gap_right({j, 0});
        CantorPoint p = m.locate(0.5 * (a + b));
        for (int n = 1; n <= 1000; ++n) {
            p = m.map(p);
            REQUIRE(p.gap.has_value());
            CHECK(p.gap->k == n);
            const double l = m.gap_left({j, n}), r = m.gap_right({j, n});
            CHECK((r <= a + 1e-15 || l >= b - 1e-15));
        }
    }
}

TEST_CASE("property: cyclic order is preserved") {
    const DenjoyModel m = two_hole(0.4);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 2000; ++i) {
        double v[3] = {unit(rng), unit(rng), unit(rng)};
        std::sort(v, v + 3);
        if (v[1] - v[0] < 1e-9 || v[2] - v[1] < 1e-9) continue;
        const double a = m.map(m.locate(v[0])).x, b = m.map(m.locate(v[1])).x, c = m.map(m.locate(v[2])).x;
        CHECK(frac(b - a) <= frac(c - a) + 1e-15);
    }
}

TEST_CASE("property: staircase nondecreasing with H(1-) = 1") {
    const DenjoyModel m = two_hole(0.1);
    double prev = m.staircase(0.0);
    for (int i = 1; i < 20'000; ++i) {
        const double h = m.staircase(i / 20'000.0);
        CHECK(h >= prev);
        prev = h;
    }
    CHECK(m.staircase(std::nextafter(1.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("invariant measure") {
    const DenjoyModel m = classical();
    CHECK(m.integrate([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-13));
    // Every gap is a mu-null set: the cdf is constant across it.
    const CantorPoint l = m.locate(m.gap_left({0, 3}) + 1e-12);
    const CantorPoint r = m.locate(m.gap_right({0, 3}) - 1e-12);
    CHECK(m.invariant_measure_cdf(l) == m.invariant_measure_cdf(r));

    // Riemann-Stieltjes oracle: int x dmu = int_0^1 H(theta) dtheta, midpoint rule at two resolutions.
    auto oracle = [&](int n) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += m.staircase((i + 0.5) / n);
        return s / n;
    };
    const double coarse = oracle(1'000'000), fine = oracle(2'000'000);
    CHECK(std::abs(coarse - fine) < 1e-6);
    CHECK(m.integrate([](double x) { return x; }) == doctest::Approx(fine).epsilon(1e-6));
}

TEST_CASE("gap decay fits") {
    std::vector<std::pair<std::int64_t, double>> geo, poly;
    for (std::int64_t k = -20; k <= 20; ++k) {
        geo.emplace_back(k, std::pow(2.0, -static_cast<double>(std::abs(k))));
        poly.emplace_back(k, 1.0 / (1.0 + static_cast<double>(k * k)));
    }
    const GapDecayFit g = gap_decay_fit(geo);
    CHECK(g.Delta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.r2 == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<std::pair<std::int64_t, double>> tail;
    for (std::int64_t k = 100; k <= 200; ++k) tail.emplace_back(k, 1.0 / (1.0 + static_cast<double>(k * k)));
    const GapDecayFit p = gap_decay_fit(tail);
    CHECK(p.Delta > 0.98);
    CHECK(gap_decay_fit(poly).r2 < 0.95);
    CHECK(code_of([] { gap_decay_fit(std::vector<std::pair<std::int64_t, double>>{{0, 1.0}}); }) ==
          ErrorCode::kInvalidInput);
    auto bad = geo;
    bad[3].second = -1.0;
    CHECK(code_of([&] { gap_decay_fit(bad); }) == ErrorCode::kInvalidInput);
    CHECK(gap_decay_fit(classical(), 0).Delta == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("hole separation does not depend on the base point") {
    const DenjoyModel a = two_hole(0.3);
    const DenjoyModel b(golden(),
                        {HoleSpec::geometric(Angle::exact(1, 10), 1.0, 0.5, 200),
                         HoleSpec::geometric(Angle::exact(3, 5), 1.0, 0.5, 200)},
                        0.3);
    for (std::int64_t k = -5; k <= 5; ++k) {
        CHECK(circle_norm(a.gap_theta({1, k}) - a.gap_theta({0, k}) - (b.gap_theta({1, k}) - b.gap_theta({0, k}))) <
              1e-15);
    }
}

TEST_CASE("staircase csv") {
    const std::string csv = classical().staircase_csv(5);
    CHECK(csv.rfind("theta,H\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
