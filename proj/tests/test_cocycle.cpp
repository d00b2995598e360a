#include "amlab/arithmetic/predicates.hpp"
#include "amlab/cocycle/cocycle.hpp"
#include "amlab/denjoy/denjoy.hpp"
#include "amlab/errors.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace amlab;

namespace {

const ContinuedFraction& golden() {
    static const ContinuedFraction cf = ContinuedFraction::golden(80);
    return cf;
}

JumpSequence dipole() { return JumpSequence::finite({{0, 1.0}, {1, -1.0}}, 0.0); }

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

TEST_CASE("sigma examples") {
    const SigmaSequence s = sigma_from_jumps(dipole());
    CHECK(s.at(-1) == 0.0);
    CHECK(s.at(0) == 1.0);
    CHECK(s.at(1) == 0.0);
    CHECK(s.l1 == 1.0);

    const SigmaSequence z = sigma_from_jumps(JumpSequence::finite({{0, 0.0}, {3, 0.0}}, 1.0));
    for (double v : z.sigma) CHECK(v == 0.0);

    CHECK_THROWS_AS(JumpSequence::finite({{0, 1.0}, {2, -0.5}}, 0.0), LabError);
    try {
        (void)JumpSequence::finite({{0, 1.0}}, 0.0);
    } catch (const LabError& e) {
        CHECK(e.code() == ErrorCode::kUnbalancedJumps);
    }
}

TEST_CASE("alternating geometric sigma matches the closed-form tail") {
    const double C = 0.3, D = 0.6;
    const int K = 40;
    const JumpSequence J = JumpSequence::geometric(C, D, K, 2.0, true);
    const SigmaSequence s = sigma_from_jumps(J);
    for (int k = -K; k < 0; ++k) {
        const int n = -k;
        const double closed = C * (std::pow(-D, n) - std::pow(-D, K + 1)) / (1.0 + D);
        CHECK(s.at(k) == doctest::Approx(closed).epsilon(1e-13));
    }
    for (int k = 1; k <= K; ++k) {
        // sigma_k = -sum_{j>k} Delta_j
        const double closed = -C * (std::pow(-D, k + 1) - std::pow(-D, K + 1)) / (1.0 + D);
        CHECK(s.at(k) == doctest::Approx(closed).epsilon(1e-12));
    }
    CHECK(s.formula_mismatch < 1e-12);
}

TEST_CASE("e_k examples") {
    CHECK(e_k_eval(0, 0.5, 0.3) == doctest::Approx(-0.3).epsilon(1e-15));
    // Zero mean: midpoint rule is exact up to the two jump cells.
    const int n = 200'000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += e_k_eval(3, (i + 0.5) / n, golden().alpha_double());
    CHECK(std::abs(s / n) < 1e-5);
}

TEST_CASE("property: telescoping bound on S_m e_k") {
    const Rotation rot(golden());
    for (std::int64_t k : {-7, 0, 1, 12}) {
        double worst = 0.0;
        for (int g = 0; g < 1000; g += 7) {
            const double x = g / 1000.0;
            double s = 0.0;
            auto c = rot.cursor(x);
            for (int m = 1; m <= 10'000; ++m) {
                s += e_k_eval(k, c.value(), rot);
                c.advance();
                worst = std::max(worst, std::abs(s));
            }
        }
        CHECK(worst <= 1.0 + 1e-12);
    }
}

TEST_CASE("phi examples") {
    CHECK(phi_from_jumps(dipole(), 0.3, 0.5).value == doctest::Approx(-0.3).epsilon(1e-15));
    const JumpSequence flat = JumpSequence::finite({{0, 0.0}}, 1.75);
    CHECK(phi_from_jumps(flat, golden(), Angle::exact(2, 7)).value == 1.75);

    const JumpSequence J = JumpSequence::geometric(0.2, 0.5, 30, 1.0);
    const double a = golden().alpha_double();
    for (int k : {0, 1, -1, 5, -5}) {
        const double at = frac(k * a);
        const double jump = phi_from_jumps(J, a, at + 1e-13).value - phi_from_jumps(J, a, at - 1e-13).value;
        CHECK(jump == doctest::Approx(J.delta(k)).epsilon(1e-10));
    }
}

TEST_CASE("property: literal series and fast form agree") {
    const JumpSequence J = JumpSequence::geometric(0.1, 0.5, 40, 1.0, true);
    const SigmaSequence s = sigma_from_jumps(J);
    const CocycleEvaluator ev(J, golden());
    const double a = golden().alpha_double();
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        const double x = unit(rng);
        double literal = J.mean();
        for (std::int64_t k = s.k_min; k <= s.k_max(); ++k) literal += s.at(k) * e_k_eval(k, x, a);
        CHECK(ev.phi(x) == doctest::Approx(literal).epsilon(1e-12));
        CHECK(phi_from_jumps(J, golden(), Angle::from_double(x)).value == doctest::Approx(literal).epsilon(1e-12));
    }
}

TEST_CASE("property: sum |sigma| bounded by weighted jump mass") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<std::int64_t, double>> sup;
        double total = 0.0;
        for (int k = -6; k <= 6; ++k) {
            const double d = unit(rng) - 0.5;
            sup.emplace_back(k, d);
            total += d;
        }
        sup.emplace_back(7, -total);
        const JumpSequence J = JumpSequence::finite(sup, 1.0, 1e-9);
        const SigmaSequence s = sigma_from_jumps(J);
        for (std::int64_t k = s.k_min + 1; k <= s.k_max(); ++k) {
            CHECK(s.at(k) - s.at(k - 1) == doctest::Approx(J.delta(k)).epsilon(1e-14));
        }
        CHECK(s.l1 <= J.sigma_bound() + 1e-12);
    }
}

TEST_CASE("birkhoff sums") {
    const auto one = [](double) { return 1.0; };
    CHECK(birkhoff_sum(one, golden(), Angle::exact(1, 3), 777) == 777.0);
    const auto e0 = [](double x) { return e_k_eval(0, x, 0.6180339887498949); };
    CHECK(birkhoff_sum(e0, golden(), Angle::exact(1, 3), 1) == e0(1.0 / 3.0));

    // Indicator discrepancy at m = q_n against a 100-digit direct summation.
    const auto chi = [](double x) { return x < 0.5 ? 0.5 : -0.5; };
    const HighFloat a = (sqrt(HighFloat(5)) - 1) / 2;
    for (int n : {5, 10, 15, 20}) {
        const auto m = static_cast<std::int64_t>(golden().q(n));
        const double x0 = 0.1234;
        double oracle = 0.0;
        for (std::int64_t i = 0; i < m; ++i) oracle += frac(HighFloat(x0) + HighFloat(i) * a) < 0.5 ? 0.5 : -0.5;
        const double got = birkhoff_sum(chi, golden(), Angle::from_double(x0), m);
        CHECK(got == oracle);
        CHECK(std::abs(got) <= 2.0);
    }
}

TEST_CASE("spread examples") {
    const SpreadReport d = birkhoff_spread(JumpSequence::finite({{0, 1.0}, {1, -1.0}}, 2.0), golden(), 2000, 50);
    CHECK(d.bound == 3.0);
    CHECK(d.sigma_l1 == 1.0);
    CHECK(d.spread <= 2.0);
    CHECK(d.within_bound);

    const SpreadReport z = birkhoff_spread(JumpSequence::finite({{0, 0.0}}, 1.0), golden(), 1000, 10);
    CHECK(z.spread == 0.0);

    // Regression value for C = 1, Delta = 1/2.
    const SpreadReport g = birkhoff_spread(JumpSequence::geometric(1.0, 0.5, 60, 1.0), golden(), 10'000, 100);
    CHECK(g.spread <= 2.0 * g.sigma_l1);
    CHECK(g.spread == doctest::Approx(1.3566113605255).epsilon(1e-9));
    const std::string csv = g.to_csv();
    CHECK(csv.rfind("m,spread_m,bound\n", 0) == 0);
}

TEST_CASE("transfer function examples") {
    CHECK(transfer_function(dipole(), 0.3, 0.5) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(transfer_function(dipole(), 0.3, 0.8) == doctest::Approx(0.0).epsilon(1e-15));
    const JumpSequence flat = JumpSequence::finite({{0, 0.0}}, 1.0);
    CHECK(transfer_function(flat, golden(), Angle::exact(1, 5)) == 0.0);
}

TEST_CASE("property: coboundary identity below the tail bound") {
    const JumpSequence J = JumpSequence::geometric(1.0, 0.5, 60, 1.0);
    const CoboundaryCheck c = coboundary_residual(J, golden(), 10'000, 42);
    CHECK(c.samples == 10'000);
    CHECK(c.max_residual < 1e-9);
    CHECK(c.max_residual <= J.tail_bound() + 1e-13);
}

TEST_CASE("transfer phase integral against brute-force quadrature") {
    const JumpSequence J = JumpSequence::geometric(0.1, 0.5, 60, 1.0);
    const CocycleEvaluator ev(J, golden());
    for (double lambda : {2.0 * std::numbers::pi, 5.0, 20.0}) {
        const int n = 400'000;
        std::complex<double> s{0, 0};
        for (int i = 0; i < n; ++i) s += std::exp(std::complex<double>(0, -lambda * ev.xi((i + 0.5) / n)));
        s /= static_cast<double>(n);
        CHECK(std::abs(transfer_phase_integral(ev, lambda) - s) < 1e-5);
    }
}

TEST_CASE("jumps from a one-hole ceiling") {
    const DenjoyModel m(golden(), {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 40)}, 0.0);
    const auto constant = gap_jumps(m, [](double) { return 2.0; });
    for (const auto& [k, d] : constant) CHECK(d == 0.0);

    for (const auto& [k, d] : gap_jumps(m, [](double x) { return x; })) {
        CHECK(d == doctest::Approx(m.gap_length({0, k})).epsilon(1e-12));
    }

    const auto psi = [](double x) { return 1.0 + 0.1 * std::cos(2.0 * std::numbers::pi * x); };
    const JumpSequence J = jumps_from_ceiling(m, psi);
    for (std::int64_t k = J.k_min(); k <= J.k_max(); ++k) {
        CHECK(std::abs(J.delta(k)) <= 0.2 * std::numbers::pi * m.gap_length({0, k}) + 1e-15);
    }
    CHECK(std::abs(J.balance()) < 1e-9);
    CHECK(J.mean() == doctest::Approx(m.integrate(psi)));

    const DenjoyModel two(golden(),
                          {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 20),
                           HoleSpec::geometric(Angle::exact(1, 2), 1.0, 0.5, 20)},
                          0.0);
    const DenjoyModel fat(golden(), {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 20)}, 0.2);
    try {
        (void)jumps_from_ceiling(two, psi);
        FAIL("expected not-one-hole");
    } catch (const LabError& e) {
        CHECK(e.code() == ErrorCode::kNotOneHole);
    }
    try {
        (void)jumps_from_ceiling(fat, psi);
        FAIL("expected not-full-gap-measure");
    } catch (const LabError& e) {
        CHECK(e.code() == ErrorCode::kNotFullGapMeasure);
    }
}

TEST_CASE("property: Denjoy-side spread matches the rotation-side spread") {
    const DenjoyModel m(golden(), {HoleSpec::geometric(Angle::exact(0, 1), 1.0, 0.5, 40)}, 0.0);
    const auto psi = [](double x) { return 1.0 + 0.1 * std::cos(2.0 * std::numbers::pi * x); };
    const JumpSequence J = jumps_from_ceiling(m, psi);
    const double side_f = denjoy_birkhoff_spread(m, psi, 1000, 40);
    const SpreadReport side_r = birkhoff_spread(J, golden(), 1000, 40);
    CHECK(side_f == doctest::Approx(side_r.spread).epsilon(1e-6));
}

TEST_CASE("positivity certificate") {
    CHECK_NOTHROW(certify_positive_ceiling(JumpSequence::geometric(0.1, 0.5, 60, 1.0)));
    CHECK_THROWS_AS(certify_positive_ceiling(JumpSequence::geometric(1.0, 0.5, 60, 1.0)), LabError);
}

TEST_CASE("jump sequence json round trip") {
    const JumpSequence J = JumpSequence::geometric(0.1, 0.5, 20, 1.0, true);
    const JumpSequence back = JumpSequence::from_json(J.to_json());
    CHECK(back.k_min() == J.k_min());
    CHECK(back.k_max() == J.k_max());
    for (std::int64_t k = J.k_min(); k <= J.k_max(); ++k) CHECK(back.delta(k) == J.delta(k));
    CHECK(back.mean() == J.mean());
}
