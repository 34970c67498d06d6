#include <omp.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "minkshoot/error.hpp"
#include "minkshoot/rotation.hpp"

using namespace minkshoot;

namespace {

constexpr double kPi = std::numbers::pi;

BoundPair identity() {
    auto id = [](double s) { return s; };
    return BoundPair(id, id, id, id, 1.0);
}

BoundPair linear() {
    auto one = [](double s) { return s; };
    auto two = [](double s) { return 2.0 * s; };
    return BoundPair(one, two, two, one, 1.0);
}

BoundPair squeezing() {
    return BoundPair([](double s) { return 0.5 * s; }, [](double s) { return 2 * s + s * s * s; },
                     [](double s) { return 2 * s + 2 * s * s * s; }, [](double s) { return 0.25 * s + s * s * s; }, 1.0);
}

ode::Options tight() {
    ode::Options o;
    o.abs_tol = o.rel_tol = 1e-12;
    return o;
}

}  // namespace

TEST_CASE("bound pair primitives and extension") {
    const auto b = linear();
    b.validate();
    CHECK(b.primitive(BoundPair::A1, 0.6) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(b.primitive(BoundPair::B1, -0.5) == doctest::Approx(0.25).epsilon(1e-12));
    // Beyond delta the extension continues with the boundary slope.
    CHECK(b(BoundPair::B1, 3.0) == doctest::Approx(6.0));
    CHECK(b.primitive(BoundPair::B1, 3.0) == doctest::Approx(9.0).epsilon(1e-10));
    for (double level : {1e-8, 0.01, 0.3, 4.0}) {
        for (int sign : {1, -1}) {
            const double s = b.inverse_primitive(BoundPair::A2, level, sign);
            CHECK(s * sign > 0);
            CHECK(b.primitive(BoundPair::A2, s) == doctest::Approx(level).epsilon(1e-10));
        }
    }
    CHECK(b.hash() == linear().hash());
    CHECK(b.hash() != identity().hash());
}

TEST_CASE("bound pair validation rejects broken ordering") {
    auto one = [](double s) { return s; };
    auto two = [](double s) { return 2.0 * s; };
    auto neg = [](double s) { return -s; };
    for (auto b : {BoundPair(two, one, two, one, 1.0), BoundPair(one, two, one, two, 1.0),
                   BoundPair(neg, two, two, one, 1.0)}) {
        try {
            b.validate();
            FAIL("expected InvalidSpec");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidSpec);
        }
    }
}

TEST_CASE("identity bounds give circular spirals") {
    const auto b = identity();
    for (double th = 0.0; th < 2 * kPi; th += 0.1) {
        CHECK(spiral_rate(b, SpiralSide::Inner, std::cos(th), -std::sin(th)) == doctest::Approx(0.0));
        CHECK(angular_speed_floor(b, 0.3 * std::cos(th), -0.3 * std::sin(th)) == doctest::Approx(1.0));
    }
    const auto sp = build_spirals(b, 0.2, 0.4, 3 * kPi);
    for (double r : sp.inner.rho) CHECK(r == doctest::Approx(0.4).epsilon(1e-9));
    for (double r : sp.outer.rho) CHECK(r == doctest::Approx(0.4).epsilon(1e-9));
    const auto tr = trace_spirals(b, 0.2, 0.4, 3 * kPi);
    for (double th = 0.2; th < 0.2 + 3 * kPi; th += 0.1) {
        CHECK(tr.outer.at(th) == doctest::Approx(0.4).epsilon(1e-9));
        CHECK(tr.inner.at(th) == doctest::Approx(0.4).epsilon(1e-9));
    }
    // Per-arc radius bounds are conservative enclosures.
    CHECK(tr.outer.max_rho() >= 0.4);
    CHECK(tr.inner.min_rho() <= 0.4);
}

TEST_CASE("identity thresholds") {
    for (int j : {1, 3}) {
        const auto e = estimate_thresholds(identity(), j);
        CHECK(e.omega_min == doctest::Approx(1.0));
        CHECK(e.tau_star == doctest::Approx(1.1 * j * kPi));
        CHECK(e.rho_star > 0.0);
        CHECK(e.rho_star < 1.0);
    }
}

TEST_CASE("integrated spirals agree with exact level curves") {
    const auto b = linear();
    const double th0 = 0.3, rho0 = 0.1;
    const auto sp = build_spirals(b, th0, rho0, 3 * kPi);
    for (double th : {1.0, 2.0, 4.0, 7.0, 9.7}) {
        CHECK(sp.inner.at(th) == doctest::Approx(level_set_radius(b, SpiralSide::Inner, th0, rho0, th)).epsilon(1e-7));
        CHECK(sp.outer.at(th) == doctest::Approx(level_set_radius(b, SpiralSide::Outer, th0, rho0, th)).epsilon(1e-7));
    }
    // Gluing: the traced spiral is continuous across every axis.
    const auto tr = trace_spirals(b, th0, rho0, 3 * kPi);
    for (int k = 1; k < 6; ++k) {
        const double axis = k * kPi / 2;
        CHECK(tr.outer.at(axis - 1e-9) == doctest::Approx(tr.outer.at(axis + 1e-9)).epsilon(1e-6));
        CHECK(tr.inner.at(axis - 1e-9) == doctest::Approx(tr.inner.at(axis + 1e-9)).epsilon(1e-6));
    }
    for (double th = th0; th < th0 + 3 * kPi; th += 0.05) CHECK(tr.inner.at(th) <= tr.outer.at(th) * (1 + 1e-12));
}

TEST_CASE("energy monotonicity") {
    SUBCASE("harmonic oscillator") {
        const auto b = identity();
        const PlanarField f = [](double, double x, double y) { return std::array<double, 2>{y, -x}; };
        const auto path = integrate_planar(f, 0.0, 20.0, 0.5, 0.0, 1.0, tight());
        const auto rep = verify_energy_monotonicity(b, path);
        CHECK(rep.passed());
        CHECK(rep.segments_a > 0);
    }
    SUBCASE("squeezed system inside the bounds") {
        const auto b = squeezing();
        const SqueezedSystem sys(b, 30.0, 7);
        const auto path = integrate_planar(sys.field(), 0.0, 30.0, 0.2, 0.1, 1.0, tight(), sys.breakpoints());
        CHECK(verify_energy_monotonicity(b, path).passed());
    }
    SUBCASE("force outside the corridor is detected") {
        const auto b = linear();
        const PlanarField f = [](double, double x, double y) { return std::array<double, 2>{y, -5.0 * x}; };
        const auto path = integrate_planar(f, 0.0, 10.0, 0.3, 0.0, 1.0, tight());
        CHECK(!verify_energy_monotonicity(b, path).passed());
    }
    SUBCASE("radial shot of the cubic problem") {
        const auto sys =
            build_truncation(make_problem(2, Ball{10.0}, "1", "u^3", 5.0, BoundaryKind::Dirichlet, 5.0, true));
        const auto b = radial_rotation_bounds(sys, 2.5, 7.5, 10.0);
        const auto path = rescale_trajectory(shoot_rk(sys, make_shot(sys, 0.5)), 2.5, 7.5);
        CHECK(path.samples.front().t == doctest::Approx(2.5 * std::sqrt(5.0)));
        const auto rep = verify_energy_monotonicity(b, path);
        CHECK(rep.passed());
        CHECK(rep.segments_a + rep.segments_b > 10);
    }
}

TEST_CASE("squeezed systems stay inside the bounds") {
    const auto b = squeezing();
    const SqueezedSystem sys(b, 50.0, 11);
    for (double t = 0.0; t < 50.0; t += 0.37) {
        CHECK(sys.alpha(t) >= 0.0);
        CHECK(sys.alpha(t) <= 1.0);
        for (double s : {-0.9, -0.1, 0.2, 0.7}) {
            CHECK(sys.X(t, s) * s >= b(BoundPair::A1, s) * s - 1e-15);
            CHECK(sys.X(t, s) * s <= b(BoundPair::B1, s) * s + 1e-15);
            CHECK(sys.Y(t, s) * s >= b(BoundPair::B2, s) * s - 1e-15);
            CHECK(sys.Y(t, s) * s <= b(BoundPair::A2, s) * s + 1e-15);
        }
    }
}

TEST_CASE("randomized rotation check") {
    const auto b = squeezing();
    for (int j : {1, 2}) {
        const auto v = validate_rotation(b, j, 20, 1234);
        CHECK(v.passed());
        for (const auto& r : v.runs) {
            CHECK(!r.failed);
            CHECK(r.winding > j * kPi);
            CHECK(r.min_radius > 1e-6 * v.estimate.rho_star);
        }
    }
}

TEST_CASE("rotation check does not depend on the thread count") {
    const auto b = squeezing();
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = validate_rotation(b, 2, 12, 99);
    omp_set_num_threads(4);
    const auto c = validate_rotation(b, 2, 12, 99);
    omp_set_num_threads(saved);
    REQUIRE(a.runs.size() == c.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(std::memcmp(&a.runs[i].winding, &c.runs[i].winding, sizeof(double)) == 0);
        CHECK(std::memcmp(&a.runs[i].min_radius, &c.runs[i].min_radius, sizeof(double)) == 0);
    }
}

TEST_CASE("certificate export") {
    const auto b = squeezing();
    const auto e = estimate_thresholds(b, 1);
    const auto doc = certificate_json(e, b);
    CHECK(doc.at("j") == 1);
    CHECK(doc.at("tau_star").get<double>() == e.tau_star);
    CHECK(doc.at("rho_star").get<double>() == e.rho_star);
    CHECK(doc.at("bounds_hash") == b.hash());
}

TEST_CASE("radial thresholds bound the empirical lambda star from above") {
    const auto sys = build_truncation(make_problem(2, Ball{10.0}, "1", "u^3", 5.0, BoundaryKind::Dirichlet, 5.0, true));
    const auto b = radial_rotation_bounds(sys, 2.5, 7.5, 5.0);
    b.validate();
    // k = 1 needs the rotation threshold of class k + 3. The empirical
    // lambda*(1) of the sweep is at most 5.
    const auto e = estimate_thresholds(b, 4);
    CHECK(e.tau_star > 0.0);
    const double log_star = log10_lambda_star_from_tau(e.tau_star, 2.5, 7.5);
    CHECK(std::isfinite(log_star));
    CHECK(log_star >= std::log10(5.0));
    CHECK(lambda_star_from_tau(10.0, 2.5, 7.5) == doctest::Approx(4.0));
    CHECK(log10_lambda_star_from_tau(10.0, 2.5, 7.5) == doctest::Approx(std::log10(4.0)));
}
