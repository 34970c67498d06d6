#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "minkshoot/error.hpp"
#include "minkshoot/integrate.hpp"

using namespace minkshoot;

namespace {

TruncatedSystem fig1() {
    return build_truncation(make_problem(2, Ball{10.0}, "1", "u^3", 5.0, BoundaryKind::Dirichlet, 5.0, true));
}

double max_abs_u_diff(const Trajectory& a, const Trajectory& b) { return sup_distance(a, b, 0.0, a.r_end()).u; }

}  // namespace

TEST_CASE("constant solutions outside the strip and at zero") {
    const auto sys = fig1();
    for (double eta : {11.0, -11.0}) {
        const auto t = shoot_rk(sys, make_shot(sys, eta));
        for (const auto& s : t.samples) {
            CHECK(s.u == eta);
            CHECK(s.v == 0.0);
        }
    }
    const auto zero = shoot_rk(sys, make_shot(sys, 0.0));
    for (const auto& s : zero.samples) {
        CHECK(s.u == 0.0);
        CHECK(s.v == 0.0);
    }
}

TEST_CASE("Runge-Kutta shot matches the Picard oracle at eta = 0.5") {
    const auto sys = fig1();
    const auto rk = shoot_rk(sys, make_shot(sys, 0.5));
    ShotSettings ps;
    ps.abs_tol = 1e-9;
    const auto pc = picard_solve(sys, make_shot(sys, 0.5, ps));
    CHECK(max_abs_u_diff(rk, pc.trajectory) < 1e-6);
    CHECK(std::abs(rk.samples.back().u - pc.trajectory.samples.back().u) < 1e-6);
}

TEST_CASE("Picard on a constant state in the cut-off region converges in one step") {
    const auto sys = fig1();
    ShotSettings ps;
    ps.abs_tol = 1e-9;
    const auto pc = picard_solve(sys, make_shot(sys, 11.5, ps), {256, 10});
    CHECK(pc.iterations == 1);
    CHECK(pc.distances.front() == 0.0);
}

TEST_CASE("one Picard step contracts by at most L R^2") {
    const auto sys = fig1();
    const double L = picard_constant(sys);
    const std::size_t n = 4097;
    const std::vector<double> u1(n, 0.0), u2(n, 1.0);
    const auto a = picard_apply(sys, 0.0, 10.0, u1);
    const auto b = picard_apply(sys, 0.0, 10.0, u2);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]));
    CHECK(d > 0.0);
    CHECK(d <= L * 100.0 * 1.0);
}

TEST_CASE("Picard distances stay under L^k R^{2k}/k! d0") {
    const auto sys = fig1();
    const double L = picard_constant(sys);
    ShotSettings ps;
    ps.abs_tol = 1e-9;
    for (double eta : {0.01, 0.5, 2.0}) {
        const auto pc = picard_solve(sys, make_shot(sys, eta, ps), {8192, 20000});
        for (std::size_t k = 1; k < pc.distances.size(); ++k)
            CHECK(std::log(pc.distances[k]) <= std::log(pc.distances[0]) + picard_log_bound(L, 10.0, int(k)));
    }
}

TEST_CASE("oracle equivalence over a battery of shots") {
    const auto sys = fig1();
    ShotSettings ps;
    ps.abs_tol = 1e-9;
    for (int i = 0; i < 8; ++i) {
        const double eta = 1e-3 * std::pow(11.0 / 1e-3, i / 7.0);
        CAPTURE(eta);
        const auto rk = shoot_rk(sys, make_shot(sys, eta));
        const auto pc = picard_solve(sys, make_shot(sys, eta, ps), {65536, 20000});
        CHECK(max_abs_u_diff(rk, pc.trajectory) < 1e-6);
    }
}

TEST_CASE("Picard reports non-convergence") {
    const auto sys = fig1();
    ShotSettings ps;
    ps.abs_tol = 1e-14;
    try {
        picard_solve(sys, make_shot(sys, 1.0, ps), {256, 3});
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoConvergence);
    }
}

TEST_CASE("continuous dependence on eta") {
    const auto sys = fig1();
    const auto rep = continuity_probe(sys, 1.0, {1e-2, 1e-3, 1e-4, 0.0});
    REQUIRE(rep.entries.size() == 4);
    CHECK(rep.entries[3].distance_u == 0.0);
    CHECK(rep.entries[1].distance_u < rep.entries[0].distance_u);
    CHECK(rep.entries[2].distance_u < rep.entries[1].distance_u);
    CHECK(rep.monotone);
    CHECK(rep.within_gronwall);
    for (const auto& e : rep.entries)
        if (e.radius > 0) CHECK(std::log(e.distance_u) <= rep.log_gronwall_constant + std::log(e.radius));
}

TEST_CASE("trajectory invariants") {
    const auto sys = fig1();
    for (double eta : {1e-4, 0.3, 1.0, 2.5, 6.0, 9.9}) {
        const auto t = shoot_rk(sys, make_shot(sys, eta));
        CHECK(t.samples.front().r == doctest::Approx(1e-5));
        for (std::size_t i = 0; i < t.samples.size(); ++i) {
            const auto& s = t.samples[i];
            CHECK(std::abs(s.du) <= sys.gamma);
            CHECK(s.u * s.u + s.v * s.v > 0.0);
            if (i > 0) {
                CHECK(s.r > t.samples[i - 1].r);
                CHECK(std::abs(s.theta - t.samples[i - 1].theta) < std::numbers::pi / 2);
            }
        }
        CHECK(t.r_end() == 10.0);
    }
}

TEST_CASE("odd nonlinearity gives odd trajectories") {
    const auto sys = fig1();
    const auto a = shoot_rk(sys, make_shot(sys, 1.3));
    const auto b = shoot_rk(sys, make_shot(sys, -1.3));
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].r == b.samples[i].r);
        CHECK(a.samples[i].u == -b.samples[i].u);
    }
}

TEST_CASE("halving tolerances moves the endpoint by less than the coarse error") {
    const auto sys = fig1();
    ShotSettings coarse, fine, finest;
    coarse.abs_tol = coarse.rel_tol = 1e-8;
    fine.abs_tol = fine.rel_tol = 0.5e-8;
    finest.abs_tol = finest.rel_tol = 1e-13;
    const auto a = shoot_rk(sys, make_shot(sys, 1.0, coarse)).samples.back();
    const auto b = shoot_rk(sys, make_shot(sys, 1.0, fine)).samples.back();
    const auto ref = shoot_rk(sys, make_shot(sys, 1.0, finest)).samples.back();
    CHECK(std::abs(a.u - b.u) <= std::abs(a.u - ref.u) + 1e-12);
}

TEST_CASE("annulus shots start on the inner boundary") {
    const auto sys = build_truncation(make_problem(2, Annulus{5.0, 10.0}, "1", "u^3", 5.0, BoundaryKind::Dirichlet, 1.0));
    const auto t = shoot_rk(sys, make_shot(sys, 0.3));
    CHECK(t.samples.front().r == 5.0);
    CHECK(t.samples.front().u == 0.0);
    CHECK(t.samples.front().du == doctest::Approx(0.3));
    CHECK(t.r_end() == 10.0);
}
