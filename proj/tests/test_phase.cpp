#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minkshoot/error.hpp"
#include "minkshoot/phase.hpp"
#include "minkshoot/shoot.hpp"

using namespace minkshoot;

namespace {

constexpr double kPi = std::numbers::pi;

// u = cos(w r), v = -sqrt(lambda) sin(w r): the scaled state turns clockwise at rate w.
Trajectory circle(double w, double r_end, double lambda, int n, double direction = 1.0) {
    Trajectory t;
    t.eta = 1.0;
    t.lambda = lambda;
    const double sl = std::sqrt(lambda);
    for (int i = 0; i <= n; ++i) {
        const double r = r_end * i / n;
        const double a = direction * w * r;
        t.samples.push_back({r, std::cos(a), -sl * std::sin(a), -direction * w * std::sin(a),
                             -direction * sl * w * std::cos(a), 0.0});
    }
    return t;
}

TruncatedSystem fig1() {
    return build_truncation(make_problem(2, Ball{10.0}, "1", "u^3", 5.0, BoundaryKind::Dirichlet, 5.0, true));
}

}  // namespace

TEST_CASE("constant state has zero winding") {
    const auto sys = fig1();
    const auto t = shoot_rk(sys, make_shot(sys, 11.0));
    const auto lift = lift_angle(t, 5.0);
    for (double th : lift.theta) CHECK(th == 0.0);
    CHECK(lift.winding == 0.0);
}

TEST_CASE("quarter turn of a circle") {
    const auto lift = lift_angle(circle(1.0, kPi / 2, 1.0, 100), 1.0);
    CHECK(lift.start() == 0.0);
    CHECK(lift.winding == doctest::Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("Dirichlet root of class j = 2 winds (1/2 + 2) pi") {
    const auto sys = fig1();
    const auto res = solve(sys, {2});
    REQUIRE(!res.profiles.empty());
    for (const auto& p : res.profiles) {
        const auto lift = lift_angle(p.trajectory, sys.lambda);
        CHECK(std::abs(lift.winding - 2.5 * kPi) < 1e-8);
        CHECK(count_nodal(p.trajectory, lift, BoundaryKind::Dirichlet).zeros.size() == 2);
    }
}

TEST_CASE("nodal counts") {
    const auto sys = fig1();
    SUBCASE("one-signed solution") {
        const auto res = solve(sys, {0});
        REQUIRE(!res.profiles.empty());
        for (const auto& p : res.profiles) {
            const auto lift = lift_angle(p.trajectory, sys.lambda);
            CHECK(std::abs(lift.winding - kPi / 2) < 1e-8);
            const auto n = count_nodal(p.trajectory, lift, BoundaryKind::Dirichlet);
            CHECK(n.zeros.empty());
            CHECK(n.nodal_domains == 1);
        }
    }
    SUBCASE("winding 1.5 pi") {
        const auto res = solve(sys, {1});
        REQUIRE(!res.profiles.empty());
        for (const auto& p : res.profiles) {
            const auto n = count_nodal(p.trajectory, lift_angle(p.trajectory, sys.lambda), BoundaryKind::Dirichlet);
            CHECK(n.zeros.size() == 1);
            CHECK(n.nodal_domains == 2);
        }
    }
    SUBCASE("cos(3r) on [0, 3pi/2]") {
        const auto t = circle(3.0, 1.5 * kPi, 9.0, 4000);
        const auto lift = lift_angle(t, 9.0);
        CHECK(lift.winding == doctest::Approx(4.5 * kPi));
        const auto n = count_nodal(t, lift, BoundaryKind::Dirichlet);
        REQUIRE(n.zeros.size() == 4);
        for (int k = 0; k < 4; ++k) CHECK(n.zeros[k] == doctest::Approx((2 * k + 1) * kPi / 6).epsilon(1e-10));
        CHECK(n.nodal_domains == 5);
        CHECK(n.sign_at_start == 1);
    }
}

TEST_CASE("count mismatch is reported") {
    auto t = circle(3.0, 1.5 * kPi, 9.0, 4000);
    auto lift = lift_angle(t, 9.0);
    lift.theta.back() += kPi;  // claims one more zero than the samples show
    try {
        count_nodal(t, lift, BoundaryKind::Dirichlet);
        FAIL("expected CountMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CountMismatch);
    }
}

TEST_CASE("angular lemmas") {
    SUBCASE("clockwise circle passes") {
        const auto t = circle(1.0, 3 * kPi, 1.0, 600);
        const auto rep = verify_angular_lemmas(t, lift_angle(t, 1.0));
        CHECK(rep.passed());
        CHECK(rep.crossings == 3);
    }
    SUBCASE("reversed circle over 3pi/2 fails the backward bound") {
        const auto t = circle(1.0, 1.5 * kPi, 1.0, 300, -1.0);
        const auto rep = verify_angular_lemmas(t, lift_angle(t, 1.0));
        CHECK(!rep.backward_ok);
        CHECK(!rep.crossing_ok);
    }
    SUBCASE("computed trajectories pass") {
        const auto sys = fig1();
        for (double eta : {0.05, 0.5, 1.0, 1.55, 2.1, 3.0, 4.5, 9.99, -2.0}) {
            const auto t = shoot_rk(sys, make_shot(sys, eta));
            CHECK(verify_angular_lemmas(t, lift_angle(t, sys.lambda)).passed());
        }
    }
}

TEST_CASE("winding is invariant under a consistent rescaling of v and sqrt(lambda)") {
    const auto sys = fig1();
    auto t = shoot_rk(sys, make_shot(sys, 1.5));
    const double w = lift_angle(t, sys.lambda).winding;
    for (auto& s : t.samples) s.v *= 3.0;
    CHECK(lift_angle(t, sys.lambda * 9.0).winding == doctest::Approx(w).epsilon(1e-9));
}

TEST_CASE("winding is additive over a split point") {
    const auto sys = fig1();
    const auto t = shoot_rk(sys, make_shot(sys, 2.0));
    const auto lift = lift_angle(t, sys.lambda);
    const std::size_t m = lift.theta.size() / 3;
    CHECK((lift.theta[m] - lift.start()) + (lift.end() - lift.theta[m]) == doctest::Approx(lift.winding));
}

TEST_CASE("coarse sampling is rejected") {
    try {
        lift_angle(circle(1.0, kPi, 1.0, 2), 1.0);
        FAIL("expected LiftAmbiguous");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LiftAmbiguous);
    }
}
