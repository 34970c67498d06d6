#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minkshoot/error.hpp"
#include "minkshoot/periodic.hpp"

using namespace minkshoot;

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicSystem cubic(double lambda) { return build_periodic(make_periodic(2 * kPi, "1", "u^3", lambda, 1.0)); }

}  // namespace

TEST_CASE("origin is fixed") {
    const auto ps = cubic(5.0);
    const auto m = poincare_map(ps, 0.0, 0.0);
    CHECK(m.u1 == 0.0);
    CHECK(m.v1 == 0.0);
    CHECK(m.winding == 0.0);
}

TEST_CASE("points beyond the strip drift without turning") {
    const auto ps = cubic(5.0);
    for (double u0 : {20.0, -50.0, 1e3}) {
        const auto m = poincare_map(ps, u0, 0.0);
        CHECK(m.u1 == u0);
        CHECK(m.v1 == 0.0);
        CHECK(std::abs(m.winding) < 2 * kPi);
    }
    // With v0 != 0 the slope is constant: u moves on a straight line.
    const auto m = poincare_map(ps, 30.0, 2.0);
    CHECK(m.v1 == 2.0);
    CHECK(m.u1 == doctest::Approx(30.0 + 2 * kPi * ps.truncation.phi_inverse(2.0)));
}

TEST_CASE("small circles turn less than once") {
    const auto ps = cubic(5.0);
    for (int a = 0; a < 16; ++a) {
        const double t = 2 * kPi * a / 16;
        CHECK(poincare_map(ps, 1e-3 * std::cos(t), -1e-3 * std::sin(t)).winding < 2 * kPi);
    }
}

TEST_CASE("twist at large lambda, none as lambda goes to zero") {
    const auto ps = cubic(5.0);
    const auto rep = verify_twist(ps, 1, default_twist_radii(ps));
    CHECK(rep.found());
    REQUIRE(rep.witness_radius);
    for (double lambda : {0.01, 0.1}) {
        const auto weak = cubic(lambda);
        const auto r = verify_twist(weak, 1, default_twist_radii(weak));
        CHECK(!r.found());
        for (const auto& c : r.circles) CHECK(c.max_winding < 2 * kPi);
    }
}

TEST_CASE("winding is continuous across the radius grid") {
    const auto ps = cubic(5.0);
    const auto coarse = verify_twist(ps, 1, default_twist_radii(ps, 48), 16);
    const auto fine = verify_twist(ps, 1, default_twist_radii(ps, 192), 16);
    CHECK(fine.max_adjacent_jump < coarse.max_adjacent_jump);
    CHECK(fine.max_adjacent_jump < kPi);
}

TEST_CASE("fixed points of the return map") {
    const auto ps = cubic(5.0);
    const auto radii = default_twist_radii(ps);
    const auto search = find_periodic(ps, 1, radii.front(), radii.back());
    REQUIRE(search.solutions.size() >= 2);
    for (const auto& s : search.solutions) {
        CHECK(s.residual < 1e-8);
        const auto m = poincare_map(ps, s.u0, s.v0);
        CHECK(std::hypot(m.u1 - s.u0, m.v1 - s.v0) < 1e-8);
        CHECK(std::abs(s.winding - 2 * kPi) < 1e-3);
        CHECK(s.max_abs_u < ps.spec.strip);
        CHECK(s.max_abs_slope < 1.0);
        // Odd g: the mirrored point is periodic too.
        const auto mm = poincare_map(ps, -s.u0, -s.v0);
        CHECK(std::hypot(mm.u1 + s.u0, mm.v1 + s.v0) < 1e-8);
    }
}

TEST_CASE("return map preserves area") {
    const auto ps = cubic(5.0);
    for (const auto& tri : {std::array<std::array<double, 2>, 3>{{{0.5, 0.1}, {0.52, 0.1}, {0.5, 0.12}}},
                            std::array<std::array<double, 2>, 3>{{{-1.0, 2.0}, {-0.98, 2.0}, {-1.0, 2.03}}}}) {
        CHECK(area_distortion(ps, tri) < 1e-6);
    }
}

TEST_CASE("periodic spec validation") {
    try {
        make_periodic(2 * kPi, "1 + r", "u^3", 1.0, 1.0);
        FAIL("expected InvalidSpec");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
    const auto spec = periodic_from_json(nlohmann::json::parse(R"j({"period": 6.283185307179586, "q": "2 + sin(t)",
        "g": "u^3", "lambda": 3})j"));
    CHECK(spec.weight(kPi / 2) == doctest::Approx(3.0));
    CHECK(periodic_to_json(spec).at("lambda") == 3.0);
}
