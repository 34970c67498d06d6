#include "minkshoot/planar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minkshoot/error.hpp"
#include "minkshoot/phase.hpp"

namespace minkshoot {

namespace {
constexpr double kMaxSampleTurn = std::numbers::pi / 4;
}

double PlanarPath::min_radius() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::min(m, std::hypot(s.x, s.y / angle_scale));
    return m;
}

std::array<double, 2> PlanarPath::at(double t) const {
    if (t <= samples.front().t) return {samples.front().x, samples.front().y};
    if (t >= samples.back().t) return {samples.back().x, samples.back().y};
    const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                     [](double v, const PlanarSample& s) { return v < s.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return {ode::hermite(a.t, a.x, a.dx, b.t, b.x, b.dx, t), ode::hermite(a.t, a.y, a.dy, b.t, b.y, b.dy, t)};
}

PlanarPath integrate_planar(const PlanarField& field, double t0, double t1, double x0, double y0,
                            double angle_scale, const ode::Options& options, const std::vector<double>& breakpoints,
                            double origin_floor) {
    PlanarPath path;
    path.angle_scale = angle_scale;

    auto rhs = [&](double t, const ode::State<2>& z) {
        const auto d = field(t, z[0], z[1]);
        return ode::State<2>{d[0], d[1]};
    };
    const auto d0 = field(t0, x0, y0);
    double angle = scaled_angle(x0, y0, angle_scale * angle_scale);
    double theta = angle;
    path.samples.push_back({t0, x0, y0, d0[0], d0[1], theta});

    auto on_step = [&](double t, const ode::State<2>& z, const ode::State<2>& dz) {
        if (std::hypot(z[0], z[1] / angle_scale) <= origin_floor)
            throw Error(ErrorKind::OriginHit, "planar path reached the origin at t = " + std::to_string(t));
        if (!(z[0] == 0.0 && z[1] == 0.0)) {
            const double a = scaled_angle(z[0], z[1], angle_scale * angle_scale);
            theta += principal_increment(angle, a);
            angle = a;
        }
        path.samples.push_back({t, z[0], z[1], dz[0], dz[1], theta});
    };
    auto limit = [&](double, const ode::State<2>& z, const ode::State<2>& dz) {
        const double y = z[1] / angle_scale, dy = dz[1] / angle_scale;
        const double den = z[0] * z[0] + y * y;
        if (den == 0.0) return std::numeric_limits<double>::infinity();
        const double omega = std::abs(dz[0] * y - dy * z[0]) / den;
        return omega > 0.0 ? 0.5 * kMaxSampleTurn / omega : std::numeric_limits<double>::infinity();
    };
    auto admissible = [&](double, const ode::State<2>& z, double, const ode::State<2>& z_new) {
        if ((z[0] == 0.0 && z[1] == 0.0) || (z_new[0] == 0.0 && z_new[1] == 0.0)) return true;
        const double l = angle_scale * angle_scale;
        return std::abs(principal_increment(scaled_angle(z[0], z[1], l), scaled_angle(z_new[0], z_new[1], l))) <
               kMaxSampleTurn;
    };

    std::vector<double> cuts;
    for (double b : breakpoints)
        if (b > t0 && b < t1) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(t1);

    double a = t0;
    ode::State<2> z{x0, y0};
    for (double b : cuts) {
        if (b <= a) continue;
        ode::dopri5<2>(rhs, a, z, b, options, on_step, limit, admissible);
        z = {path.samples.back().x, path.samples.back().y};
        a = b;
    }
    return path;
}

}  // namespace minkshoot
