#include "minkshoot/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minkshoot/error.hpp"

namespace minkshoot {

namespace {
constexpr double kPi = std::numbers::pi;
}

double scaled_angle(double u, double v, double lambda) {
    return std::atan2(-v / std::sqrt(lambda), u);
}

double principal_increment(double from, double to) {
    double d = std::remainder(to - from, 2.0 * kPi);
    if (d <= -kPi) d += 2.0 * kPi;
    return d;
}

AngleLift lift_angle(const Trajectory& traj, double lambda) {
    AngleLift lift;
    const auto& s = traj.samples;
    lift.r.reserve(s.size());
    lift.theta.reserve(s.size());

    double angle = scaled_angle(s.front().u, s.front().v, lambda);
    double theta = angle;
    if (traj.start == StartKind::InnerBoundary && traj.eta < 0.0) theta += 2.0 * kPi;

    for (const auto& p : s) {
        if (p.u == 0.0 && p.v == 0.0)
            throw Error(ErrorKind::LiftAmbiguous, "trajectory passes through the origin at r = " + std::to_string(p.r));
        const double a = scaled_angle(p.u, p.v, lambda);
        const double inc = principal_increment(angle, a);
        if (std::abs(inc) >= kPi / 2)
            throw Error(ErrorKind::LiftAmbiguous, "angle increment reaches pi/2 near r = " + std::to_string(p.r));
        theta += inc;
        angle = a;
        lift.r.push_back(p.r);
        lift.theta.push_back(theta);
    }
    lift.winding = lift.theta.back() - lift.theta.front();
    return lift;
}

int winding_zero_count(double theta_start, double theta_end, std::optional<BoundaryKind> bc) {
    // u vanishes exactly when theta = pi/2 mod pi, and theta' >= 0 there, so
    // every such level between the endpoints is crossed once.
    auto levels_up_to = [](double theta) { return std::floor((theta - kPi / 2) / kPi); };
    double end = theta_end;
    if (bc && *bc == BoundaryKind::Dirichlet) end -= 0.5;  // final level is the boundary zero
    return static_cast<int>(levels_up_to(end) - levels_up_to(theta_start));
}

namespace {

double refine_zero(const Trajectory& traj, double a, double b) {
    double ua = traj.at(a).u;
    for (int it = 0; it < 200 && (b - a) > 1e-10 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double um = traj.at(m).u;
        if (um == 0.0) return m;
        if ((um > 0.0) == (ua > 0.0)) {
            a = m;
            ua = um;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> sign_change_zeros(const Trajectory& traj) {
    std::vector<double> zeros;
    const auto& s = traj.samples;
    int last_sign = 0;
    double last_r = s.front().r;
    for (const auto& p : s) {
        const int sg = p.u > 0.0 ? 1 : (p.u < 0.0 ? -1 : 0);
        if (sg == 0) continue;
        if (last_sign != 0 && sg != last_sign) zeros.push_back(refine_zero(traj, last_r, p.r));
        last_sign = sg;
        last_r = p.r;
    }
    return zeros;
}

}  // namespace

NodalSummary count_nodal(const Trajectory& traj, const AngleLift& lift, std::optional<BoundaryKind> bc) {
    NodalSummary summary;
    const double r0 = traj.r_begin();
    const double r1 = traj.r_end();

    auto zeros = sign_change_zeros(traj);
    if (bc && *bc == BoundaryKind::Dirichlet) {
        const double window = 1e-6 * (r1 - r0);
        zeros.erase(std::remove_if(zeros.begin(), zeros.end(), [&](double z) { return r1 - z < window; }),
                    zeros.end());
    }
    zeros.erase(std::remove_if(zeros.begin(), zeros.end(), [&](double z) { return z <= r0; }), zeros.end());

    const int expected = winding_zero_count(lift.start(), lift.end(), bc);
    if (static_cast<int>(zeros.size()) != expected)
        throw Error(ErrorKind::CountMismatch, "found " + std::to_string(zeros.size()) + " sign changes but winding implies " +
                                                  std::to_string(expected));

    summary.zeros = std::move(zeros);
    summary.nodal_domains = static_cast<int>(summary.zeros.size()) + 1;
    double first = 0.0;
    for (const auto& p : traj.samples) {
        if (p.u != 0.0) {
            first = p.u;
            break;
        }
    }
    summary.sign_at_start = first < 0.0 ? -1 : 1;
    return summary;
}

AngularLemmaReport verify_angular_lemmas(const Trajectory& traj, const AngleLift& lift, double tol) {
    AngularLemmaReport report;

    double running_max = lift.theta.front();
    double worst = 0.0;
    for (double th : lift.theta) {
        running_max = std::max(running_max, th);
        worst = std::min(worst, th - running_max);
    }
    report.min_pair_increment = worst;
    report.backward_ok = worst > -kPi;

    double min_inc = std::numeric_limits<double>::infinity();
    for (double z : sign_change_zeros(traj)) {
        const auto i = traj.segment(z);
        const double width = traj.samples[i + 1].r - traj.samples[i].r;
        const double h = std::max(1e-6 * width, 1e-12 * std::max(1.0, z));
        const auto pz = traj.at(z);
        if (pz.v == 0.0) continue;
        const double az = scaled_angle(pz.u, pz.v, traj.lambda);
        for (double side : {-1.0, 1.0}) {
            const double r = z + side * h;
            if (r < traj.r_begin() || r > traj.r_end()) continue;
            const auto p = traj.at(r);
            const double inc = side * principal_increment(az, scaled_angle(p.u, p.v, traj.lambda));
            min_inc = std::min(min_inc, inc);
        }
        ++report.crossings;
    }
    report.min_crossing_increment = report.crossings ? min_inc : 0.0;
    report.crossing_ok = report.crossings == 0 || min_inc >= -tol;
    return report;
}

}  // namespace minkshoot
