#include "minkshoot/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minkshoot/error.hpp"
#include "minkshoot/ode.hpp"
#include "minkshoot/phase.hpp"

namespace minkshoot {

namespace {

double radial_power(double r, int exponent) {
    double p = 1.0;
    for (int i = 0; i < exponent; ++i) p *= r;
    return p;
}

constexpr double kMaxSampleTurn = std::numbers::pi / 4;

}  // namespace

ShotInput make_shot(const TruncatedSystem& system, double eta, const ShotSettings& settings) {
    return ShotInput{eta, system.r_begin, system.r_end, settings};
}

std::size_t Trajectory::segment(double r) const {
    const auto it = std::upper_bound(samples.begin(), samples.end(), r,
                                     [](double x, const TrajectorySample& s) { return x < s.r; });
    if (it == samples.begin()) return 0;
    const auto idx = static_cast<std::size_t>(it - samples.begin()) - 1;
    return std::min(idx, samples.size() - 2);
}

Trajectory::Point Trajectory::at(double r) const {
    if (samples.size() == 1) return {samples[0].u, samples[0].v, samples[0].du, samples[0].dv};
    r = std::clamp(r, samples.front().r, samples.back().r);
    const auto i = segment(r);
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    return {ode::hermite(a.r, a.u, a.du, b.r, b.u, b.du, r), ode::hermite(a.r, a.v, a.dv, b.r, b.v, b.dv, r),
            ode::hermite_derivative(a.r, a.u, a.du, b.r, b.u, b.du, r),
            ode::hermite_derivative(a.r, a.v, a.dv, b.r, b.v, b.dv, r)};
}

Trajectory shoot_rk(const TruncatedSystem& sys, const ShotInput& input) {
    const int nm1 = sys.dimension - 1;
    const double lambda = sys.lambda;
    const double sqrt_lambda = std::sqrt(lambda);
    const double eta = input.eta;

    auto rhs = [&](double r, const ode::State<2>& y) -> ode::State<2> {
        const double rp = radial_power(r, nm1);
        return {sys.phi_inverse(nm1 == 0 ? y[1] : y[1] / rp), -lambda * rp * sys.force(r, y[0])};
    };

    Trajectory traj;
    traj.eta = eta;
    traj.lambda = lambda;
    traj.start = sys.ball ? StartKind::Center : StartKind::InnerBoundary;

    double r0 = input.r_begin;
    ode::State<2> y0{};
    if (sys.ball) {
        const double f0 = sys.force(0.0, eta);
        const double dv0 = nm1 == 0 ? -lambda * f0 : 0.0;
        traj.samples.push_back({r0, eta, 0.0, 0.0, dv0, 0.0});
        const double r_start = std::max(input.r_begin, input.settings.eps_sing * input.r_end);
        if (r_start > r0) {
            const double n = sys.dimension;
            y0 = {eta - lambda * f0 * r_start * r_start / (2.0 * n), -lambda * f0 * radial_power(r_start, sys.dimension) / n};
            r0 = r_start;
            const auto d = rhs(r0, y0);
            traj.samples.push_back({r0, y0[0], y0[1], d[0], d[1], 0.0});
        } else {
            y0 = {eta, 0.0};
        }
    } else {
        y0 = {0.0, radial_power(r0, nm1) * sys.phi(eta)};
        const auto d = rhs(r0, y0);
        traj.samples.push_back({r0, y0[0], y0[1], d[0], d[1], 0.0});
    }

    // Lifted angle, tracked step by step.
    double angle = 0.0;
    bool have_angle = false;
    double theta = 0.0;
    auto set_start_angle = [&](double u, double v) {
        if (u == 0.0 && v == 0.0) return;
        angle = scaled_angle(u, v, lambda);
        theta = angle;
        if (traj.start == StartKind::InnerBoundary && eta < 0.0) theta += 2.0 * std::numbers::pi;
        have_angle = true;
    };
    set_start_angle(traj.samples.front().u, traj.samples.front().v);
    for (auto& s : traj.samples) {
        if (have_angle && !(s.u == 0.0 && s.v == 0.0)) {
            const double a = scaled_angle(s.u, s.v, lambda);
            theta += principal_increment(angle, a);
            angle = a;
        }
        s.theta = theta;
    }

    const double origin_floor = 1e-12 * std::max(std::abs(eta), 1.0);
    const bool check_origin = eta != 0.0;

    ode::Options opt;
    opt.abs_tol = input.settings.abs_tol;
    opt.rel_tol = input.settings.rel_tol;

    auto on_step = [&](double r, const ode::State<2>& y, const ode::State<2>& dy) {
        if (check_origin && y[0] * y[0] + y[1] * y[1] < origin_floor * origin_floor)
            throw Error(ErrorKind::OriginHit, "trajectory reached the origin at r = " + std::to_string(r));
        if (!have_angle) {
            set_start_angle(y[0], y[1]);
        } else if (!(y[0] == 0.0 && y[1] == 0.0)) {
            const double a = scaled_angle(y[0], y[1], lambda);
            theta += principal_increment(angle, a);
            angle = a;
        }
        traj.samples.push_back({r, y[0], y[1], dy[0], dy[1], theta});
    };

    auto limit = [&](double, const ode::State<2>& y, const ode::State<2>& dy) {
        const double den = lambda * y[0] * y[0] + y[1] * y[1];
        if (den == 0.0) return std::numeric_limits<double>::infinity();
        const double omega = sqrt_lambda * std::abs(dy[0] * y[1] - dy[1] * y[0]) / den;
        return omega > 0.0 ? 0.5 * kMaxSampleTurn / omega : std::numeric_limits<double>::infinity();
    };

    auto admissible = [&](double, const ode::State<2>& y, double, const ode::State<2>& y_new) {
        if ((y[0] == 0.0 && y[1] == 0.0) || (y_new[0] == 0.0 && y_new[1] == 0.0)) return true;
        return std::abs(principal_increment(scaled_angle(y[0], y[1], lambda),
                                            scaled_angle(y_new[0], y_new[1], lambda))) < kMaxSampleTurn;
    };

    ode::dopri5<2>(rhs, r0, y0, input.r_end, opt, on_step, limit, admissible);
    return traj;
}

double picard_constant(const TruncatedSystem& sys) {
    return sys.lambda / sys.dimension * TruncatedSystem::phi_inverse_lipschitz() * sys.force_lipschitz;
}

double picard_log_bound(double L, double R, int k) {
    return k * std::log(L * R * R) - std::lgamma(k + 1.0);
}

namespace {

// Cumulative composite Simpson on a uniform grid with an even number of
// panels; odd nodes use the quadratic through the enclosing panel pair.
void cumulative_simpson(const std::vector<double>& f, double h, std::vector<double>& out) {
    const std::size_t n = f.size() - 1;
    out.assign(f.size(), 0.0);
    for (std::size_t i = 0; i + 2 <= n; i += 2) {
        const double f0 = f[i], f1 = f[i + 1], f2 = f[i + 2];
        out[i + 1] = out[i] + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        out[i + 2] = out[i] + h / 3.0 * (f0 + 4.0 * f1 + f2);
    }
}

}  // namespace

std::vector<double> picard_apply(const TruncatedSystem& sys, double eta, double r_end, const std::vector<double>& u,
                                 std::vector<double>* flux) {
    const std::size_t n = u.size() - 1;
    const double h = r_end / static_cast<double>(n);
    const int nm1 = sys.dimension - 1;

    std::vector<double> integrand(n + 1), inner, outer;
    for (std::size_t i = 0; i <= n; ++i) {
        const double r = h * static_cast<double>(i);
        integrand[i] = sys.lambda * radial_power(r, nm1) * sys.force(r, u[i]);
    }
    cumulative_simpson(integrand, h, inner);

    std::vector<double> slope(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double r = h * static_cast<double>(i);
        const double w = i == 0 ? 0.0 : (nm1 == 0 ? inner[i] : inner[i] / radial_power(r, nm1));
        slope[i] = sys.phi_inverse(w);
    }
    cumulative_simpson(slope, h, outer);

    std::vector<double> next(n + 1);
    for (std::size_t i = 0; i <= n; ++i) next[i] = eta - outer[i];
    if (flux) {
        flux->resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) (*flux)[i] = -inner[i];
    }
    return next;
}

PicardResult picard_solve(const TruncatedSystem& sys, const ShotInput& input, const PicardOptions& options) {
    if (!sys.ball || input.r_begin != 0.0)
        throw Error(ErrorKind::InvalidSpec, "picard_solve is defined for ball shots from r = 0");
    if (options.panels < 2 || options.panels % 2 != 0)
        throw Error(ErrorKind::InvalidSpec, "picard_solve needs an even number of panels");

    const auto n = static_cast<std::size_t>(options.panels);
    const double h = input.r_end / static_cast<double>(n);
    std::vector<double> u(n + 1, input.eta), flux;

    PicardResult result;
    bool converged = false;
    for (int k = 0; k < options.max_iter; ++k) {
        auto next = picard_apply(sys, input.eta, input.r_end, u, &flux);
        double d = 0.0;
        for (std::size_t i = 0; i <= n; ++i) d = std::max(d, std::abs(next[i] - u[i]));
        result.distances.push_back(d);
        u = std::move(next);
        result.iterations = k + 1;
        if (d < input.settings.abs_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(ErrorKind::NoConvergence,
                    "Picard iteration did not reach tolerance in " + std::to_string(options.max_iter) + " iterations");

    auto& traj = result.trajectory;
    traj.eta = input.eta;
    traj.lambda = sys.lambda;
    traj.start = StartKind::Center;
    traj.samples.resize(n + 1);
    const int nm1 = sys.dimension - 1;
    double angle = 0.0, theta = 0.0;
    bool have_angle = false;
    for (std::size_t i = 0; i <= n; ++i) {
        const double r = h * static_cast<double>(i);
        const double rp = radial_power(r, nm1);
        const double w = i == 0 ? 0.0 : (nm1 == 0 ? flux[i] : flux[i] / rp);
        auto& s = traj.samples[i];
        s.r = r;
        s.u = u[i];
        s.v = flux[i];
        s.du = sys.phi_inverse(w);
        s.dv = -sys.lambda * rp * sys.force(r, u[i]);
        if (!(s.u == 0.0 && s.v == 0.0)) {
            const double a = scaled_angle(s.u, s.v, sys.lambda);
            if (have_angle) {
                theta += principal_increment(angle, a);
            } else {
                theta = a;
                have_angle = true;
            }
            angle = a;
        }
        s.theta = theta;
    }
    return result;
}

TrajectoryDistance sup_distance(const Trajectory& a, const Trajectory& b, double r0, double r1) {
    TrajectoryDistance d;
    auto probe = [&](double r) {
        if (r < r0 || r > r1) return;
        const auto pa = a.at(r);
        const auto pb = b.at(r);
        d.u = std::max(d.u, std::abs(pa.u - pb.u));
        d.v = std::max(d.v, std::abs(pa.v - pb.v));
    };
    for (const auto& s : a.samples) probe(s.r);
    for (const auto& s : b.samples) probe(s.r);
    return d;
}

ContinuityReport continuity_probe(const TruncatedSystem& sys, double eta_center, const std::vector<double>& radii,
                                  const ShotSettings& settings) {
    ContinuityReport report;
    const auto center = shoot_rk(sys, make_shot(sys, eta_center, settings));
    const double r0 = sys.r_begin;
    const double r1 = sys.r_end;
    const double length = r1 - r0;
    report.log_gronwall_constant = picard_constant(sys) * length * length;

    for (double rho : radii) {
        ContinuityEntry entry{rho, 0.0, 0.0};
        if (rho > 0.0) {
            for (double sign : {1.0, -1.0}) {
                const auto other = shoot_rk(sys, make_shot(sys, eta_center + sign * rho, settings));
                const auto d = sup_distance(center, other, r0, r1);
                entry.distance_u = std::max(entry.distance_u, d.u);
                entry.distance_v = std::max(entry.distance_v, d.v);
            }
        }
        report.entries.push_back(entry);
    }

    const double slack = 10.0 * std::max(settings.abs_tol, settings.rel_tol);
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        if (i > 0 && e.distance_u > 2.0 * report.entries[i - 1].distance_u + slack) report.monotone = false;
        if (e.distance_u > slack &&
            std::log(e.distance_u - slack) > report.log_gronwall_constant + std::log(std::max(e.radius, 1e-300)))
            report.within_gronwall = false;
    }
    return report;
}

}  // namespace minkshoot
