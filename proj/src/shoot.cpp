#include "minkshoot/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minkshoot/error.hpp"

namespace minkshoot {

namespace {
constexpr double kPi = std::numbers::pi;

double outer_radius(const TruncatedSystem& sys) { return sys.r_end; }

double boundary_residual(const TruncatedSystem& sys, const Trajectory& traj) {
    const auto& last = traj.samples.back();
    if (sys.bc == BoundaryKind::Neumann) return std::abs(last.du);
    return std::abs(last.u);
}

ShotRecord shot_record(const TruncatedSystem& sys, double eta, const ShotSettings& settings) {
    try {
        return make_record(sys, shoot_rk(sys, make_shot(sys, eta, settings)));
    } catch (const Error& e) {
        ShotRecord rec;
        rec.eta = eta;
        rec.failed = true;
        rec.origin_free = e.kind() != ErrorKind::OriginHit;
        rec.error = e.what();
        return rec;
    }
}

}  // namespace

std::string_view to_string(Branch b) { return b == Branch::Small ? "small" : "large"; }

std::vector<double> EtaGrid::points(const TruncatedSystem& sys) const {
    std::vector<double> pts;
    const double top = sys.strip + sys.ramp_width;
    if (sys.ball) {
        const double R = outer_radius(sys);
        const double lo = low_fraction * R;
        const double split = split_fraction * R;
        for (int i = 0; i < geometric; ++i) {
            const double s = geometric > 1 ? static_cast<double>(i) / (geometric - 1) : 0.0;
            pts.push_back(lo * std::pow(split / lo, s));
        }
        for (int i = 1; i <= uniform; ++i) pts.push_back(split + (top - split) * i / uniform);
    } else {
        // Flux parametrization: slopes accumulate just below gamma, and only
        // slopes well beyond 1 (inside the affine continuation of phi~) let u
        // leave the strip before the outer radius.
        const int nm1 = sys.dimension - 1;
        const double r1 = sys.r_begin;
        const double r2 = sys.r_end;
        const double rp = std::pow(r1, nm1);
        const double escape_slope = 4.0 * top / (r2 - r1) * std::pow(r2 / r1, nm1);
        const double y_lo = 1e-6;
        const double y_hi = rp * sys.phi(escape_slope);
        const int n = geometric + uniform;
        for (int i = 0; i < n; ++i) {
            const double s = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
            pts.push_back(sys.phi_inverse(y_lo * std::pow(y_hi / y_lo, s) / rp));
        }
    }
    if (mirror) {
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) pts.push_back(-pts[i]);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

ShotRecord make_record(const TruncatedSystem& sys, const Trajectory& traj) {
    ShotRecord rec;
    rec.eta = traj.eta;
    rec.winding = traj.winding();
    const auto& last = traj.samples.back();
    rec.terminal_u = last.u;
    rec.terminal_v = last.v;
    rec.terminal_slope = last.du;
    for (const auto& s : traj.samples) rec.max_abs_slope = std::max(rec.max_abs_slope, std::abs(s.du));
    rec.slope_bound_ok = rec.max_abs_slope <= sys.gamma;
    rec.origin_free = traj.eta != 0.0;
    return rec;
}

std::vector<ShotRecord> scan_eta_serial(const TruncatedSystem& sys, const std::vector<double>& etas,
                                        const ShotSettings& settings) {
    std::vector<ShotRecord> records;
    records.reserve(etas.size());
    for (double eta : etas) records.push_back(shot_record(sys, eta, settings));
    return records;
}

std::vector<ShotRecord> scan_eta(const TruncatedSystem& sys, const std::vector<double>& etas,
                                 const ShotSettings& settings) {
    std::vector<ShotRecord> records(etas.size());
    const auto n = static_cast<long>(etas.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) records[static_cast<std::size_t>(i)] = shot_record(sys, etas[static_cast<std::size_t>(i)], settings);
    return records;
}

double target_for(const TruncatedSystem& sys, int j) {
    if (sys.ball && sys.bc == BoundaryKind::Dirichlet) return (0.5 + j) * kPi;
    return j * kPi;
}

namespace {

int class_of_target(const TruncatedSystem& sys, double target) {
    if (sys.ball && sys.bc == BoundaryKind::Dirichlet) return static_cast<int>(std::lround(target / kPi - 0.5));
    return static_cast<int>(std::lround(target / kPi));
}

struct Bracket {
    double lo, hi;
    double f_lo;
};

std::optional<SolutionProfile> bisect(const TruncatedSystem& sys, const Bracket& br, double target,
                                      const SolverConfig& cfg, const std::optional<double>& separator) {
    const double width_floor = cfg.interval_fraction * outer_radius(sys);
    double lo = br.lo, hi = br.hi, f_lo = br.f_lo;

    std::optional<Trajectory> best;
    for (int it = 0; it < cfg.max_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        Trajectory traj;
        try {
            traj = shoot_rk(sys, make_shot(sys, mid, cfg.shot));
        } catch (const Error&) {
            return std::nullopt;
        }
        const double f_mid = traj.winding() - target;
        const double residual = boundary_residual(sys, traj);
        const bool done = (std::abs(f_mid) < cfg.angle_tol && residual < cfg.residual_tol) || (hi - lo) < width_floor;
        if (done) {
            if (residual >= cfg.residual_tol) return std::nullopt;
            best = std::move(traj);
            break;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if (!best) return std::nullopt;

    SolutionProfile p;
    p.eta = best->eta;
    p.target = target;
    p.j = class_of_target(sys, target);
    p.winding = best->winding();
    p.boundary_residual = boundary_residual(sys, *best);
    p.sign_at_center = p.eta < 0.0 ? -1 : 1;
    p.branch = (separator && std::abs(p.eta) > std::abs(*separator)) ? Branch::Large : Branch::Small;
    try {
        const auto lift = lift_angle(*best, sys.lambda);
        p.nodal = count_nodal(*best, lift, sys.bc);
    } catch (const Error&) {
        return std::nullopt;
    }
    for (const auto& s : best->samples)
        if (std::abs(s.du) > sys.gamma) return std::nullopt;
    p.trajectory = std::move(*best);
    return p;
}

}  // namespace

std::optional<double> winding_argmax(const std::vector<ShotRecord>& records, int sign) {
    std::optional<double> arg;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (r.failed || r.eta == 0.0 || (r.eta > 0.0) != (sign > 0)) continue;
        if (r.winding > best) {
            best = r.winding;
            arg = r.eta;
        }
    }
    return arg;
}

RootSearch bracket_and_bisect(const TruncatedSystem& sys, const std::vector<ShotRecord>& records, double target,
                              const SolverConfig& cfg) {
    std::vector<Bracket> brackets;
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = records[i + 1];
        if (a.failed || b.failed || a.eta == 0.0 || b.eta == 0.0 || (a.eta > 0.0) != (b.eta > 0.0)) continue;
        const double fa = a.winding - target;
        const double fb = b.winding - target;
        if ((fa < 0.0 && fb >= 0.0) || (fa >= 0.0 && fb < 0.0)) brackets.push_back({a.eta, b.eta, fa});
    }

    const auto sep_pos = winding_argmax(records, 1);
    const auto sep_neg = winding_argmax(records, -1);

    std::vector<std::optional<SolutionProfile>> found(brackets.size());
    const auto n = static_cast<long>(brackets.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        const auto& br = brackets[static_cast<std::size_t>(i)];
        found[static_cast<std::size_t>(i)] = bisect(sys, br, target, cfg, br.lo > 0.0 ? sep_pos : sep_neg);
    }

    RootSearch result;
    result.brackets = static_cast<int>(brackets.size());
    const double merge = cfg.dedupe_fraction * outer_radius(sys);
    for (auto& f : found) {
        if (!f) {
            ++result.rejected;
            continue;
        }
        if (!result.profiles.empty() && std::abs(result.profiles.back().eta - f->eta) < merge) {
            if (f->boundary_residual < result.profiles.back().boundary_residual) result.profiles.back() = std::move(*f);
            continue;
        }
        result.profiles.push_back(std::move(*f));
    }
    return result;
}

double default_eps_choice(const TruncatedSystem& sys) {
    const double R = sys.r_end - sys.r_begin;
    const double bound = kPi / (2.0 * R);
    return bound * bound * 0.99;
}

EtaStarEstimate estimate_eta_star_small(const TruncatedSystem& sys, double eps, const ShotSettings& settings) {
    const double R = sys.r_end - sys.r_begin;
    if (!(eps > 0.0) || !(std::sqrt(eps) < kPi / (2.0 * R)))
        throw Error(ErrorKind::InvalidSpec, "eps_choice must satisfy sqrt(eps) < pi / (2R)");

    // lambda |q(r) g(u) u| <= eps u^2 for all r reduces to
    // lambda max|q| |g(u)| <= eps |u|.
    auto holds = [&](double u) {
        const double lhs = sys.lambda * sys.max_abs_weight * std::max(std::abs(sys.nonlinearity(u)), std::abs(sys.nonlinearity(-u)));
        return lhs <= eps * u;
    };

    const int count = 600;
    const double lo = sys.delta * 1e-12;
    double good = 0.0, bad = 0.0;
    for (int i = 0; i < count; ++i) {
        const double u = lo * std::pow(sys.delta / lo, static_cast<double>(i) / (count - 1));
        if (holds(u)) {
            good = u;
        } else {
            bad = u;
            break;
        }
    }
    if (good == 0.0) throw Error(ErrorKind::NotSuperlinear, "lambda |q g(u)| <= eps |u| fails arbitrarily close to 0");

    EtaStarEstimate est;
    if (bad == 0.0) {
        est.eta_hat = good;
    } else {
        for (int it = 0; it < 200 && bad - good > 1e-13 * good; ++it) {
            const double m = 0.5 * (good + bad);
            (holds(m) ? good : bad) = m;
        }
        est.eta_hat = good;
    }

    double eta = est.eta_hat;
    for (int it = 0; it < 80; ++it) {
        const auto traj = shoot_rk(sys, make_shot(sys, eta, settings));
        double max_u = 0.0;
        for (const auto& s : traj.samples) max_u = std::max(max_u, std::abs(s.u));
        if (max_u <= est.eta_hat) {
            est.eta_star = eta;
            return est;
        }
        eta *= 0.5;
    }
    throw Error(ErrorKind::NotSuperlinear, "no shot stays inside |u| <= eta_hat");
}

SolveResult solve(const TruncatedSystem& sys, const std::vector<int>& js, const SolverConfig& cfg) {
    SolveResult result;
    result.records = scan_eta(sys, cfg.grid.points(sys), cfg.shot);
    result.separator_pos = winding_argmax(result.records, 1);
    result.separator_neg = winding_argmax(result.records, -1);
    for (int j : js) {
        auto search = bracket_and_bisect(sys, result.records, target_for(sys, j), cfg);
        if (search.profiles.empty()) result.missing_targets.push_back(j);
        for (auto& p : search.profiles) result.profiles.push_back(std::move(p));
    }
    return result;
}

int nodal_count(const SweepEntry& entry, int k) {
    int n = 0;
    for (const auto& [key, count] : entry.counts) {
        const int j = std::get<2>(key);
        if (j >= 1 && j <= k) n += count;
    }
    return n;
}

SweepReport lambda_sweep(const ProblemSpec& base, const std::vector<double>& lambdas, int k_max,
                         const SolverConfig& cfg) {
    SweepReport report;
    std::vector<int> js;
    for (int j = 0; j <= k_max; ++j) js.push_back(j);

    for (double lambda : lambdas) {
        ProblemSpec spec = base;
        spec.lambda = lambda;
        const auto sys = build_truncation(spec);
        const auto res = solve(sys, js, cfg);

        SweepEntry entry;
        entry.lambda = lambda;
        for (const auto& p : res.profiles) {
            ++entry.counts[{p.sign_at_center, p.branch, p.j}];
            entry.max_j = std::max(entry.max_j, p.j);
        }
        for (const auto& r : res.records)
            if (!r.failed) entry.max_winding = std::max(entry.max_winding, r.winding);
        report.entries.push_back(std::move(entry));
    }

    for (int k = 1; k <= k_max; ++k) {
        std::optional<double> star;
        for (const auto& e : report.entries) {
            bool all = true;
            for (int j = 1; j <= k && all; ++j)
                for (int sign : {-1, 1})
                    for (Branch b : {Branch::Small, Branch::Large}) {
                        const auto it = e.counts.find({sign, b, j});
                        if (it == e.counts.end() || it->second == 0) all = false;
                    }
            if (all) {
                star = e.lambda;
                break;
            }
        }
        report.lambda_star[k] = star;
    }
    return report;
}

std::optional<double> no_rotation_threshold(const std::vector<ShotRecord>& records, int sign) {
    std::vector<const ShotRecord*> side;
    for (const auto& r : records)
        if (r.eta != 0.0 && (r.eta > 0.0) == (sign > 0)) side.push_back(&r);
    std::sort(side.begin(), side.end(), [](auto* a, auto* b) { return std::abs(a->eta) < std::abs(b->eta); });

    std::optional<double> threshold;
    for (auto it = side.rbegin(); it != side.rend(); ++it) {
        if ((*it)->failed || !((*it)->winding < kPi / 2)) break;
        threshold = std::abs((*it)->eta);
    }
    return threshold;
}

SingularLimitReport singular_limit_diagnostics(const ProblemSpec& base, const std::vector<double>& lambdas,
                                               const SolverConfig& cfg) {
    SingularLimitReport report;
    SolverConfig positive = cfg;
    positive.grid.mirror = false;

    for (double lambda : lambdas) {
        ProblemSpec spec = base;
        spec.lambda = lambda;
        const auto sys = build_truncation(spec);
        const auto records = scan_eta(sys, positive.grid.points(sys), positive.shot);
        auto search = bracket_and_bisect(sys, records, target_for(sys, 0), positive);

        const SolutionProfile* chosen = nullptr;
        for (const auto& p : search.profiles)
            if (p.branch == Branch::Large && p.eta > 0.0 && (!chosen || p.eta > chosen->eta)) chosen = &p;
        if (!chosen) throw Error(ErrorKind::NoBracket, "no positive large j = 0 solution at lambda = " + std::to_string(lambda));

        SingularLimitEntry e;
        e.lambda = lambda;
        e.eta = chosen->eta;
        const double R = sys.r_end;
        const auto& traj = chosen->trajectory;
        e.min_slope = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            const auto& s = traj.samples[i];
            e.cone_distance = std::max(e.cone_distance, std::abs(s.u - (R - s.r)));
            e.min_slope = std::min(e.min_slope, s.du);
            if (i + 1 < traj.samples.size()) {
                const double rm = 0.5 * (s.r + traj.samples[i + 1].r);
                e.cone_distance = std::max(e.cone_distance, std::abs(traj.at(rm).u - (R - rm)));
            }
        }
        e.center_slope = traj.samples.front().du;
        report.entries.push_back(e);
    }

    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        if (i > 0 && !(e.cone_distance < report.entries[i - 1].cone_distance)) report.distance_decreasing = false;
        if (!(e.min_slope > -1.0)) report.slopes_above_minus_one = false;
        if (e.center_slope != 0.0) report.center_flat = false;
    }
    return report;
}

}  // namespace minkshoot
