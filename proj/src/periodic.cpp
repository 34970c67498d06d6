#include "minkshoot/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minkshoot/error.hpp"
#include "minkshoot/expr.hpp"

namespace minkshoot {

namespace {
constexpr double kPi = std::numbers::pi;

ode::Options map_options(const MapSettings& s) {
    ode::Options opt;
    opt.abs_tol = s.abs_tol;
    opt.rel_tol = s.rel_tol;
    return opt;
}

}  // namespace

void validate(const PeriodicSpec& spec) {
    auto invalid = [](const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); };
    if (!(spec.period > 0.0) || !std::isfinite(spec.period)) invalid("period must be positive");
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) invalid("lambda must be positive");
    if (!(spec.strip > 0.0)) invalid("strip half-width must be positive");
    if (!(spec.delta > 0.0)) invalid("delta must be positive");
    if (!spec.weight || !spec.nonlinearity) invalid("weight q and nonlinearity g are required");
    const double q0 = spec.weight(0.0), qT = spec.weight(spec.period);
    if (!std::isfinite(q0) || !std::isfinite(qT)) throw Error(ErrorKind::NonFiniteWeight, "q is not finite");
    if (std::abs(q0 - qT) > 1e-9 * std::max(1.0, std::abs(q0))) invalid("q(0) and q(T) differ");
    if (spec.nonlinearity(0.0) != 0.0) invalid("g(0) must vanish");
    for (int i = 1; i <= 200; ++i) {
        for (double x : {spec.delta * i / 201.0, spec.delta * std::pow(10.0, -9.0 * i / 200.0)}) {
            if (!(spec.nonlinearity(x) * x > 0.0) || !(spec.nonlinearity(-x) * -x > 0.0))
                invalid("g(u) u > 0 fails at |u| = " + std::to_string(x));
        }
    }
}

PeriodicSpec make_periodic(double period, std::string_view q, std::string_view g, double lambda, double delta,
                           double strip) {
    PeriodicSpec spec;
    spec.period = period;
    auto qe = Expression::parse(q, {"t", "r"});
    auto ge = Expression::parse(g, {"u"});
    spec.weight = [qe](double t) { return qe(t); };
    spec.nonlinearity = [ge](double u) { return ge(u); };
    spec.weight_source = std::string(q);
    spec.nonlinearity_source = std::string(g);
    spec.lambda = lambda;
    spec.delta = delta;
    spec.strip = strip;
    validate(spec);
    return spec;
}

PeriodicSpec periodic_from_json(const nlohmann::json& doc) {
    try {
        return make_periodic(doc.at("period").get<double>(), doc.at("q").get<std::string>(),
                             doc.at("g").get<std::string>(), doc.at("lambda").get<double>(),
                             doc.value("delta", 1.0), doc.value("strip", 10.0));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidSpec, std::string("periodic problem: ") + e.what());
    }
}

nlohmann::json periodic_to_json(const PeriodicSpec& spec) {
    return {{"period", spec.period}, {"q", spec.weight_source}, {"g", spec.nonlinearity_source},
            {"lambda", spec.lambda}, {"delta", spec.delta},      {"strip", spec.strip}};
}

PeriodicSystem build_periodic(const PeriodicSpec& spec) {
    validate(spec);
    PeriodicSystem ps;
    ps.spec = spec;
    ps.truncation =
        build_truncation(1, spec.lambda, spec.strip, 0.0, spec.period, spec.period, spec.weight, spec.nonlinearity);
    ps.truncation.ball = false;
    ps.truncation.delta = spec.delta;
    return ps;
}

PlanarField PeriodicSystem::field() const {
    const TruncatedSystem* sys = &truncation;
    return [sys](double t, double u, double v) {
        return std::array<double, 2>{sys->phi_inverse(v), -sys->lambda * sys->force(t, u)};
    };
}

PlanarPath periodic_path(const PeriodicSystem& ps, double u0, double v0, const MapSettings& settings) {
    const double scale = std::sqrt(ps.spec.lambda);
    if (u0 == 0.0 && v0 == 0.0) {
        PlanarPath p;
        p.angle_scale = scale;
        p.samples.push_back({0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
        p.samples.push_back({ps.spec.period, 0.0, 0.0, 0.0, 0.0, 0.0});
        return p;
    }
    return integrate_planar(ps.field(), 0.0, ps.spec.period, u0, v0, scale, map_options(settings));
}

ReturnMapSample poincare_map(const PeriodicSystem& ps, double u0, double v0, const MapSettings& settings) {
    const auto path = periodic_path(ps, u0, v0, settings);
    ReturnMapSample s;
    s.u0 = u0;
    s.v0 = v0;
    s.u1 = path.samples.back().x;
    s.v1 = path.samples.back().y;
    s.winding = path.winding();
    return s;
}

std::vector<double> default_twist_radii(const PeriodicSystem& ps, int count) {
    const auto& sys = ps.truncation;
    // Beyond this radius either u starts outside the strip for longer than a
    // period or v exceeds what the force can reverse within one period.
    const double far = 10.0 * (sys.flux_cap + sys.strip + sys.ramp_width + ps.spec.period);
    const double near = 1e-3;
    std::vector<double> r(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) r[static_cast<std::size_t>(i)] = near * std::pow(far / near, double(i) / (count - 1));
    return r;
}

TwistReport verify_twist(const PeriodicSystem& ps, int k, const std::vector<double>& radii, int angles,
                         const MapSettings& settings) {
    if (k < 1) throw Error(ErrorKind::InvalidSpec, "twist order k must be at least 1");
    if (radii.size() < 3) throw Error(ErrorKind::InvalidSpec, "twist check needs at least three radii");
    TwistReport rep;
    rep.k = k;
    const auto nr = static_cast<long>(radii.size());
    const long total = nr * angles;
    std::vector<double> w(static_cast<std::size_t>(total));

#pragma omp parallel for schedule(dynamic, 4)
    for (long idx = 0; idx < total; ++idx) {
        const double rho = radii[static_cast<std::size_t>(idx / angles)];
        const double a = 2.0 * kPi * static_cast<double>(idx % angles) / angles;
        w[static_cast<std::size_t>(idx)] = poincare_map(ps, rho * std::cos(a), -rho * std::sin(a), settings).winding;
    }

    for (long i = 0; i < nr; ++i) {
        CircleWinding c;
        c.radius = radii[static_cast<std::size_t>(i)];
        const auto first = w.begin() + i * angles;
        c.min_winding = *std::min_element(first, first + angles);
        c.max_winding = *std::max_element(first, first + angles);
        rep.circles.push_back(c);
        if (i > 0)
            for (int a = 0; a < angles; ++a)
                rep.max_adjacent_jump = std::max(rep.max_adjacent_jump,
                                                 std::abs(w[static_cast<std::size_t>(i * angles + a)] -
                                                          w[static_cast<std::size_t>((i - 1) * angles + a)]));
    }
    rep.inner_slow = rep.circles.front().max_winding < 2.0 * kPi;
    rep.outer_slow = rep.circles.back().max_winding < 2.0 * kPi;
    for (std::size_t i = 1; i + 1 < rep.circles.size(); ++i) {
        if (rep.circles[i].min_winding > 2.0 * kPi * k) {
            rep.witness_radius = rep.circles[i].radius;
            break;
        }
    }
    return rep;
}

namespace {

struct Residual {
    double fu, fv, winding;
};

Residual map_residual(const PeriodicSystem& ps, double u, double v, const MapSettings& s) {
    const auto m = poincare_map(ps, u, v, s);
    return {m.u1 - u, m.v1 - v, m.winding};
}

// Levenberg-Marquardt on F(z) = P(z) - z. The fixed-point set may be a
// curve, so the Jacobian is allowed to be singular.
std::optional<std::array<double, 2>> refine(const PeriodicSystem& ps, double u, double v,
                                            const FixedPointOptions& opt) {
    Residual f = map_residual(ps, u, v, opt.map);
    double norm = std::hypot(f.fu, f.fv);
    double mu = 1e-3;
    for (int it = 0; it < opt.max_iterations && norm >= 0.1 * opt.residual_tol; ++it) {
        const double hu = 1e-6 * std::max(1.0, std::abs(u));
        const double hv = 1e-6 * std::max(1.0, std::abs(v));
        const auto pu = map_residual(ps, u + hu, v, opt.map), mu_ = map_residual(ps, u - hu, v, opt.map);
        const auto pv = map_residual(ps, u, v + hv, opt.map), mv = map_residual(ps, u, v - hv, opt.map);
        const double j11 = (pu.fu - mu_.fu) / (2 * hu), j21 = (pu.fv - mu_.fv) / (2 * hu);
        const double j12 = (pv.fu - mv.fu) / (2 * hv), j22 = (pv.fv - mv.fv) / (2 * hv);
        // Normal equations (J^T J + mu diag) d = -J^T F.
        const double a11 = j11 * j11 + j21 * j21, a12 = j11 * j12 + j21 * j22, a22 = j12 * j12 + j22 * j22;
        const double g1 = j11 * f.fu + j21 * f.fv, g2 = j12 * f.fu + j22 * f.fv;
        bool improved = false;
        for (int tries = 0; tries < 20 && !improved; ++tries) {
            const double b11 = a11 + mu * std::max(a11, 1e-12), b22 = a22 + mu * std::max(a22, 1e-12);
            const double det = b11 * b22 - a12 * a12;
            if (!(std::abs(det) > 0.0)) {
                mu *= 10.0;
                continue;
            }
            const double du = -(b22 * g1 - a12 * g2) / det;
            const double dv = -(b11 * g2 - a12 * g1) / det;
            const double nu = u + du, nv = v + dv;
            if (nu == 0.0 && nv == 0.0) {
                mu *= 10.0;
                continue;
            }
            const auto nf = map_residual(ps, nu, nv, opt.map);
            const double nn = std::hypot(nf.fu, nf.fv);
            if (nn < norm) {
                u = nu;
                v = nv;
                f = nf;
                norm = nn;
                mu = std::max(mu / 3.0, 1e-12);
                improved = true;
            } else {
                mu *= 10.0;
            }
        }
        if (!improved) break;
    }
    if (!(norm < opt.residual_tol)) return std::nullopt;
    return std::array<double, 2>{u, v};
}

}  // namespace

FixedPointSearch find_periodic(const PeriodicSystem& ps, int j, double rho_inner, double rho_outer,
                               const FixedPointOptions& opt) {
    if (j < 1) throw Error(ErrorKind::InvalidSpec, "rotation class j must be at least 1");
    if (!(rho_inner > 0.0 && rho_inner < rho_outer)) throw Error(ErrorKind::InvalidSpec, "need 0 < rho_inner < rho_outer");
    const double target = 2.0 * kPi * j;

    struct Seed {
        double u, v, miss;
    };
    const long total = static_cast<long>(opt.seed_radii) * opt.seed_angles;
    std::vector<Seed> seeds(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 4)
    for (long idx = 0; idx < total; ++idx) {
        const long ir = idx / opt.seed_angles, ia = idx % opt.seed_angles;
        const double s = opt.seed_radii > 1 ? double(ir) / (opt.seed_radii - 1) : 0.0;
        const double rho = rho_inner * std::pow(rho_outer / rho_inner, s);
        const double a = 2.0 * kPi * (ia + 0.5) / opt.seed_angles;
        const double u = rho * std::cos(a), v = -rho * std::sin(a);
        seeds[static_cast<std::size_t>(idx)] = {u, v, std::abs(poincare_map(ps, u, v, opt.map).winding - target)};
    }
    std::vector<Seed> chosen;
    for (const auto& s : seeds)
        if (s.miss < kPi) chosen.push_back(s);
    std::stable_sort(chosen.begin(), chosen.end(), [](const Seed& a, const Seed& b) { return a.miss < b.miss; });
    if (chosen.size() > static_cast<std::size_t>(opt.max_seeds)) chosen.resize(static_cast<std::size_t>(opt.max_seeds));

    std::vector<std::optional<PeriodicSolution>> found(chosen.size());
    std::vector<char> rejected(chosen.size(), 0);
    const auto n = static_cast<long>(chosen.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto z = refine(ps, chosen[idx].u, chosen[idx].v, opt);
        if (!z) continue;
        PeriodicSolution sol;
        sol.u0 = (*z)[0];
        sol.v0 = (*z)[1];
        sol.path = periodic_path(ps, sol.u0, sol.v0, opt.map);
        const auto& end = sol.path.samples.back();
        sol.residual = std::hypot(end.x - sol.u0, end.y - sol.v0);
        sol.winding = sol.path.winding();
        for (const auto& s : sol.path.samples) {
            sol.max_abs_u = std::max(sol.max_abs_u, std::abs(s.x));
            sol.max_abs_slope = std::max(sol.max_abs_slope, std::abs(s.dx));
        }
        const bool ok = sol.residual < opt.residual_tol && std::abs(sol.winding - target) < opt.winding_tol &&
                        sol.max_abs_u < ps.spec.strip && sol.max_abs_slope < 1.0;
        if (ok)
            found[idx] = std::move(sol);
        else
            rejected[idx] = 1;
    }

    FixedPointSearch out;
    out.seeds_tried = static_cast<int>(chosen.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        out.rejected += rejected[i];
        if (!found[i]) continue;
        const auto& s = *found[i];
        const bool dup = std::any_of(out.solutions.begin(), out.solutions.end(), [&](const PeriodicSolution& o) {
            return std::hypot(o.u0 - s.u0, o.v0 - s.v0) < opt.dedupe_distance * (1.0 + std::hypot(s.u0, s.v0));
        });
        if (!dup) out.solutions.push_back(std::move(*found[i]));
    }
    return out;
}

double area_distortion(const PeriodicSystem& ps, const std::array<std::array<double, 2>, 3>& tri, int per_edge,
                       const MapSettings& settings) {
    auto signed_area = [](const std::vector<std::array<double, 2>>& poly) {
        double a = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto& p = poly[i];
            const auto& q = poly[(i + 1) % poly.size()];
            a += p[0] * q[1] - q[0] * p[1];
        }
        return 0.5 * a;
    };
    // Sample at 2n points per edge; the n-point polygon is every other vertex.
    const int fine = 2 * per_edge;
    std::vector<std::array<double, 2>> boundary;
    for (int e = 0; e < 3; ++e) {
        const auto& a = tri[static_cast<std::size_t>(e)];
        const auto& b = tri[static_cast<std::size_t>((e + 1) % 3)];
        for (int i = 0; i < fine; ++i) {
            const double s = double(i) / fine;
            boundary.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])});
        }
    }
    std::vector<std::array<double, 2>> image(boundary.size());
    const auto n = static_cast<long>(boundary.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const auto& p = boundary[static_cast<std::size_t>(i)];
        const auto m = poincare_map(ps, p[0], p[1], settings);
        image[static_cast<std::size_t>(i)] = {m.u1, m.v1};
    }
    std::vector<std::array<double, 2>> coarse;
    for (std::size_t i = 0; i < image.size(); i += 2) coarse.push_back(image[i]);
    // Polygon area converges quadratically in the edge sampling.
    const double mapped = (4.0 * signed_area(image) - signed_area(coarse)) / 3.0;
    const std::vector<std::array<double, 2>> original(tri.begin(), tri.end());
    return std::abs(mapped / signed_area(original) - 1.0);
}

}  // namespace minkshoot
