#include "minkshoot/rotation.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "minkshoot/error.hpp"
#include "minkshoot/phase.hpp"

namespace minkshoot {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kQuarter = kPi / 2;
constexpr double kEdgeStep = 1e-6;       // relative step for boundary slopes
constexpr double kBlowupFactor = 100.0;  // spirals beyond 100 delta are rejected

const char* fn_name(BoundPair::Fn w) {
    switch (w) {
        case BoundPair::A1: return "a1";
        case BoundPair::B1: return "b1";
        case BoundPair::A2: return "a2";
        case BoundPair::B2: return "b2";
    }
    return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

BoundPair::BoundPair(ScalarFn a1, ScalarFn b1, ScalarFn a2, ScalarFn b2, double delta)
    : fns_{std::move(a1), std::move(b1), std::move(a2), std::move(b2)}, delta_(delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorKind::InvalidSpec, "bound radius must be positive");
    const double h = kEdgeStep * delta;
    for (int w = 0; w < 4; ++w) {
        const auto& f = fns_[w];
        upper_[w].value = f(delta);
        upper_[w].slope = std::max(0.0, (f(delta) - f(delta - h)) / h);
        upper_[w].primitive = inner_primitive(static_cast<Fn>(w), delta);
        lower_[w].value = f(-delta);
        lower_[w].slope = std::max(0.0, (f(-delta + h) - f(-delta)) / h);
        lower_[w].primitive = inner_primitive(static_cast<Fn>(w), -delta);
    }
}

double BoundPair::operator()(Fn which, double s) const {
    if (s > delta_) return upper_[which].value + upper_[which].slope * (s - delta_);
    if (s < -delta_) return lower_[which].value + lower_[which].slope * (s + delta_);
    return fns_[which](s);
}

double BoundPair::inner_primitive(Fn which, double s) const {
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    if (s == 0.0) return 0.0;
    // Integrating over [0, 1] after scaling keeps the error estimate
    // relative for tiny s.
    const auto& f = fns_[which];
    auto g = [&f, s](double t) { return f(s * t); };
    return s * Quad::integrate(g, 0.0, 1.0, 10, 1e-12);
}

double BoundPair::primitive(Fn which, double s) const {
    if (s > delta_) {
        const double d = s - delta_;
        const auto& e = upper_[which];
        return e.primitive + e.value * d + 0.5 * e.slope * d * d;
    }
    if (s < -delta_) {
        const double d = s + delta_;
        const auto& e = lower_[which];
        return e.primitive + e.value * d + 0.5 * e.slope * d * d;
    }
    return inner_primitive(which, s);
}

void BoundPair::validate() const {
    std::vector<double> samples;
    for (int k = 1; k < 200; ++k) samples.push_back(delta_ * k / 200.0);
    for (int k = 3; k <= 12; ++k) samples.push_back(delta_ * std::pow(10.0, -k));
    for (double p : samples) {
        for (double s : {p, -p}) {
            const double a1 = (*this)(A1, s) * s, b1 = (*this)(B1, s) * s;
            const double a2 = (*this)(A2, s) * s, b2 = (*this)(B2, s) * s;
            auto fail = [&](const char* what) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "bound condition %s fails at s = %.6g", what, s);
                throw Error(ErrorKind::InvalidSpec, buf);
            };
            if (!(a1 > 0.0)) fail("a1(s) s > 0");
            if (!(b2 > 0.0)) fail("b2(s) s > 0");
            if (!(a1 <= b1 * (1 + 1e-12))) fail("a1(s) s <= b1(s) s");
            if (!(b2 <= a2 * (1 + 1e-12))) fail("b2(s) s <= a2(s) s");
        }
    }
    for (int w = 0; w < 4; ++w) {
        for (double side : {1.0, -1.0}) {
            double prev = primitive(static_cast<Fn>(w), side * delta_);
            const double first = prev;
            for (int k = 1; k <= 10; ++k) {
                const double cur = primitive(static_cast<Fn>(w), side * delta_ * std::ldexp(1.0, k));
                if (!(cur > prev)) {
                    throw Error(ErrorKind::InvalidSpec,
                                std::string("primitive of ") + fn_name(static_cast<Fn>(w)) + " is not increasing");
                }
                prev = cur;
            }
            if (!(prev > 10.0 * first))
                throw Error(ErrorKind::InvalidSpec,
                            std::string("primitive of ") + fn_name(static_cast<Fn>(w)) + " is not coercive");
        }
    }
}

std::string BoundPair::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double x) {
        const auto bits = std::bit_cast<std::uint64_t>(x);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(delta_);
    for (int w = 0; w < 4; ++w)
        for (int k = -32; k <= 32; ++k) mix(fns_[w](delta_ * k / 32.0));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double angular_speed_floor(const BoundPair& b, double x, double y) {
    // Written with direction cosines so that tiny radii do not underflow.
    const double r = std::hypot(x, y);
    const double c = x / r, s = y / r;
    const double tx = x == 0.0 ? 0.0 : b(BoundPair::B2, x) / x * c * c;
    const double ty = y == 0.0 ? 0.0 : b(BoundPair::A1, y) / y * s * s;
    return tx + ty;
}

namespace {

// Rate of the level curve of E_A (use_a) or E_B through (x, y).
double level_rate(const BoundPair& b, bool use_a, double x, double y) {
    const double fy = use_a ? b(BoundPair::A1, y) : b(BoundPair::B1, y);
    const double fx = use_a ? b(BoundPair::A2, x) : b(BoundPair::B2, x);
    return (fy * x - fx * y) / (fx * x + fy * y);
}

// Quadrant k covers theta in [k pi/2, (k+1) pi/2); xy >= 0 for odd k.
bool uses_a(SpiralSide side, long quadrant) {
    const bool xy_nonneg = (quadrant % 2) != 0;
    return side == SpiralSide::Inner ? xy_nonneg : !xy_nonneg;
}

long quadrant_of(double theta) { return static_cast<long>(std::floor(theta / kQuarter)); }

Spiral integrate_spiral(const BoundPair& b, SpiralSide side, double theta0, double rho0, double span, double tol) {
    Spiral sp;
    const double cap = kBlowupFactor * b.delta();
    ode::Options opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;

    double theta = theta0;
    double log_rho = std::log(rho0);
    const double theta_end = theta0 + span;
    long k = quadrant_of(theta0);

    auto rate_at = [&](bool a, double th, double lr) {
        const double rho = std::exp(lr);
        return level_rate(b, a, rho * std::cos(th), -rho * std::sin(th));
    };
    sp.theta.push_back(theta);
    sp.rho.push_back(rho0);
    sp.log_rate.push_back(rate_at(uses_a(side, k), theta, log_rho));

    while (theta < theta_end) {
        double stop = std::min(theta_end, (k + 1) * kQuarter);
        if (stop <= theta) {
            ++k;
            continue;
        }
        const bool a = uses_a(side, k);
        auto rhs = [&](double th, const ode::State<1>& y) { return ode::State<1>{rate_at(a, th, y[0])}; };
        auto on_step = [&](double th, const ode::State<1>& y, const ode::State<1>& dy) {
            const double rho = std::exp(y[0]);
            if (!std::isfinite(y[0]) || !(rho > 0.0) || rho > cap)
                throw Error(ErrorKind::SpiralBlowup, "spiral radius left (0, 100 delta]");
            sp.theta.push_back(th);
            sp.rho.push_back(rho);
            sp.log_rate.push_back(dy[0]);
        };
        ode::dopri5<1>(rhs, theta, ode::State<1>{log_rho}, stop, opt, on_step);
        theta = stop;
        log_rho = std::log(sp.rho.back());
        ++k;
    }
    return sp;
}

}  // namespace

double spiral_rate(const BoundPair& b, SpiralSide side, double x, double y) {
    const bool xy_nonneg = x * y >= 0.0;
    const bool a = side == SpiralSide::Inner ? xy_nonneg : !xy_nonneg;
    return level_rate(b, a, x, y);
}

double BoundPair::inverse_primitive(Fn which, double level, int sign) const {
    if (!(level > 0.0)) return 0.0;
    const double sg = sign < 0 ? -1.0 : 1.0;
    auto f = [&](double s) { return primitive(which, sg * s) - level; };
    double lo = delta_, hi = delta_;
    if (f(hi) < 0.0) {
        while (f(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi) || hi > 1e300) throw Error(ErrorKind::SpiralBlowup, "primitive is not coercive");
        }
    } else {
        while (f(lo) >= 0.0) {
            hi = lo;
            lo *= 0.5;
            if (lo == 0.0) return 0.0;
        }
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return sg * 0.5 * (r.first + r.second);
}

namespace {

int quadrant_sign_x(long k) {
    const long m = ((k % 4) + 4) % 4;
    return (m == 0 || m == 3) ? 1 : -1;
}

int quadrant_sign_y(long k) {
    const long m = ((k % 4) + 4) % 4;
    return m >= 2 ? 1 : -1;
}

double piece_energy(const BoundPair& b, bool use_a, double x, double y) {
    return use_a ? b.energy_a(x, y) : b.energy_b(x, y);
}

// Radius at angle th on the level curve of one piece, bracketed by the
// piece's rigorous radius bounds.
double piece_radius(const BoundPair& b, const Spiral::Piece& p, double th) {
    const double c = std::cos(th), s = std::sin(th);
    auto f = [&](double r) { return piece_energy(b, p.use_a, r * c, -r * s) - p.level; };
    double lo = p.rho_lower, hi = p.rho_upper;
    if (f(lo) >= 0.0) return lo;
    if (f(hi) <= 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

Spiral trace_one(const BoundPair& b, SpiralSide side, double theta0, double rho0, double span) {
    Spiral sp;
    sp.side = side;
    sp.bounds = &b;
    const double cap = kBlowupFactor * b.delta();
    const double end = theta0 + span;
    long k = quadrant_of(theta0);
    bool a = uses_a(side, k);
    double level = piece_energy(b, a, rho0 * std::cos(theta0), -rho0 * std::sin(theta0));
    sp.theta.push_back(theta0);
    sp.rho.push_back(rho0);

    for (;;) {
        Spiral::Piece p;
        p.quadrant = k;
        p.use_a = a;
        p.level = level;
        const auto fx = a ? BoundPair::A2 : BoundPair::B2;
        const auto fy = a ? BoundPair::A1 : BoundPair::B1;
        const int sx = quadrant_sign_x(k), sy = quadrant_sign_y(k);
        const double xe = std::abs(b.inverse_primitive(fx, level, sx));
        const double ye = std::abs(b.inverse_primitive(fy, level, sy));
        // Along the arc |x| and |y| trade off monotonically, and one of the
        // two primitives carries at least half of the level.
        p.rho_upper = std::hypot(xe, ye);
        p.extent = std::max(xe, ye);
        p.rho_lower = std::min(std::abs(b.inverse_primitive(fx, 0.5 * level, sx)),
                               std::abs(b.inverse_primitive(fy, 0.5 * level, sy)));
        if (!(p.rho_lower > 0.0) || !std::isfinite(p.rho_upper) || p.rho_upper > cap)
            throw Error(ErrorKind::SpiralBlowup, "spiral radius left (0, 100 delta]");
        sp.pieces.push_back(p);

        const double stop = (k + 1) * kQuarter;
        if (stop >= end) {
            sp.theta.push_back(end);
            sp.rho.push_back(piece_radius(b, p, end));
            break;
        }
        // Even quadrants end on the y-axis, odd ones on the x-axis.
        const bool on_y_axis = (k % 2) == 0;
        const double exit = on_y_axis ? ye : xe;
        if (stop > theta0) {
            sp.theta.push_back(stop);
            sp.rho.push_back(exit);
        }
        ++k;
        a = uses_a(side, k);
        level = on_y_axis ? b.primitive(a ? BoundPair::A1 : BoundPair::B1, sy * exit)
                          : b.primitive(a ? BoundPair::A2 : BoundPair::B2, sx * exit);
    }
    return sp;
}

const Spiral::Piece& piece_at(const Spiral& sp, double th) {
    const long idx = quadrant_of(th) - sp.pieces.front().quadrant;
    const long last = static_cast<long>(sp.pieces.size()) - 1;
    return sp.pieces[static_cast<std::size_t>(std::clamp(idx, 0L, last))];
}

}  // namespace

double Spiral::at(double th) const {
    if (!pieces.empty()) return piece_radius(*bounds, piece_at(*this, th), th);
    if (th <= theta.front()) return rho.front();
    if (th >= theta.back()) return rho.back();
    const auto it = std::upper_bound(theta.begin(), theta.end(), th);
    const std::size_t i = static_cast<std::size_t>(it - theta.begin());
    const double lr = ode::hermite(theta[i - 1], std::log(rho[i - 1]), log_rate[i - 1], theta[i], std::log(rho[i]),
                                   log_rate[i], th);
    return std::exp(lr);
}

double Spiral::energy_gap(double th, double x, double y) const {
    if (pieces.empty()) throw Error(ErrorKind::InvalidSpec, "energy_gap needs a level-traced spiral");
    const auto& p = piece_at(*this, th);
    return piece_energy(*bounds, p.use_a, x, y) - p.level;
}

double Spiral::min_rho() const {
    if (pieces.empty()) return *std::min_element(rho.begin(), rho.end());
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) m = std::min(m, p.rho_lower);
    return m;
}

double Spiral::max_rho() const {
    if (pieces.empty()) return *std::max_element(rho.begin(), rho.end());
    double m = 0.0;
    for (const auto& p : pieces) m = std::max(m, p.rho_upper);
    return m;
}

double Spiral::box_extent() const {
    if (pieces.empty()) return max_rho();
    double m = 0.0;
    for (const auto& p : pieces) m = std::max(m, p.extent);
    return m;
}

SpiralPair build_spirals(const BoundPair& bounds, double theta0, double rho0, double span, double tol) {
    if (!(rho0 > 0.0) || !(span >= 0.0)) throw Error(ErrorKind::InvalidSpec, "spiral needs rho0 > 0 and span >= 0");
    SpiralPair sp{integrate_spiral(bounds, SpiralSide::Inner, theta0, rho0, span, tol),
                  integrate_spiral(bounds, SpiralSide::Outer, theta0, rho0, span, tol)};
    sp.inner.side = SpiralSide::Inner;
    sp.outer.side = SpiralSide::Outer;
    sp.inner.bounds = sp.outer.bounds = &bounds;
    return sp;
}

SpiralPair trace_spirals(const BoundPair& bounds, double theta0, double rho0, double span) {
    if (!(rho0 > 0.0) || !(span >= 0.0)) throw Error(ErrorKind::InvalidSpec, "spiral needs rho0 > 0 and span >= 0");
    return {trace_one(bounds, SpiralSide::Inner, theta0, rho0, span),
            trace_one(bounds, SpiralSide::Outer, theta0, rho0, span)};
}

double level_set_radius(const BoundPair& bounds, SpiralSide side, double theta0, double rho0, double theta) {
    return trace_one(bounds, side, theta0, rho0, std::max(0.0, theta - theta0)).at(theta);
}

SpiralEstimate estimate_thresholds(const BoundPair& bounds, int j, const ThresholdOptions& opt) {
    if (j < 1) throw Error(ErrorKind::InvalidSpec, "rotation count j must be at least 1");
    const double delta = bounds.delta();
    SpiralEstimate est;
    est.j = j;
    est.span = opt.margin * j * kPi;

    double rho = opt.initial_fraction * delta;
    bool found = false;
    for (int h = 0; h <= opt.max_halvings && !found; ++h, rho *= 0.5) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        bool ok = true;
        for (int i = 0; i < opt.start_angles && ok; ++i) {
            const double th0 = 2.0 * kPi * i / opt.start_angles;
            try {
                const auto sp = trace_spirals(bounds, th0, rho, est.span);
                ok = sp.outer.box_extent() < delta;
                hi = std::max(hi, sp.outer.max_rho());
                lo = std::min(lo, sp.inner.min_rho());
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::SpiralBlowup) throw;
                ok = false;
            }
        }
        if (ok) {
            found = true;
            est.rho_star = rho;
            est.rho_min = lo;
            est.rho_max = hi;
        }
    }
    if (!found) throw Error(ErrorKind::BoxExceeded, "no starting radius keeps the outer spiral inside the bounds");

    // Radii are spaced geometrically: the annulus may span many decades.
    double omega = std::numeric_limits<double>::infinity();
    const double ratio = est.rho_max / est.rho_min;
    for (int k = 0; k < opt.radius_grid; ++k) {
        const double r = est.rho_min * std::pow(ratio, opt.radius_grid > 1 ? double(k) / (opt.radius_grid - 1) : 0.0);
        for (int i = 0; i < opt.angle_grid; ++i) {
            const double th = 2.0 * kPi * i / opt.angle_grid;
            omega = std::min(omega, angular_speed_floor(bounds, r * std::cos(th), -r * std::sin(th)));
        }
    }
    if (!(omega > 0.0)) throw Error(ErrorKind::BoxExceeded, "angular speed floor vanishes on the annulus");
    est.omega_min = omega;
    est.tau_star = opt.margin * j * kPi / omega;
    est.spirals = trace_spirals(bounds, 0.0, est.rho_star, est.span);
    return est;
}

nlohmann::json certificate_json(const SpiralEstimate& e, const BoundPair& bounds) {
    return {{"j", e.j}, {"tau_star", e.tau_star}, {"rho_star", e.rho_star}, {"bounds_hash", bounds.hash()}};
}

double SqueezedSystem::Piece::eval(double t) const {
    return std::clamp(mean + amplitude * std::sin(frequency * t + phase), 0.0, 1.0);
}

SqueezedSystem::SqueezedSystem(const BoundPair& bounds, double horizon, std::uint64_t seed) : bounds_(&bounds) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int pieces = 3 + static_cast<int>(rng() % 6);
    for (int i = 1; i < pieces; ++i) knots_.push_back(horizon * unit(rng));
    std::sort(knots_.begin(), knots_.end());
    auto draw = [&] {
        Piece p;
        p.mean = 0.1 + 0.8 * unit(rng);
        p.amplitude = std::min(p.mean, 1.0 - p.mean) * 1.5 * unit(rng);  // may saturate at 0 or 1
        p.frequency = 2.0 * kPi * (1.0 + 39.0 * unit(rng)) / horizon;
        p.phase = 2.0 * kPi * unit(rng);
        return p;
    };
    for (int i = 0; i < pieces; ++i) {
        alpha_.push_back(draw());
        beta_.push_back(draw());
    }
}

std::size_t SqueezedSystem::piece(double t) const {
    return static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
}

double SqueezedSystem::alpha(double t) const { return alpha_[piece(t)].eval(t); }
double SqueezedSystem::beta(double t) const { return beta_[piece(t)].eval(t); }

double SqueezedSystem::X(double t, double y) const {
    const double lo = (*bounds_)(BoundPair::A1, y), hi = (*bounds_)(BoundPair::B1, y);
    return lo + alpha(t) * (hi - lo);
}

double SqueezedSystem::Y(double t, double x) const {
    const double lo = (*bounds_)(BoundPair::B2, x), hi = (*bounds_)(BoundPair::A2, x);
    return lo + beta(t) * (hi - lo);
}

PlanarField SqueezedSystem::field() const {
    return [this](double t, double x, double y) { return std::array<double, 2>{X(t, y), -Y(t, x)}; };
}

RotationValidation validate_rotation(const BoundPair& bounds, int j, int count, std::uint64_t seed,
                                     const ThresholdOptions& options) {
    RotationValidation out;
    out.j = j;
    out.estimate = estimate_thresholds(bounds, j, options);
    const auto& est = out.estimate;
    const double horizon = est.tau_star * (1.0 + 1e-6);
    out.runs.resize(static_cast<std::size_t>(count));

#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < count; ++i) {
        SqueezedRun& run = out.runs[static_cast<std::size_t>(i)];
        run.seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1));
        std::mt19937_64 rng(splitmix64(run.seed));
        run.start_angle = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
        const SqueezedSystem sys(bounds, horizon, run.seed);
        ode::Options opt;
        opt.abs_tol = 1e-10 * est.rho_min;
        opt.rel_tol = 1e-10;
        try {
            const auto path = integrate_planar(sys.field(), 0.0, horizon, est.rho_star * std::cos(run.start_angle),
                                               -est.rho_star * std::sin(run.start_angle), 1.0, opt,
                                               sys.breakpoints(), 1e-6 * est.rho_star);
            run.winding = path.winding();
            run.min_radius = path.min_radius();
            // Energies grow radially, so comparing energies against the
            // spiral levels is comparing radii at equal angles.
            const auto sp = trace_spirals(bounds, run.start_angle, est.rho_star, est.span);
            const double th0 = path.samples.front().theta;
            for (const auto& s : path.samples) {
                const double d = s.theta - th0;
                if (d > est.span) break;
                const double ang = run.start_angle + d;
                const double gi = sp.inner.energy_gap(ang, s.x, s.y);
                const double go = sp.outer.energy_gap(ang, s.x, s.y);
                const double li = piece_at(sp.inner, ang).level, lo = piece_at(sp.outer, ang).level;
                if (gi < -1e-6 * li || go > 1e-6 * lo) run.spiral_ok = false;
            }
        } catch (const Error& e) {
            run.failed = true;
            run.error = e.what();
        }
    }

    for (const auto& run : out.runs) {
        if (run.failed || !(run.winding > j * kPi)) out.all_rotate = false;
        if (run.failed || !(run.min_radius > 1e-6 * est.rho_star)) out.origin_clear = false;
        if (run.failed || !run.spiral_ok) out.spirals_hold = false;
    }
    return out;
}

EnergyReport verify_energy_monotonicity(const BoundPair& b, const PlanarPath& path, double rel_tol) {
    EnergyReport rep;
    const auto& s = path.samples;
    auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
    std::vector<double> ea(s.size()), eb(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        ea[i] = b.energy_a(s[i].x, s[i].y);
        eb[i] = b.energy_b(s[i].x, s[i].y);
    }
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const int s0 = sgn(s[i].x * s[i].y), s1 = sgn(s[i + 1].x * s[i + 1].y);
        if (s0 != 0 && s1 != 0 && s0 != s1) continue;
        const int side = s0 != 0 ? s0 : s1;
        if (side == 0) continue;
        auto check = [&](const std::vector<double>& e, int dir, int& segments, int& violations) {
            // dir = +1: must not decrease, -1: must not increase
            const double tol = rel_tol * std::max(std::abs(e[i]), std::abs(e[i + 1]));
            const double wrong = -dir * (e[i + 1] - e[i]);
            ++segments;
            if (wrong > tol) {
                ++violations;
                const double scale = std::max(std::abs(e[i]), std::abs(e[i + 1]));
                rep.worst_excess = std::max(rep.worst_excess, scale > 0.0 ? wrong / scale : wrong);
            }
        };
        check(ea, side, rep.segments_a, rep.violations_a);
        check(eb, -side, rep.segments_b, rep.violations_b);
    }
    return rep;
}

BoundPair radial_rotation_bounds(const TruncatedSystem& sys, double r_lo, double r_hi, double delta) {
    if (!(r_lo > 0.0) || !(r_lo < r_hi) || r_hi > sys.r_end)
        throw Error(ErrorKind::InvalidSpec, "need 0 < r_lo < r_hi <= R");
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) m = std::min(m, sys.weight(r_lo + (r_hi - r_lo) * i / 2000.0));
    double q_plus = 0.0;
    for (int i = 0; i <= 2000; ++i)
        q_plus = std::max(q_plus, sys.weight(sys.r_begin + (sys.r_end - sys.r_begin) * i / 2000.0));
    if (!(m > 0.0)) throw Error(ErrorKind::InvalidSpec, "weight must be positive on [r_lo, r_hi]");

    const int nm1 = sys.dimension - 1;
    const double p_lo = std::pow(r_lo, nm1), p_hi = std::pow(r_hi, nm1);
    const double slope = sys.slope_at_gamma;
    const ScalarFn g = sys.nonlinearity;
    return BoundPair([=](double s) { return s / (slope * p_hi); }, [=](double s) { return s / p_lo; },
                     [=](double s) { return q_plus * p_hi * g(s); }, [=](double s) { return m * p_lo * g(s); },
                     delta);
}

double lambda_star_from_tau(double tau_star, double r_lo, double r_hi) {
    const double q = tau_star / (r_hi - r_lo);
    return q * q;
}

double log10_lambda_star_from_tau(double tau_star, double r_lo, double r_hi) {
    return 2.0 * (std::log10(tau_star) - std::log10(r_hi - r_lo));
}

PlanarPath rescale_trajectory(const Trajectory& traj, double r_lo, double r_hi) {
    PlanarPath path;
    const double sl = std::sqrt(traj.lambda);
    auto push = [&](double r, double u, double v, double du, double dv) {
        path.samples.push_back({sl * r, u, v / sl, du / sl, dv / traj.lambda, 0.0});
    };
    const auto first = traj.at(r_lo);
    push(r_lo, first.u, first.v, first.du, first.dv);
    for (const auto& s : traj.samples)
        if (s.r > r_lo && s.r < r_hi) push(s.r, s.u, s.v, s.du, s.dv);
    const auto last = traj.at(r_hi);
    push(r_hi, last.u, last.v, last.du, last.dv);

    double angle = scaled_angle(path.samples.front().x, path.samples.front().y, 1.0);
    double theta = angle;
    for (auto& s : path.samples) {
        const double a = scaled_angle(s.x, s.y, 1.0);
        theta += principal_increment(angle, a);
        angle = a;
        s.theta = theta;
    }
    return path;
}

}  // namespace minkshoot
