#include "minkshoot/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>
#include <numbers>

#include "minkshoot/error.hpp"
#include "minkshoot/expr.hpp"
#include "minkshoot/io.hpp"
#include "minkshoot/periodic.hpp"

namespace minkshoot::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using io::number;

namespace {

constexpr double kPi = std::numbers::pi;

const json& section(const RunConfig& cfg, const char* name) {
    static const json empty = json::object();
    if (!cfg.doc.contains(name)) return empty;
    const json& s = cfg.doc.at(name);
    if (!s.is_object()) throw Error(ErrorKind::ConfigError, std::string("'") + name + "' must be an object");
    return s;
}

template <class T>
T value(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("key '") + key + "': " + e.what());
    }
}

double positive(const json& obj, const char* key, double fallback) {
    const double v = value(obj, key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::ConfigError, std::string("'") + key + "' must be positive");
    return v;
}

std::vector<double> positive_list(const json& obj, const char* key, std::vector<double> fallback) {
    auto v = value(obj, key, fallback);
    if (v.empty()) throw Error(ErrorKind::ConfigError, std::string("'") + key + "' must not be empty");
    for (double x : v)
        if (!(x > 0.0)) throw Error(ErrorKind::ConfigError, std::string("'") + key + "' entries must be positive");
    return v;
}

std::string iso_time(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sign_name(int sign) { return sign > 0 ? "pos" : "neg"; }

// ---- plots ---------------------------------------------------------------

void write_solution_plots(const fs::path& out, const json& solutions) {
    std::map<int, io::Figure> figures;
    for (const auto& p : solutions.at("profiles")) {
        const int j = p.at("j").get<int>();
        auto& fig = figures[j];
        fig.title = "nodal class j = " + std::to_string(j) + ", lambda = " +
                    io::format15(solutions.at("problem").at("lambda").get<double>());
        fig.x_label = "r";
        fig.y_label = "u(r)";
        auto c = io::curve_from_csv(out / p.at("csv_path").get<std::string>());
        const std::string branch = p.at("branch").get<std::string>();
        const int sign = p.at("sign").get<int>();
        char label[96];
        std::snprintf(label, sizeof label, "eta=%.6g j=%d %s", p.at("eta").get<double>(), j, branch.c_str());
        c.label = label;
        c.color = branch == "small" ? (sign > 0 ? "#1f77b4" : "#17becf") : (sign > 0 ? "#d62728" : "#ff7f0e");
        c.dashed = sign < 0;
        fig.curves.push_back(std::move(c));
    }
    for (const auto& [j, fig] : figures) io::write_text(out / ("profiles_j" + std::to_string(j) + ".svg"), io::render_svg(fig));
}

void write_twist_plot(const fs::path& out, const json& periodic) {
    io::Figure fig;
    fig.title = "return-map winding / pi on circles";
    fig.x_label = "log10 radius";
    fig.y_label = "winding / pi";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
    std::size_t k = 0;
    for (const auto& t : periodic.at("twist")) {
        io::Curve lo, hi;
        for (const auto& c : t.at("circles")) {
            const double x = std::log10(c.at("radius").get<double>());
            lo.x.push_back(x);
            hi.x.push_back(x);
            lo.y.push_back(c.at("min_winding").get<double>() / kPi);
            hi.y.push_back(c.at("max_winding").get<double>() / kPi);
        }
        const std::string lam = io::format15(t.at("lambda").get<double>());
        lo.label = "min, lambda=" + lam;
        hi.label = "max, lambda=" + lam;
        lo.color = hi.color = colors[k++ % 8];
        lo.dashed = true;
        fig.curves.push_back(std::move(lo));
        fig.curves.push_back(std::move(hi));
    }
    io::write_text(out / "twist.svg", io::render_svg(fig));
}

// ---- validation battery -----------------------------------------------------

struct Collected {
    std::vector<Trajectory> trajectories;
};

json oracle_battery(const TruncatedSystem& sys, const json& opt, const ShotSettings& shot, Collected& pool,
                    bool& pass) {
    const int shots = value(opt, "shots", 20);
    const double eta_min = positive(opt, "eta_min", 1e-3);
    const double eta_max = positive(opt, "eta_max", sys.strip + 1.0);
    const double threshold = positive(opt, "threshold", 1e-6);
    PicardOptions popt;
    popt.panels = value(opt, "panels", 65536);
    popt.max_iter = value(opt, "max_iter", 20000);
    ShotSettings pset = shot;
    pset.abs_tol = positive(opt, "picard_tol", 1e-9);
    if (shots < 2) throw Error(ErrorKind::ConfigError, "oracle.shots must be at least 2");

    const double L = picard_constant(sys);
    struct Row {
        double eta = 0, du = 0, dv = 0, worst_log_ratio = -INFINITY;
        int iterations = 0;
        bool dominated = true, ok = false;
        std::string error;
        Trajectory rk, picard;
    };
    std::vector<Row> rows(static_cast<std::size_t>(shots));
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < shots; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.eta = eta_min * std::pow(eta_max / eta_min, double(i) / (shots - 1));
        try {
            row.rk = shoot_rk(sys, make_shot(sys, row.eta, shot));
            auto pr = picard_solve(sys, make_shot(sys, row.eta, pset), popt);
            const auto d = sup_distance(row.rk, pr.trajectory, 0.0, sys.r_end);
            row.du = d.u;
            row.dv = d.v;
            row.iterations = pr.iterations;
            const double d0 = pr.distances.front();
            for (std::size_t k = 1; k < pr.distances.size() && d0 > 0.0; ++k) {
                const double lr = std::log(pr.distances[k] / d0) - picard_log_bound(L, sys.r_end, static_cast<int>(k));
                row.worst_log_ratio = std::max(row.worst_log_ratio, lr);
                if (lr > 0.0) row.dominated = false;
            }
            row.picard = std::move(pr.trajectory);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }

    json list = json::array();
    double worst_u = 0.0;
    bool all = true;
    for (auto& row : rows) {
        json r = {{"eta", number(row.eta)},           {"sup_u", number(row.du)},
                  {"sup_v", number(row.dv)},          {"iterations", row.iterations},
                  {"bound_dominated", row.dominated}, {"worst_log_ratio", number(row.worst_log_ratio)}};
        if (!row.ok) r["error"] = row.error;
        list.push_back(r);
        all = all && row.ok && row.dominated && row.du < threshold;
        worst_u = std::max(worst_u, row.du);
        if (row.ok) {
            pool.trajectories.push_back(std::move(row.rk));
            pool.trajectories.push_back(std::move(row.picard));
        }
    }
    pass = all;
    return {{"passed", all},
            {"threshold", number(threshold)},
            {"panels", popt.panels},
            {"lipschitz_constant", number(L)},
            {"worst_sup_u", number(worst_u)},
            {"shots", list}};
}

json small_lemma(const TruncatedSystem& sys, const json& opt, const ShotSettings& shot, Collected& pool, bool& pass) {
    const double eps = value(opt, "eps_choice", default_eps_choice(sys));
    const int points = value(opt, "points", 200);
    const auto est = estimate_eta_star_small(sys, eps, shot);
    const double lo = 1e-6 * sys.r_end;
    std::vector<double> etas;
    for (int i = 0; i < points; ++i) etas.push_back(lo * std::pow(est.eta_star / lo, double(i) / (points - 1)));

    std::vector<Trajectory> trajs(etas.size());
    std::vector<ShotRecord> recs(etas.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < static_cast<long>(etas.size()); ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            trajs[k] = shoot_rk(sys, make_shot(sys, etas[k], shot));
            recs[k] = make_record(sys, trajs[k]);
        } catch (const std::exception& e) {
            recs[k].eta = etas[k];
            recs[k].failed = true;
            recs[k].error = e.what();
        }
    }
    int violations = 0;
    double max_winding = 0.0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        if (recs[k].failed || !(recs[k].winding < kPi / 2)) ++violations;
        if (!recs[k].failed) {
            max_winding = std::max(max_winding, recs[k].winding);
            pool.trajectories.push_back(std::move(trajs[k]));
        }
    }
    pass = violations == 0 && points >= 100;
    return {{"passed", pass},           {"eps_choice", number(eps)},
            {"eta_hat", number(est.eta_hat)}, {"eta_star", number(est.eta_star)},
            {"points", points},         {"violations", violations},
            {"max_winding_over_pi", number(max_winding / kPi)}};
}

json angular_check(const Collected& pool, double lambda, bool& pass) {
    const auto n = static_cast<long>(pool.trajectories.size());
    std::vector<AngularLemmaReport> reps(static_cast<std::size_t>(n));
    std::vector<char> errors(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            const auto& t = pool.trajectories[k];
            reps[k] = verify_angular_lemmas(t, lift_angle(t, lambda));
        } catch (const std::exception&) {
            errors[k] = 1;
        }
    }
    int failures = 0, crossings = 0;
    double min_pair = INFINITY, min_cross = INFINITY;
    for (std::size_t k = 0; k < reps.size(); ++k) {
        if (errors[k] || !reps[k].passed()) ++failures;
        if (errors[k]) continue;
        min_pair = std::min(min_pair, reps[k].min_pair_increment);
        crossings += reps[k].crossings;
        if (reps[k].crossings > 0) min_cross = std::min(min_cross, reps[k].min_crossing_increment);
    }
    pass = failures == 0;
    return {{"passed", pass},
            {"trajectories", n},
            {"failures", failures},
            {"min_pair_increment_over_pi", number(min_pair / kPi)},
            {"zero_crossings", crossings},
            {"min_crossing_increment", number(min_cross)}};
}

json energy_check(const TruncatedSystem& sys, const json& opt, const ShotSettings& shot, bool& pass) {
    const double eta = positive(opt, "eta", 0.5);
    const double r_lo = positive(opt, "r_lo", 0.25 * sys.r_end);
    const double r_hi = positive(opt, "r_hi", 0.75 * sys.r_end);
    const double delta = positive(opt, "delta", sys.strip);
    const auto bounds = radial_rotation_bounds(sys, r_lo, r_hi, delta);
    const auto path = rescale_trajectory(shoot_rk(sys, make_shot(sys, eta, shot)), r_lo, r_hi);
    const auto rep = verify_energy_monotonicity(bounds, path);
    pass = rep.passed() && rep.segments_a + rep.segments_b > 0;
    return {{"passed", pass},
            {"eta", number(eta)},
            {"r_lo", number(r_lo)},
            {"r_hi", number(r_hi)},
            {"segments_a", rep.segments_a},
            {"segments_b", rep.segments_b},
            {"violations_a", rep.violations_a},
            {"violations_b", rep.violations_b},
            {"worst_excess", number(rep.worst_excess)}};
}

json rotation_check(const RunConfig& cfg, const json& opt, bool& pass) {
    const auto bounds = config_bounds(cfg);
    const auto js = value(opt, "j", std::vector<int>{1, 2, 3, 4, 5});
    const int runs = value(opt, "runs", 100);
    json list = json::array();
    pass = true;
    for (int j : js) {
        const auto v = validate_rotation(bounds, j, runs, cfg.seed + static_cast<std::uint64_t>(j));
        double min_w = INFINITY, min_r = INFINITY;
        int failed = 0;
        for (const auto& r : v.runs) {
            failed += r.failed;
            if (r.failed) continue;
            min_w = std::min(min_w, r.winding);
            min_r = std::min(min_r, r.min_radius);
        }
        const bool ok = v.passed() && failed == 0;
        pass = pass && ok;
        list.push_back({{"j", j},
                        {"passed", ok},
                        {"certificate",
                         {{"j", j},
                          {"tau_star", number(v.estimate.tau_star)},
                          {"rho_star", number(v.estimate.rho_star)},
                          {"bounds_hash", bounds.hash()}}},
                        {"runs", v.runs.size()},
                        {"failed", failed},
                        {"min_winding_over_j_pi", number(min_w / (j * kPi))},
                        {"min_radius_over_rho_star", number(min_r / v.estimate.rho_star)},
                        {"all_rotate", v.all_rotate},
                        {"origin_clear", v.origin_clear},
                        {"spirals_hold", v.spirals_hold}});
    }
    return {{"passed", pass}, {"bounds_hash", bounds.hash()}, {"seed", cfg.seed}, {"classes", list}};
}

}  // namespace

RunConfig load_config(const fs::path& path, const fs::path& out, std::optional<int> threads,
                      std::optional<std::uint64_t> seed) {
    if (!fs::exists(path)) throw Error(ErrorKind::ConfigError, "config file not found: " + path.string());
    RunConfig cfg;
    cfg.doc = io::read_json(path);
    if (!cfg.doc.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
    cfg.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    cfg.out_dir = out;
    cfg.seed = seed ? *seed : value(cfg.doc, "seed", std::uint64_t{42});
    cfg.threads = threads ? *threads : value(cfg.doc, "threads", 0);
    if (cfg.threads < 0) throw Error(ErrorKind::ConfigError, "threads must be non-negative");
    return cfg;
}

ProblemSpec config_problem(const RunConfig& cfg) {
    if (!cfg.doc.contains("problem")) throw Error(ErrorKind::ConfigError, "config has no 'problem'");
    const json& p = cfg.doc.at("problem");
    if (p.is_string()) {
        const fs::path file = cfg.base_dir / p.get<std::string>();
        if (!fs::exists(file)) throw Error(ErrorKind::ConfigError, "problem file not found: " + file.string());
        return load_problem(file.string());
    }
    return problem_from_json(p);
}

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig sc;
    const json& tol = section(cfg, "tolerances");
    sc.shot.abs_tol = positive(tol, "abs_tol", sc.shot.abs_tol);
    sc.shot.rel_tol = positive(tol, "rel_tol", sc.shot.rel_tol);
    sc.shot.eps_sing = positive(tol, "eps_sing", sc.shot.eps_sing);
    sc.angle_tol = positive(tol, "angle_tol", sc.angle_tol);
    sc.residual_tol = positive(tol, "residual_tol", sc.residual_tol);
    const json& grid = section(cfg, "eta_grid");
    sc.grid.geometric = value(grid, "geometric", sc.grid.geometric);
    sc.grid.uniform = value(grid, "uniform", sc.grid.uniform);
    sc.grid.low_fraction = positive(grid, "low_fraction", sc.grid.low_fraction);
    sc.grid.split_fraction = positive(grid, "split_fraction", sc.grid.split_fraction);
    sc.grid.mirror = value(grid, "mirror", sc.grid.mirror);
    if (sc.grid.geometric < 2 || sc.grid.uniform < 2)
        throw Error(ErrorKind::ConfigError, "eta_grid needs at least two points per part");
    return sc;
}

BoundPair config_bounds(const RunConfig& cfg) {
    const json& rot = section(cfg, "validate").value("rotation", json::object());
    auto fn = [&](const char* key, const char* fallback) -> ScalarFn {
        auto e = Expression::parse(value(rot, key, std::string(fallback)), {"s"});
        return [e](double s) { return e(s); };
    };
    BoundPair b(fn("a1", "0.5*s"), fn("b1", "2*s + s^3"), fn("a2", "2*s + 2*s^3"), fn("b2", "0.25*s + s^3"),
                positive(rot, "delta", 1.0));
    b.validate();
    return b;
}

int cmd_solve(const RunConfig& cfg) {
    const auto spec = config_problem(cfg);
    const auto sc = solver_config(cfg);
    const auto targets = value(section(cfg, "solve"), "targets", std::vector<int>{0, 1, 2, 3});
    for (int j : targets)
        if (j < 0) throw Error(ErrorKind::ConfigError, "targets must be non-negative");
    const auto sys = build_truncation(spec);
    auto res = solve(sys, targets, sc);
    std::stable_sort(res.profiles.begin(), res.profiles.end(), [](const SolutionProfile& a, const SolutionProfile& b) {
        return a.j != b.j ? a.j < b.j : a.eta < b.eta;
    });

    json profiles = json::array();
    std::map<std::string, int> used;
    for (const auto& p : res.profiles) {
        std::string stem = "j" + std::to_string(p.j) + "_" + sign_name(p.sign_at_center) + "_" +
                           std::string(to_string(p.branch));
        const int n = used[stem]++;
        if (n > 0) stem += "_" + std::to_string(n);
        const std::string rel = "profiles/" + stem + ".csv";
        io::write_trajectory_csv(cfg.out_dir / rel, p.trajectory);
        profiles.push_back(io::profile_json(p, rel));
    }

    std::string scan = "eta,winding,max_abs_slope,failed\n";
    int failed = 0;
    double max_w = 0.0;
    for (const auto& r : res.records) {
        scan += io::format15(r.eta) + ',' + io::format15(r.winding) + ',' + io::format15(r.max_abs_slope) + ',' +
                (r.failed ? "1" : "0") + '\n';
        failed += r.failed;
        if (!r.failed) max_w = std::max(max_w, r.winding);
    }
    io::write_text(cfg.out_dir / "scan.csv", scan);

    json doc = {{"problem", problem_to_json(spec)},
                {"truncation", {{"bound", number(sys.bound)}, {"gamma", number(sys.gamma)}}},
                {"targets", targets},
                {"missing_targets", res.missing_targets},
                {"separator", {{"positive", res.separator_pos ? number(*res.separator_pos) : json(nullptr)},
                               {"negative", res.separator_neg ? number(*res.separator_neg) : json(nullptr)}}},
                {"scan", {{"points", res.records.size()}, {"failed", failed}, {"max_winding", number(max_w)}}},
                {"profiles", profiles}};
    io::write_json(cfg.out_dir / "solutions.json", doc);
    write_solution_plots(cfg.out_dir, doc);
    if (!res.missing_targets.empty()) {
        std::cerr << "no bracket for j =";
        for (int j : res.missing_targets) std::cerr << ' ' << j;
        std::cerr << '\n';
        return Incomplete;
    }
    return Ok;
}

int cmd_sweep(const RunConfig& cfg) {
    const auto spec = config_problem(cfg);
    const auto sc = solver_config(cfg);
    const json& opt = section(cfg, "sweep");
    auto lambdas = positive_list(opt, "lambdas", {0.05, 0.5, 5.0, 50.0});
    if (!std::is_sorted(lambdas.begin(), lambdas.end()))
        throw Error(ErrorKind::ConfigError, "sweep.lambdas must be increasing");
    const int k_max = value(opt, "k_max", 3);
    if (k_max < 1) throw Error(ErrorKind::ConfigError, "sweep.k_max must be at least 1");

    const auto rep = lambda_sweep(spec, lambdas, k_max, sc);
    json entries = json::array();
    std::string csv = "lambda,sign,branch,j,count\n";
    for (const auto& e : rep.entries) {
        json counts = json::array();
        for (int sign : {1, -1})
            for (Branch b : {Branch::Small, Branch::Large})
                for (int j = 0; j <= k_max; ++j) {
                    const auto it = e.counts.find({sign, b, j});
                    const int c = it == e.counts.end() ? 0 : it->second;
                    counts.push_back({{"sign", sign}, {"branch", std::string(to_string(b))}, {"j", j}, {"count", c}});
                    csv += io::format15(e.lambda) + ',' + std::to_string(sign) + ',' + std::string(to_string(b)) + ',' +
                           std::to_string(j) + ',' + std::to_string(c) + '\n';
                }
        json nodal = json::object();
        for (int k = 1; k <= k_max; ++k) nodal[std::to_string(k)] = nodal_count(e, k);
        entries.push_back({{"lambda", number(e.lambda)},
                           {"max_j", e.max_j},
                           {"max_winding", number(e.max_winding)},
                           {"nodal_solutions_up_to_k", nodal},
                           {"counts", counts}});
    }
    json star = json::object();
    for (const auto& [k, v] : rep.lambda_star) star[std::to_string(k)] = v ? number(*v) : json(nullptr);
    io::write_json(cfg.out_dir / "sweep.json",
                   {{"problem", problem_to_json(spec)}, {"k_max", k_max}, {"entries", entries}, {"lambda_star", star}});
    io::write_text(cfg.out_dir / "sweep.csv", csv);
    return Ok;
}

int cmd_periodic(const RunConfig& cfg) {
    const json& opt = section(cfg, "periodic");
    std::vector<double> lambdas;
    if (opt.contains("lambda")) lambdas = {positive(opt, "lambda", 1.0)};
    else lambdas = positive_list(opt, "lambdas", {0.1, 1.0, 5.0, 10.0});
    const double period = positive(opt, "period", 2.0 * kPi);
    const auto q = value(opt, "q", std::string("1"));
    const auto g = value(opt, "g", std::string("u^3"));
    const double delta = positive(opt, "delta", 1.0);
    const double strip = positive(opt, "strip", 10.0);
    const int k = value(opt, "k", 1);
    const int j = value(opt, "j", 1);
    const int nradii = value(opt, "radii", 48);
    const int angles = value(opt, "angles", 32);
    if (nradii < 3 || angles < 1) throw Error(ErrorKind::ConfigError, "periodic.radii >= 3 and periodic.angles >= 1");
    MapSettings ms;
    ms.abs_tol = positive(opt, "abs_tol", ms.abs_tol);
    ms.rel_tol = positive(opt, "rel_tol", ms.rel_tol);

    json twist = json::array();
    std::optional<PeriodicSystem> chosen;
    std::vector<double> chosen_radii;
    for (double lambda : lambdas) {
        auto ps = build_periodic(make_periodic(period, q, g, lambda, delta, strip));
        const auto radii = default_twist_radii(ps, nradii);
        const auto rep = verify_twist(ps, k, radii, angles, ms);
        json circles = json::array();
        for (const auto& c : rep.circles)
            circles.push_back({{"radius", number(c.radius)},
                               {"min_winding", number(c.min_winding)},
                               {"max_winding", number(c.max_winding)}});
        twist.push_back({{"lambda", number(lambda)},
                         {"found", rep.found()},
                         {"inner_slow", rep.inner_slow},
                         {"outer_slow", rep.outer_slow},
                         {"witness_radius", rep.witness_radius ? number(*rep.witness_radius) : json(nullptr)},
                         {"max_adjacent_jump", number(rep.max_adjacent_jump)},
                         {"circles", circles}});
        if (rep.found() && !chosen) {
            chosen = std::move(ps);
            chosen_radii = radii;
        }
    }

    json doc = {{"period", number(period)}, {"q", q}, {"g", g}, {"delta", number(delta)}, {"strip", number(strip)},
                {"k", k}, {"j", j}, {"twist", twist}};
    int code = Ok;
    if (!chosen) {
        doc["status"] = std::string(to_string(ErrorKind::TwistNotFound));
        doc["selected_lambda"] = nullptr;
        code = Incomplete;
    } else {
        FixedPointOptions fo;
        fo.map = ms;
        const auto search = find_periodic(*chosen, j, chosen_radii.front(), chosen_radii.back(), fo);
        json points = json::array();
        for (std::size_t i = 0; i < search.solutions.size(); ++i) {
            const auto& s = search.solutions[i];
            const std::string rel = "periodic/fixed_" + std::to_string(i) + ".csv";
            io::write_periodic_csv(cfg.out_dir / rel, s.path);
            points.push_back({{"u0", number(s.u0)},
                              {"v0", number(s.v0)},
                              {"winding", number(s.winding)},
                              {"residual", number(s.residual)},
                              {"max_abs_u", number(s.max_abs_u)},
                              {"max_abs_slope", number(s.max_abs_slope)},
                              {"csv_path", rel}});
        }
        doc["selected_lambda"] = number(chosen->spec.lambda);
        doc["seeds_tried"] = search.seeds_tried;
        doc["rejected"] = search.rejected;
        doc["fixed_points"] = points;
        if (!search.solutions.empty()) {
            const auto& s = search.solutions.front();
            const double h = 1e-2 * std::max(1e-3, std::hypot(s.u0, s.v0));
            const std::array<std::array<double, 2>, 3> tri{{{s.u0, s.v0}, {s.u0 + h, s.v0}, {s.u0, s.v0 + h}}};
            doc["area_distortion"] = number(area_distortion(*chosen, tri, 64, ms));
            doc["status"] = "ok";
        } else {
            doc["status"] = std::string(to_string(ErrorKind::NoFixedPoint));
            code = Incomplete;
        }
    }
    io::write_json(cfg.out_dir / "periodic.json", doc);
    write_twist_plot(cfg.out_dir, doc);
    if (code != Ok) std::cerr << doc["status"].get<std::string>() << '\n';
    return code;
}

int cmd_validate(const RunConfig& cfg) {
    const auto spec = config_problem(cfg);
    if (!spec.is_ball()) throw Error(ErrorKind::ConfigError, "validate needs a ball problem");
    const auto sc = solver_config(cfg);
    const json& opt = section(cfg, "validate");
    const auto sys = build_truncation(spec);
    Collected pool;

    const auto targets = value(opt, "targets", std::vector<int>{0, 1, 2, 3});
    auto res = solve(sys, targets, sc);
    std::stable_sort(res.profiles.begin(), res.profiles.end(), [](const SolutionProfile& a, const SolutionProfile& b) {
        return a.j != b.j ? a.j < b.j : a.eta < b.eta;
    });
    for (const auto& p : res.profiles) pool.trajectories.push_back(p.trajectory);

    bool ok_oracle = false, ok_small = false, ok_angle = false, ok_energy = false, ok_rot = false;
    json doc;
    doc["problem"] = problem_to_json(spec);
    doc["profiles_found"] = res.profiles.size();
    doc["missing_targets"] = res.missing_targets;
    doc["oracle"] = oracle_battery(sys, opt.value("oracle", json::object()), sc.shot, pool, ok_oracle);
    doc["small_solutions"] = small_lemma(sys, opt.value("small_solutions", json::object()), sc.shot, pool, ok_small);
    doc["angular"] = angular_check(pool, sys.lambda, ok_angle);
    doc["energy"] = energy_check(sys, opt.value("energy", json::object()), sc.shot, ok_energy);
    doc["rotation"] = rotation_check(cfg, opt.value("rotation", json::object()), ok_rot);
    const bool all = ok_oracle && ok_small && ok_angle && ok_energy && ok_rot;
    doc["passed"] = all;
    io::write_json(cfg.out_dir / "validate.json", doc);
    for (const char* key : {"oracle", "small_solutions", "angular", "energy", "rotation"})
        std::cerr << key << ": " << (doc[key]["passed"].get<bool>() ? "pass" : "FAIL") << '\n';
    return all ? Ok : Incomplete;
}

int cmd_plot(const RunConfig& cfg) {
    bool any = false;
    if (fs::exists(cfg.out_dir / "solutions.json")) {
        write_solution_plots(cfg.out_dir, io::read_json(cfg.out_dir / "solutions.json"));
        any = true;
    }
    if (fs::exists(cfg.out_dir / "periodic.json")) {
        write_twist_plot(cfg.out_dir, io::read_json(cfg.out_dir / "periodic.json"));
        any = true;
    }
    if (!any)
        throw Error(ErrorKind::ConfigError, "nothing to plot in " + cfg.out_dir.string() +
                                                " (run solve or periodic first)");
    return Ok;
}

int run(std::string_view command, const RunConfig& cfg) {
    const auto start = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    int code = Failure;
    try {
        if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
        fs::create_directories(cfg.out_dir);
        if (command == "solve") code = cmd_solve(cfg);
        else if (command == "sweep") code = cmd_sweep(cfg);
        else if (command == "periodic") code = cmd_periodic(cfg);
        else if (command == "validate") code = cmd_validate(cfg);
        else if (command == "plot") code = cmd_plot(cfg);
        else throw Error(ErrorKind::ConfigError, "unknown command '" + std::string(command) + "'");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = Failure;
    }
    try {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        io::write_json(cfg.out_dir / "metadata.json",
                       {{"command", std::string(command)},
                        {"started_at", iso_time(start)},
                        {"finished_at", iso_time(std::chrono::system_clock::now())},
                        {"elapsed_seconds", elapsed},
                        {"threads", omp_get_max_threads()},
                        {"seed", cfg.seed},
                        {"exit_code", code}});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = Failure;
    }
    return code;
}

}  // namespace minkshoot::cli
