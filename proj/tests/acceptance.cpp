#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "minkshoot/cli.hpp"
#include "minkshoot/io.hpp"
#include "minkshoot/model.hpp"
#include "minkshoot/shoot.hpp"

using namespace minkshoot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = MINKSHOOT_CONFIG_DIR;
const fs::path kWork = fs::temp_directory_path() / "minkshoot_acceptance";

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

cli::RunConfig fig1_config(const std::string& out, int threads) {
    return cli::load_config(kConfigs / "fig1.json", kWork / out, threads, std::nullopt);
}

double max_abs_slope(const Trajectory& t) {
    double m = 0.0;
    for (const auto& s : t.samples) m = std::max(m, std::abs(s.du));
    return m;
}

struct Shared {
    ProblemSpec spec;
    SolveResult solution;
    double solve_seconds = 0.0;
    json validate;
    int validate_code = -1;
    double validate_seconds = 0.0;
};

Outcome figure(const Shared& s) {
    Outcome o;
    const auto& res = s.solution;
    o.require(res.profiles.size() == 16, std::to_string(res.profiles.size()) + " profiles");
    for (int j = 0; j <= 3; ++j)
        for (int sign : {1, -1})
            for (Branch b : {Branch::Small, Branch::Large}) {
                const auto n = std::count_if(res.profiles.begin(), res.profiles.end(), [&](const SolutionProfile& p) {
                    return p.j == j && p.sign_at_center == sign && p.branch == b;
                });
                o.require(n >= 1, "missing j=" + std::to_string(j) + " sign " + std::to_string(sign) + " " +
                                      std::string(to_string(b)));
            }
    double worst_res = 0.0, worst_slope = 0.0;
    for (const auto& p : res.profiles) {
        o.require(p.nodal.zeros.size() == static_cast<std::size_t>(p.j),
                  "zero count " + std::to_string(p.nodal.zeros.size()) + " for j=" + std::to_string(p.j));
        worst_res = std::max(worst_res, p.boundary_residual);
        worst_slope = std::max(worst_slope, max_abs_slope(p.trajectory));
    }
    o.require(worst_res < 1e-6, "residual " + fmt("%.3g", worst_res));
    o.require(worst_slope < 1.0, "slope " + fmt("%.6g", worst_slope));
    o.require(s.solve_seconds < 60.0, "runtime " + fmt("%.1f s", s.solve_seconds));
    if (o.pass)
        o.detail = "16 profiles, max residual " + fmt("%.2e", worst_res) + ", 1 - max |u'| = " + fmt("%.3e", 1.0 - worst_slope) +
                   ", " + fmt("%.2f s", s.solve_seconds);
    return o;
}

Outcome count_and_order(const Shared& s) {
    Outcome o;
    for (int j = 0; j <= 3; ++j) {
        auto eta = [&](int sign, Branch b) {
            double best = NAN;
            for (const auto& p : s.solution.profiles)
                if (p.j == j && p.sign_at_center == sign && p.branch == b) best = p.eta;
            return best;
        };
        const double ln = eta(-1, Branch::Large), sn = eta(-1, Branch::Small);
        const double sp = eta(1, Branch::Small), lp = eta(1, Branch::Large);
        o.require(ln < sn && sn < 0.0 && 0.0 < sp && sp < lp, "ordering fails for j=" + std::to_string(j));
    }
    const auto rep = lambda_sweep(s.spec, {5.0}, 3);
    const int n = nodal_count(rep.entries.front(), 3);
    o.require(n >= 12, "nodal count " + std::to_string(n));
    if (o.pass) o.detail = "ordering holds for j=0..3, nodal count up to k=3 is " + std::to_string(n);
    return o;
}

Outcome small_lemma(const Shared& s) {
    Outcome o;
    const json& v = s.validate.at("small_solutions");
    const int points = v.at("points"), violations = v.at("violations");
    const double w = v.at("max_winding_over_pi");
    o.require(points >= 100, std::to_string(points) + " points");
    o.require(violations == 0 && w < 0.5, std::to_string(violations) + " violations");
    if (o.pass)
        o.detail = std::to_string(points) + " points below eta* = " + fmt("%.6g", v.at("eta_star")) +
                   ", max winding " + fmt("%.4f", w) + " pi";
    return o;
}

Outcome oracle(const Shared& s) {
    Outcome o;
    const json& v = s.validate.at("oracle");
    const auto& shots = v.at("shots");
    o.require(shots.size() >= 20, std::to_string(shots.size()) + " shots");
    double lo = INFINITY, hi = 0.0, worst = 0.0;
    for (const auto& shot : shots) {
        lo = std::min(lo, shot.at("eta").get<double>());
        hi = std::max(hi, shot.at("eta").get<double>());
        worst = std::max(worst, shot.at("sup_u").get<double>());
        o.require(shot.at("bound_dominated").get<bool>(), "bound exceeded at eta " + fmt("%.6g", shot.at("eta")));
    }
    const double R = s.spec.outer_radius();
    o.require(lo <= 1e-3 * (1 + 1e-12) && hi >= (R + 1) * (1 - 1e-12), "battery does not span [1e-3, R+1]");
    o.require(worst < 1e-6, "sup distance " + fmt("%.3g", worst));
    if (o.pass)
        o.detail = std::to_string(shots.size()) + " shots on [" + fmt("%g", lo) + ", " + fmt("%g", hi) +
                   "], worst sup |u_rk - u_picard| " + fmt("%.2e", worst) + ", bound dominated";
    return o;
}

Outcome angular(const Shared& s) {
    Outcome o;
    const json& v = s.validate.at("angular");
    const double pair = v.at("min_pair_increment_over_pi");
    const double crossing = v.at("min_crossing_increment");
    o.require(v.at("failures").get<int>() == 0, "lemma failures");
    o.require(pair > -1.0, "pair increment " + fmt("%.6g", pair) + " pi");
    o.require(crossing >= -1e-8, "crossing increment " + fmt("%.3g", crossing));
    if (o.pass)
        o.detail = std::to_string(v.at("trajectories").get<int>()) + " trajectories, min pair increment " +
                   fmt("%.4g", pair) + " pi, min crossing increment " + fmt("%.2e", crossing);
    return o;
}

Outcome singular(const Shared& s) {
    Outcome o;
    const auto rep = singular_limit_diagnostics(s.spec, {5.0, 50.0, 500.0});
    o.require(rep.entries.size() == 3, "missing large j=0 solutions");
    if (!o.pass) return o;
    const auto& e = rep.entries;
    o.require(e[1].cone_distance < e[0].cone_distance && e[2].cone_distance < e[1].cone_distance,
              "cone distance not decreasing");
    o.require(e[2].min_slope > -1.0 && e[2].min_slope <= -0.9, "min slope " + fmt("%.6g", e[2].min_slope));
    if (o.pass)
        o.detail = "cone distances " + fmt("%.4g", e[0].cone_distance) + " > " + fmt("%.4g", e[1].cone_distance) +
                   " > " + fmt("%.4g", e[2].cone_distance) + ", 1 + min slope at 500 = " + fmt("%.3e", 1.0 + e[2].min_slope);
    return o;
}

Outcome rotation(const Shared& s) {
    Outcome o;
    const json& v = s.validate.at("rotation");
    std::vector<int> seen;
    for (const auto& c : v.at("classes")) {
        const int j = c.at("j");
        seen.push_back(j);
        const std::string tag = "j=" + std::to_string(j) + ": ";
        o.require(c.at("runs").get<int>() == 100, tag + "run count");
        o.require(c.at("failed").get<int>() == 0, tag + "integration failures");
        o.require(c.at("min_winding_over_j_pi").get<double>() > 1.0, tag + "winding below j pi");
        o.require(c.at("min_radius_over_rho_star").get<double>() > 1e-6, tag + "approached the origin");
    }
    o.require(seen == std::vector<int>{1, 2, 3, 4, 5}, "classes are not j=1..5");
    o.require(s.validate_seconds < 120.0, "runtime " + fmt("%.1f s", s.validate_seconds));
    if (o.pass)
        o.detail = "100 runs for each j=1..5, all windings > j pi, all radii > 1e-6 rho*, " +
                   fmt("%.2f s", s.validate_seconds) + " including the whole battery";
    return o;
}

Outcome neumann(const Shared& s) {
    Outcome o;
    auto spec = s.spec;
    spec.bc = BoundaryKind::Neumann;
    const auto sys = build_truncation(spec);
    const auto res = solve(sys, {0, 1, 2});
    int with_j0 = 0;
    for (const auto& p : res.profiles) with_j0 += p.j == 0;
    o.require(with_j0 == 0, std::to_string(with_j0) + " j=0 profiles");
    for (int j : {1, 2})
        for (int sign : {1, -1}) {
            const bool found = std::any_of(res.profiles.begin(), res.profiles.end(), [&](const SolutionProfile& p) {
                return p.j == j && p.sign_at_center == sign && std::abs(p.trajectory.samples.back().du) < 1e-6;
            });
            o.require(found, "no Neumann solution for j=" + std::to_string(j) + " sign " + std::to_string(sign));
        }
    if (o.pass)
        o.detail = "no j=0 solution over " + std::to_string(res.records.size()) + " shots, " +
                   std::to_string(res.profiles.size()) + " solutions for j=1,2";
    return o;
}

Outcome periodic() {
    Outcome o;
    const auto cfg = cli::load_config(kConfigs / "periodic.json", kWork / "periodic", 1, std::nullopt);
    const int code = cli::run("periodic", cfg);
    o.require(code == cli::Ok, "exit code " + std::to_string(code));
    const auto doc = io::read_json(cfg.out_dir / "periodic.json");
    o.require(doc.at("q") == "1" && doc.at("g") == "u^3" && std::abs(doc.at("period").get<double>() - 2 * M_PI) < 1e-12,
              "unexpected problem");
    std::string witness;
    for (const auto& t : doc.at("twist")) {
        if (!t.at("found").get<bool>()) continue;
        const double r = t.at("witness_radius");
        bool inner = false, outer = false, middle = false;
        const auto& c = t.at("circles");
        inner = c.front().at("max_winding").get<double>() < 2 * M_PI;
        outer = c.back().at("max_winding").get<double>() < 2 * M_PI;
        for (const auto& circle : c)
            if (circle.at("radius").get<double>() == r) middle = circle.at("min_winding").get<double>() > 2 * M_PI;
        if (inner && outer && middle && witness.empty())
            witness = "lambda " + fmt("%g", t.at("lambda")) + " (witness radius " + fmt("%.4g", r) + ")";
    }
    o.require(!witness.empty(), "no twist");
    int good = 0;
    if (doc.contains("fixed_points"))
        for (const auto& p : doc.at("fixed_points")) good += p.at("residual").get<double>() < 1e-8;
    o.require(good >= 2, std::to_string(good) + " fixed points");
    if (o.pass) o.detail = "twist at " + witness + ", " + std::to_string(good) + " fixed points with |P(z)-z| < 1e-8";
    return o;
}

Outcome determinism() {
    Outcome o;
    for (const char* command : {"solve", "validate"}) {
        const std::string c = command;
        const auto one = fig1_config(c + "_t1", 1);
        const auto eight = fig1_config(c + "_t8", 8);
        const int a = cli::run(command, one), b = cli::run(command, eight);
        o.require(a == cli::Ok && b == cli::Ok, c + " exit codes " + std::to_string(a) + "/" + std::to_string(b));
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(one.out_dir))
            if (e.is_regular_file() && e.path().filename() != "metadata.json")
                files.push_back(fs::relative(e.path(), one.out_dir));
        for (const auto& f : files)
            o.require(slurp(one.out_dir / f) == slurp(eight.out_dir / f), c + ": " + f.string() + " differs");
        if (o.pass) o.detail += (o.detail.empty() ? "" : ", ") + c + ": " + std::to_string(files.size()) + " files";
    }
    if (o.pass) o.detail = "byte-identical at 1 and 8 threads (" + o.detail + ")";
    return o;
}

}  // namespace

int main() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    omp_set_num_threads(1);

    Shared s;
    bool ok = true;
    auto report = [&](int n, const char* name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
        std::fflush(stdout);
        ok = ok && o.pass;
    };

    try {
        const auto cfg = fig1_config("setup", 1);
        s.spec = cli::config_problem(cfg);
        const auto sc = cli::solver_config(cfg);
        auto t0 = std::chrono::steady_clock::now();
        s.solution = solve(build_truncation(s.spec), {0, 1, 2, 3}, sc);
        s.solve_seconds = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        s.validate_code = cli::run("validate", cfg);
        s.validate_seconds = seconds_since(t0);
        s.validate = io::read_json(cfg.out_dir / "validate.json");
    } catch (const std::exception& e) {
        std::printf("FAIL setup: %s\n", e.what());
        return 1;
    }

    report(1, "figure reproduction", [&] { return figure(s); });
    report(2, "nodal count and ordering", [&] { return count_and_order(s); });
    report(3, "small-solution lemma", [&] { return small_lemma(s); });
    report(4, "oracle equivalence", [&] { return oracle(s); });
    report(5, "angular lemmas", [&] { return angular(s); });
    report(6, "singular limit", [&] { return singular(s); });
    report(7, "randomized rotation", [&] { return rotation(s); });
    report(8, "Neumann exclusion", [&] { return neumann(s); });
    report(9, "periodic twist", [] { return periodic(); });
    report(10, "determinism", [] { return determinism(); });
    std::printf("%s\n", ok ? "all criteria passed" : "some criteria FAILED");
    return ok ? 0 : 1;
}
