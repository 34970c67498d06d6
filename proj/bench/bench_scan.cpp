#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "minkshoot/model.hpp"
#include "minkshoot/rotation.hpp"
#include "minkshoot/shoot.hpp"

using namespace minkshoot;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

bool same(const ShotRecord& a, const ShotRecord& b) {
    auto eq = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
    return eq(a.eta, b.eta) && eq(a.winding, b.winding) && eq(a.terminal_u, b.terminal_u) &&
           eq(a.terminal_v, b.terminal_v) && eq(a.max_abs_slope, b.max_abs_slope) && a.failed == b.failed;
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::stoi(argv[1]) : 3;
    const int threads = omp_get_max_threads();
    const auto sys = build_truncation(make_problem(2, Ball{10.0}, "1", "u^3", 5.0, BoundaryKind::Dirichlet, 5.0, true));
    const auto etas = EtaGrid{}.points(sys);

    std::vector<ShotRecord> serial, parallel;
    const double ts = best_of(reps, [&] { serial = scan_eta_serial(sys, etas); });
    const double tp = best_of(reps, [&] { parallel = scan_eta(sys, etas); });
    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i) identical = same(serial[i], parallel[i]);
    std::printf("scan_eta: %zu shots, serial %.3f s, openmp(%d) %.3f s, speedup %.2f, identical %s\n", etas.size(), ts,
                threads, tp, ts / tp, identical ? "yes" : "NO");

    auto s = [](double a, double b) { return [a, b](double x) { return a * x + b * x * x * x; }; };
    const BoundPair bounds(s(0.5, 0), s(2, 1), s(2, 2), s(0.25, 1), 1.0);
    RotationValidation r1, rn;
    omp_set_num_threads(1);
    const double t1 = best_of(reps, [&] { r1 = validate_rotation(bounds, 3, 100, 42); });
    omp_set_num_threads(threads);
    const double tn = best_of(reps, [&] { rn = validate_rotation(bounds, 3, 100, 42); });
    bool rot_same = r1.runs.size() == rn.runs.size();
    for (std::size_t i = 0; rot_same && i < r1.runs.size(); ++i)
        rot_same = std::memcmp(&r1.runs[i].winding, &rn.runs[i].winding, sizeof(double)) == 0;
    std::printf("validate_rotation j=3: 100 runs, 1 thread %.3f s, openmp(%d) %.3f s, speedup %.2f, identical %s\n", t1,
                threads, tn, t1 / tn, rot_same ? "yes" : "NO");
    return identical && rot_same ? 0 : 1;
}
