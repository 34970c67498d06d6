#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minkshoot/integrate.hpp"
#include "minkshoot/phase.hpp"

namespace minkshoot {

/// Shooting parameters for a scan. Ball: 200 geometric points in
/// [1e-6 R, 0.1 R] followed by 400 uniform points up to R + 1. Annulus: the
/// same counts laid out geometrically in the initial flux R1^{N-1} phi~(eta),
/// from 1e-6 up to beyond the slope at which u must leave the strip.
struct EtaGrid {
    int geometric = 200;
    int uniform = 400;
    double low_fraction = 1e-6;
    double split_fraction = 0.1;
    bool mirror = true;  // append the negative mirror image

    std::vector<double> points(const TruncatedSystem& system) const;
};

struct ShotRecord {
    double eta = 0.0;
    double winding = 0.0;
    double terminal_u = 0.0;
    double terminal_v = 0.0;
    double terminal_slope = 0.0;
    double max_abs_slope = 0.0;
    bool slope_bound_ok = true;
    bool origin_free = true;
    bool failed = false;
    std::string error;
    std::optional<NodalSummary> nodal;
};

ShotRecord make_record(const TruncatedSystem& system, const Trajectory& traj);

/// One record per eta, in the order given. Shot failures are recorded in the
/// record instead of aborting. Parallel over eta (OpenMP).
std::vector<ShotRecord> scan_eta(const TruncatedSystem& system, const std::vector<double>& etas,
                                 const ShotSettings& settings = {});

/// Sequential reference for scan_eta; results are bitwise identical.
std::vector<ShotRecord> scan_eta_serial(const TruncatedSystem& system, const std::vector<double>& etas,
                                        const ShotSettings& settings = {});

enum class Branch { Small, Large };

std::string_view to_string(Branch b);

struct SolutionProfile {
    double eta = 0.0;
    int j = 0;
    Branch branch = Branch::Small;
    int sign_at_center = 1;
    double target = 0.0;
    double winding = 0.0;
    double boundary_residual = 0.0;
    Trajectory trajectory;
    NodalSummary nodal;
};

struct SolverConfig {
    ShotSettings shot;
    EtaGrid grid;
    double angle_tol = 1e-8;
    double residual_tol = 1e-6;
    double interval_fraction = 1e-13;  // of the outer radius
    double dedupe_fraction = 1e-9;     // of the outer radius
    int max_bisections = 400;
};

/// Winding target for nodal class j: (1/2 + j) pi for Dirichlet balls,
/// j pi for Neumann balls and for annuli.
double target_for(const TruncatedSystem& system, int j);

/// Separator between small and large shots of one sign: the scanned eta of
/// maximal winding. Empty when no valid record of that sign exists.
std::optional<double> winding_argmax(const std::vector<ShotRecord>& records, int sign);

struct RootSearch {
    std::vector<SolutionProfile> profiles;
    int brackets = 0;
    int rejected = 0;  // brackets whose bisection did not meet the residual tolerance
    bool no_bracket() const { return brackets == 0; }
};

/// Bisects every adjacent pair of records (same sign, both valid) whose
/// windings straddle `target`. Brackets are processed in parallel, each
/// bisection is sequential.
RootSearch bracket_and_bisect(const TruncatedSystem& system, const std::vector<ShotRecord>& records, double target,
                              const SolverConfig& config = {});

struct EtaStarEstimate {
    double eta_hat = 0.0;   // lambda |q g(u) u| <= eps u^2 for |u| <= eta_hat
    double eta_star = 0.0;  // shots below stay within |u| <= eta_hat
};

/// Error(InvalidSpec) if sqrt(eps) >= pi / (2R); Error(NotSuperlinear) if no
/// eta_hat exists on the search grid.
EtaStarEstimate estimate_eta_star_small(const TruncatedSystem& system, double eps_choice,
                                        const ShotSettings& settings = {});

/// Largest admissible eps with margin: (pi / (2R))^2 * 0.99.
double default_eps_choice(const TruncatedSystem& system);

struct SolveResult {
    std::vector<ShotRecord> records;
    std::vector<SolutionProfile> profiles;
    std::vector<int> missing_targets;  // j values without any bracket
    std::optional<double> separator_pos;
    std::optional<double> separator_neg;
};

/// Scan + bisection for each requested nodal class j.
SolveResult solve(const TruncatedSystem& system, const std::vector<int>& js, const SolverConfig& config = {});

using ClassKey = std::tuple<int, Branch, int>;  // (sign, branch, j)

struct SweepEntry {
    double lambda = 0.0;
    std::map<ClassKey, int> counts;
    int max_j = -1;        // largest j with at least one solution
    double max_winding = 0.0;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    std::map<int, std::optional<double>> lambda_star;  // k -> smallest grid lambda with all 4k classes
};

SweepReport lambda_sweep(const ProblemSpec& base, const std::vector<double>& lambdas, int k_max,
                         const SolverConfig& config = {});

/// Number of nodal (j >= 1) solutions with j <= k in a sweep entry.
int nodal_count(const SweepEntry& entry, int k);

/// Large-|eta| diagnostic on scan records: smallest |eta| beyond which every
/// scanned winding stays below pi/2.
std::optional<double> no_rotation_threshold(const std::vector<ShotRecord>& records, int sign);

struct SingularLimitEntry {
    double lambda = 0.0;
    double eta = 0.0;
    double cone_distance = 0.0;  // sup |u - (R - r)|
    double min_slope = 0.0;
    double center_slope = 0.0;
};

struct SingularLimitReport {
    std::vector<SingularLimitEntry> entries;
    bool distance_decreasing = true;
    bool slopes_above_minus_one = true;
    bool center_flat = true;
};

/// Positive large j = 0 solutions for each lambda compared with the cone R - r.
SingularLimitReport singular_limit_diagnostics(const ProblemSpec& base, const std::vector<double>& lambdas,
                                               const SolverConfig& config = {});

}  // namespace minkshoot
