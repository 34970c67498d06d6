#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "minkshoot/periodic.hpp"
#include "minkshoot/shoot.hpp"

namespace minkshoot::io {

/// x rounded to 15 significant digits (non-finite values pass through).
double round15(double x);

/// "%.15g" formatting; non-finite values become nan, inf, -inf.
std::string format15(double x);

/// JSON number rounded to 15 significant digits, or null when not finite.
nlohmann::json number(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// Header r,u,v,theta.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
/// Header t,u,v.
void write_periodic_csv(const std::filesystem::path& path, const PlanarPath& path_samples);

struct Curve {
    std::string label;
    std::string color;
    bool dashed = false;
    std::vector<double> x;
    std::vector<double> y;
};

struct Figure {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Curve> curves;
};

/// Standalone SVG line plot with axes, ticks and a legend. Inline styles only.
std::string render_svg(const Figure& figure);

/// Reads a trajectory CSV (r,u,v,theta) into a curve of u against r.
Curve curve_from_csv(const std::filesystem::path& path);

nlohmann::json nodal_json(const NodalSummary& nodal);
nlohmann::json profile_json(const SolutionProfile& profile, const std::string& csv_path);
nlohmann::json record_json(const ShotRecord& record);

}  // namespace minkshoot::io
