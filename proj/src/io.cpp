#include "minkshoot/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "minkshoot/error.hpp"

namespace minkshoot::io {

namespace fs = std::filesystem;

double round15(double x) {
    if (!std::isfinite(x)) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

std::string format15(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

nlohmann::json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round15(x);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::ConfigError, "write failed for " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
    }
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    std::string text = "r,u,v,theta\n";
    for (const auto& s : traj.samples)
        text += format15(s.r) + ',' + format15(s.u) + ',' + format15(s.v) + ',' + format15(s.theta) + '\n';
    write_text(path, text);
}

void write_periodic_csv(const fs::path& path, const PlanarPath& p) {
    std::string text = "t,u,v\n";
    for (const auto& s : p.samples) text += format15(s.t) + ',' + format15(s.x) + ',' + format15(s.y) + '\n';
    write_text(path, text);
}

namespace {

// Round tick spacing covering [lo, hi] with about `target` intervals.
double tick_step(double lo, double hi, int target) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

std::string fmt(double x, int digits = 6) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const Figure& fig) {
    constexpr double W = 760, H = 480, left = 70, right = 230, top = 40, bottom = 60;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& c : fig.curves)
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            xmin = std::min(xmin, c.x[i]);
            xmax = std::max(xmax, c.x[i]);
            ymin = std::min(ymin, c.y[i]);
            ymax = std::max(ymax, c.y[i]);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double pw = W - left - right, ph = H - top - bottom;
    auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" style=\"fill:#ffffff\"/>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"24\" style=\"font:15px sans-serif;text-anchor:middle\">"
      << escape(fig.title) << "</text>\n";

    const double xs = tick_step(xmin, xmax, 8), ys = tick_step(ymin, ymax, 8);
    for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-9 * xs; t += xs) {
        s << "<line x1=\"" << fmt(X(t)) << "\" y1=\"" << top << "\" x2=\"" << fmt(X(t)) << "\" y2=\"" << top + ph
          << "\" style=\"stroke:#e4e4e4;stroke-width:1\"/>\n";
        s << "<text x=\"" << fmt(X(t)) << "\" y=\"" << top + ph + 18
          << "\" style=\"font:11px sans-serif;text-anchor:middle\">" << fmt(std::abs(t) < 1e-12 * xs ? 0.0 : t, 4)
          << "</text>\n";
    }
    for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-9 * ys; t += ys) {
        s << "<line x1=\"" << left << "\" y1=\"" << fmt(Y(t)) << "\" x2=\"" << left + pw << "\" y2=\"" << fmt(Y(t))
          << "\" style=\"stroke:#e4e4e4;stroke-width:1\"/>\n";
        s << "<text x=\"" << left - 8 << "\" y=\"" << fmt(Y(t) + 4)
          << "\" style=\"font:11px sans-serif;text-anchor:end\">" << fmt(std::abs(t) < 1e-12 * ys ? 0.0 : t, 4)
          << "</text>\n";
    }
    if (ymin < 0 && ymax > 0)
        s << "<line x1=\"" << left << "\" y1=\"" << fmt(Y(0)) << "\" x2=\"" << left + pw << "\" y2=\"" << fmt(Y(0))
          << "\" style=\"stroke:#888888;stroke-width:1\"/>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" style=\"fill:none;stroke:#000000;stroke-width:1\"/>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18 << "\" style=\"font:13px sans-serif;text-anchor:middle\">"
      << escape(fig.x_label) << "</text>\n";
    s << "<text x=\"18\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 18 " << top + ph / 2
      << ")\" style=\"font:13px sans-serif;text-anchor:middle\">" << escape(fig.y_label) << "</text>\n";

    for (std::size_t k = 0; k < fig.curves.size(); ++k) {
        const auto& c = fig.curves[k];
        s << "<polyline style=\"fill:none;stroke:" << c.color << ";stroke-width:1.6"
          << (c.dashed ? ";stroke-dasharray:6 4" : "") << "\" points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i) s << (i ? " " : "") << fmt(X(c.x[i])) << ',' << fmt(Y(c.y[i]));
        s << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(k);
        s << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 36 << "\" y2=\""
          << ly - 4 << "\" style=\"stroke:" << c.color << ";stroke-width:2" << (c.dashed ? ";stroke-dasharray:6 4" : "")
          << "\"/>\n";
        s << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly << "\" style=\"font:11px sans-serif\">"
          << escape(c.label) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

Curve curve_from_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
    Curve c;
    std::string line;
    std::getline(in, line);
    if (line.rfind("r,u", 0) != 0) throw Error(ErrorKind::ConfigError, path.string() + ": unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string r, u;
        std::getline(ls, r, ',');
        std::getline(ls, u, ',');
        c.x.push_back(std::stod(r));
        c.y.push_back(std::stod(u));
    }
    return c;
}

nlohmann::json nodal_json(const NodalSummary& nodal) {
    nlohmann::json zeros = nlohmann::json::array();
    for (double z : nodal.zeros) zeros.push_back(number(z));
    return {{"zeros", zeros}, {"nodal_domains", nodal.nodal_domains}, {"sign_at_start", nodal.sign_at_start}};
}

nlohmann::json profile_json(const SolutionProfile& p, const std::string& csv_path) {
    double max_slope = 0.0, max_u = 0.0;
    for (const auto& s : p.trajectory.samples) {
        max_slope = std::max(max_slope, std::abs(s.du));
        max_u = std::max(max_u, std::abs(s.u));
    }
    nlohmann::json zeros = nlohmann::json::array();
    for (double z : p.nodal.zeros) zeros.push_back(number(z));
    return {{"eta", number(p.eta)},
            {"j", p.j},
            {"branch", std::string(to_string(p.branch))},
            {"sign", p.sign_at_center},
            {"target", number(p.target)},
            {"winding", number(p.winding)},
            {"boundary_residual", number(p.boundary_residual)},
            {"zeros", zeros},
            {"nodal_domains", p.nodal.nodal_domains},
            {"max_abs_u", number(max_u)},
            {"max_abs_slope", number(max_slope)},
            {"samples", p.trajectory.samples.size()},
            {"csv_path", csv_path}};
}

nlohmann::json record_json(const ShotRecord& r) {
    nlohmann::json doc = {{"eta", number(r.eta)},
                          {"winding", number(r.winding)},
                          {"terminal_u", number(r.terminal_u)},
                          {"terminal_v", number(r.terminal_v)},
                          {"max_abs_slope", number(r.max_abs_slope)},
                          {"slope_bound_ok", r.slope_bound_ok},
                          {"origin_free", r.origin_free},
                          {"failed", r.failed}};
    if (r.failed) doc["error"] = r.error;
    if (r.nodal) doc["nodal"] = nodal_json(*r.nodal);
    return doc;
}

}  // namespace minkshoot::io
