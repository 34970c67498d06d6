#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "minkshoot/io.hpp"

using namespace minkshoot;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir(const char* name) {
    const auto p = fs::temp_directory_path() / ("minkshoot_test_io_" + std::string(name));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}
}  // namespace

TEST_CASE("fifteen significant digits") {
    CHECK(io::format15(1.0 / 3.0) == "0.333333333333333");
    CHECK(io::format15(2.0) == "2");
    CHECK(io::format15(-1.234567890123456789e-20) == "-1.23456789012346e-20");
    CHECK(io::format15(NAN) == "nan");
    CHECK(io::format15(-INFINITY) == "-inf");
    CHECK(io::round15(1.0 / 3.0) == 0.333333333333333);
    CHECK(io::number(INFINITY).is_null());
    CHECK(io::number(0.1 + 0.2).dump() == "0.3");
}

TEST_CASE("trajectory CSV") {
    Trajectory t;
    t.samples.push_back({0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0});
    t.samples.push_back({0.5, 0.25, -0.1, 0.0, 0.0, 0.1});
    const auto dir = scratch_dir("csv");
    io::write_trajectory_csv(dir / "t.csv", t);
    CHECK(slurp(dir / "t.csv") == "r,u,v,theta\n0,0.333333333333333,0,0\n0.5,0.25,-0.1,0.1\n");
    const auto c = io::curve_from_csv(dir / "t.csv");
    REQUIRE(c.x.size() == 2);
    CHECK(c.y[1] == 0.25);
}

TEST_CASE("SVG output is standalone") {
    io::Figure fig{"title <j=1>", "r", "u(r)", {}};
    fig.curves.push_back({"eta=1 j=1 small", "#1f77b4", false, {0, 1, 2}, {1, 0, -1}});
    fig.curves.push_back({"eta=-1 j=1 small", "#17becf", true, {0, 1, 2}, {-1, 0, 1}});
    const auto svg = io::render_svg(fig);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos);
    CHECK(svg.find("<script") == std::string::npos);
    CHECK(svg.find("<style") == std::string::npos);
    CHECK(svg.find("title &lt;j=1&gt;") != std::string::npos);
    CHECK(svg.find("eta=-1 j=1 small") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(io::render_svg(fig) == svg);
}

TEST_CASE("JSON files end with a newline and round-trip") {
    const auto dir = scratch_dir("json");
    const nlohmann::json doc = {{"a", 1}, {"b", {1.5, 2.5}}};
    io::write_json(dir / "x.json", doc);
    CHECK(slurp(dir / "x.json").back() == '\n');
    CHECK(io::read_json(dir / "x.json") == doc);
}
