#pragma once

#include <array>
#include <functional>
#include <vector>

#include "minkshoot/ode.hpp"

namespace minkshoot {

/// Right-hand side (x', y') of a non-autonomous planar system.
using PlanarField = std::function<std::array<double, 2>(double t, double x, double y)>;

struct PlanarSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double theta = 0.0;  // lifted clockwise angle of (x, y / angle_scale)
};

struct PlanarPath {
    double angle_scale = 1.0;
    std::vector<PlanarSample> samples;

    double winding() const { return samples.back().theta - samples.front().theta; }
    /// Smallest sampled |(x, y / angle_scale)|.
    double min_radius() const;
    /// Hermite dense output of (x, y); t is clamped to the sampled range.
    std::array<double, 2> at(double t) const;
};

/// Dormand-Prince integration on [t0, t1] with sample-to-sample angle
/// increments kept below pi/4. The field may be discontinuous in t at the
/// given breakpoints, which are hit exactly. Throws Error(OriginHit) if the
/// path comes within `origin_floor` of the origin.
PlanarPath integrate_planar(const PlanarField& field, double t0, double t1, double x0, double y0,
                            double angle_scale, const ode::Options& options,
                            const std::vector<double>& breakpoints = {}, double origin_floor = 0.0);

}  // namespace minkshoot
