#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "minkshoot/error.hpp"

namespace minkshoot::ode {

template <std::size_t D>
using State = std::array<double, D>;

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 0.0;  // 0 selects a step from the tolerances
    double max_step = std::numeric_limits<double>::infinity();
    double min_step_fraction = 1e-14;  // of the integration span
    std::size_t max_steps = 50'000'000;
};

/// Cubic Hermite interpolation on [t0, t1] from values and derivatives.
inline double hermite(double t0, double y0, double d0, double t1, double y1, double d1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * d1;
}

inline double hermite_derivative(double t0, double y0, double d0, double t1, double y1, double d1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * y1 +
            (3 * s2 - 2 * s) * h * d1) /
           h;
}

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y) from t0 to t1.
///
/// `on_step(t, y, dy)` is invoked for every accepted step (not for the start
/// point). `limit(t, y, dy)` returns an upper bound on the next step size and
/// `admissible(t0, y0, t1, y1)` may veto an otherwise accepted step, which is
/// then retried with half the size.
template <std::size_t D, class Rhs, class OnStep, class Limit, class Admissible>
void dopri5(Rhs&& rhs, double t0, State<D> y0, double t1, const Options& opt, OnStep&& on_step, Limit&& limit,
            Admissible&& admissible) {
    // Butcher tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = t1 - t0;
    if (!(span > 0.0)) return;
    const double h_min = opt.min_step_fraction * span;

    State<D> y = y0;
    State<D> k1 = rhs(t0, y);
    double t = t0;

    double h = opt.initial_step;
    if (!(h > 0.0)) {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / D);
        d1 = std::sqrt(d1 / D);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h = std::min(h, 1e-3 * span);
    }
    h = std::min({h, opt.max_step, limit(t, y, k1)});

    State<D> tmp, k2, k3, k4, k5, k6, k7, y_new;
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps) throw Error(ErrorKind::StepSizeUnderflow, "step budget exhausted");
        bool last = false;
        if (t + h >= t1 || t1 - (t + h) < h_min) {
            h = t1 - t;
            last = true;
        }
        if (h < h_min && !last) throw Error(ErrorKind::StepSizeUnderflow, "step size below minimum");

        for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        k2 = rhs(t + c2 * h, tmp);
        for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(t + c3 * h, tmp);
        for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(t + c4 * h, tmp);
        for (std::size_t i = 0; i < D; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(t + c5 * h, tmp);
        for (std::size_t i = 0; i < D; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double t_new = last ? t1 : t + h;
        k6 = rhs(t + h, tmp);
        for (std::size_t i = 0; i < D; ++i)
            y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs(t_new, y_new);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < D; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err += (e / sc) * (e / sc);
            finite = finite && std::isfinite(y_new[i]);
        }
        err = std::sqrt(err / D);

        if (!finite || !(err <= 1.0) || !admissible(t, y, t_new, y_new)) {
            const double shrink = (finite && std::isfinite(err) && err > 1.0)
                                      ? std::max(0.2, 0.9 * std::pow(err, -0.2))
                                      : 0.5;
            h *= shrink;
            if (h < h_min) throw Error(ErrorKind::StepSizeUnderflow, "step size below minimum");
            continue;
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        on_step(t, y, k1);

        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min({h * grow, opt.max_step, limit(t, y, k1)});
    }
}

template <std::size_t D, class Rhs, class OnStep>
void dopri5(Rhs&& rhs, double t0, State<D> y0, double t1, const Options& opt, OnStep&& on_step) {
    dopri5<D>(
        std::forward<Rhs>(rhs), t0, y0, t1, opt, std::forward<OnStep>(on_step),
        [](double, const State<D>&, const State<D>&) { return std::numeric_limits<double>::infinity(); },
        [](double, const State<D>&, double, const State<D>&) { return true; });
}

}  // namespace minkshoot::ode
