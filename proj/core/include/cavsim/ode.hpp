#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include <Eigen/Core>

#include "cavsim/errors.hpp"

namespace cavsim {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;   // 0 = choose automatically
    double max_step = std::numeric_limits<double>::infinity();
    std::int64_t max_steps = 500'000'000;
};

struct OdeStats {
    std::int64_t steps_accepted = 0;
    std::int64_t steps_rejected = 0;
    std::int64_t rhs_evaluations = 0;
};

namespace detail {

template <class State>
double error_norm(const State& err, const State& y0, const State& y1,
                  double atol, double rtol) {
    const auto* e = err.data();
    const auto* a = y0.data();
    const auto* b = y1.data();
    const auto n = err.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
        const double q = std::abs(e[i]) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

} // namespace detail

/// Adaptive Dormand-Prince 5(4) driver. Integrates y from t0 to t1 in place,
/// calling rhs(t, y, dydt). The final step is clamped to land on t1 exactly.
template <class State, class Rhs>
void integrate_adaptive(Rhs&& rhs, State& y, double t0, double t1,
                        const OdeOptions& opt = {}, OdeStats* stats = nullptr) {
    if (!(t1 > t0)) {
        if (t1 == t0) return;
        throw invalid_parameter("integrate_adaptive: t1 < t0");
    }

    State k1(y.rows(), y.cols()), k2(y.rows(), y.cols()), k3(y.rows(), y.cols()),
        k4(y.rows(), y.cols()), k5(y.rows(), y.cols()), k6(y.rows(), y.cols()),
        k7(y.rows(), y.cols()), ytmp(y.rows(), y.cols()), ynew(y.rows(), y.cols()),
        yerr(y.rows(), y.cols());

    double t = t0;
    rhs(t, y, k1);
    if (stats) stats->rhs_evaluations++;

    double h = opt.initial_step;
    if (h <= 0.0) {
        // crude but serviceable first guess, the controller corrects quickly
        const double d0 = detail::error_norm(y, y, y, opt.atol, opt.rtol);
        const double d1 = detail::error_norm(k1, y, y, opt.atol, opt.rtol);
        h = (d1 > 1e-30) ? 0.01 * d0 / d1 : (t1 - t0) * 1e-6;
        h = std::min({std::max(h, (t1 - t0) * 1e-12), t1 - t0, opt.max_step});
        if (h <= 0.0) h = (t1 - t0) * 1e-6;
    }

    std::int64_t steps = 0;
    bool first_same_as_last = true; // k1 holds rhs at (t, y)
    while (t < t1) {
        if (++steps > opt.max_steps)
            throw solver_error("integrate_adaptive: step budget exhausted at t=" +
                               std::to_string(t));
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), std::abs(t1)))
            throw stiffness_error("integrate_adaptive: step size underflow at t=" +
                                  std::to_string(t) + ", h=" + std::to_string(h));
        bool clamped = false;
        if (t + h >= t1) {
            h = t1 - t;
            clamped = true;
        }

        if (!first_same_as_last) {
            rhs(t, y, k1);
            if (stats) stats->rhs_evaluations++;
        }

        ytmp = y + h * (1.0 / 5.0) * k1;
        rhs(t + h / 5.0, ytmp, k2);
        ytmp = y + h * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2);
        rhs(t + 3.0 * h / 10.0, ytmp, k3);
        ytmp = y + h * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3);
        rhs(t + 4.0 * h / 5.0, ytmp, k4);
        ytmp = y + h * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2 +
                        (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4);
        rhs(t + 8.0 * h / 9.0, ytmp, k5);
        ytmp = y + h * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2 +
                        (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4 -
                        (5103.0 / 18656.0) * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 +
                        (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5 +
                        (11.0 / 84.0) * k6);
        rhs(t + h, ynew, k7);
        if (stats) stats->rhs_evaluations += 6;

        yerr = h * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3 +
                    (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5 +
                    (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7);

        const double err = detail::error_norm(yerr, y, ynew, opt.atol, opt.rtol);
        if (err <= 1.0) {
            t = clamped ? t1 : t + h;
            y.swap(ynew);
            k1.swap(k7); // FSAL
            first_same_as_last = true;
            if (stats) stats->steps_accepted++;
        } else {
            first_same_as_last = false;
            if (stats) stats->steps_rejected++;
        }
        const double factor = (err > 1e-30)
                                  ? 0.9 * std::pow(err, -0.2)
                                  : 5.0;
        h = std::min(h * std::clamp(factor, 0.2, 5.0), opt.max_step);
    }
}

/// Integrates through an increasing grid of sample times, invoking
/// observe(index, t, y) at every grid point, the start time included.
template <class State, class Rhs, class Observer>
void integrate_sampled(Rhs&& rhs, State& y, std::span<const double> times,
                       Observer&& observe, const OdeOptions& opt = {},
                       OdeStats* stats = nullptr) {
    if (times.empty()) return;
    double t = times[0];
    observe(std::size_t{0}, t, y);
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] < t)
            throw invalid_parameter("integrate_sampled: time grid must be increasing");
        integrate_adaptive(rhs, y, t, times[i], opt, stats);
        t = times[i];
        observe(i, t, y);
    }
}

} // namespace cavsim
