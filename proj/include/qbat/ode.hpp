#pragma once

// Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4), FSAL).
//
// The integrator never steps past the next requested output time, so sampled
// values are genuine solution points rather than interpolants. The step
// ceiling is a function of time, which lets callers keep steps short while a
// pulse is active and relax them afterwards.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qbat/core.hpp"

namespace qbat {

struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_step = 1e-4;  ///< ps; 0.1 fs
    double min_step = 1e-13;     ///< below this the run is declared failed
    /// Step ceiling as a function of time; nullptr means a 0.1 ps ceiling.
    std::function<double(double)> max_step;
};

namespace detail {

// Dormand-Prince coefficients.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Difference between the 5th and the embedded 4th order weights.
inline constexpr double dp_e[7] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace detail

/// Integrate dy/dt = rhs(t, y) from t0 to t1. `observer(t, y)` fires at every
/// time listed in `output_times` (which must be sorted, inside [t0, t1]).
/// rhs signature: void(double t, const std::vector<double>& y, std::vector<double>& dydt).
template <typename Rhs, typename Observer>
void integrate_adaptive(Rhs&& rhs, std::vector<double>& y, double t0, double t1,
                        const std::vector<double>& output_times, Observer&& observer,
                        const OdeOptions& opt = {}) {
    using detail::dp_a;
    using detail::dp_c;
    using detail::dp_e;

    if (!(t1 > t0))
        throw DomainError("integrate_adaptive: t1 must exceed t0");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (output_times[i] < t0 || output_times[i] > t1)
            throw DomainError("integrate_adaptive: output time outside the window");
        if (i > 0 && !(output_times[i] > output_times[i - 1]))
            throw DomainError("integrate_adaptive: output times must be increasing");
    }

    const std::size_t n = y.size();
    std::vector<double> k[7];
    for (auto& ki : k) ki.assign(n, 0.0);
    std::vector<double> ytmp(n), ynew(n), yerr(n);

    auto ceiling = [&](double t) {
        return opt.max_step ? opt.max_step(t) : 0.1;
    };

    double t = t0;
    std::size_t next_out = 0;
    if (next_out < output_times.size() && output_times[next_out] <= t0) {
        observer(t0, y);
        ++next_out;
    }

    // k[0] always holds rhs(t, y) at the top of the loop (FSAL).
    rhs(t, y, k[0]);
    double h = std::min(opt.initial_step, ceiling(t));

    const double eps_time = 1e-12 * std::max(std::abs(t0), std::abs(t1));
    int consecutive_rejects = 0;

    while (t < t1 - eps_time) {
        h = std::min({h, ceiling(t), t1 - t});
        if (next_out < output_times.size())
            h = std::min(h, output_times[next_out] - t);
        if (h < opt.min_step)
            throw NumericalError("integrator step underflow at t = " + std::to_string(t) + " ps");

        // stages 2..7 (stage 7 evaluates at t + h and doubles as the FSAL slot)
        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j) acc += dp_a[s][j] * k[j][i];
                ytmp[i] = y[i] + h * acc;
            }
            rhs(t + dp_c[s] * h, ytmp, k[s]);
        }
        // 5th order solution is the stage-7 argument; recover it from ytmp
        ynew = ytmp;
        for (std::size_t i = 0; i < n; ++i) {
            double e = 0.0;
            for (int j = 0; j < 7; ++j) e += dp_e[j] * k[j][i];
            yerr[i] = h * e;
        }

        bool finite = detail::all_finite(ynew);
        double err = 0.0;
        if (finite) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double scale =
                    opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double q = yerr[i] / scale;
                acc += q * q;
            }
            err = std::sqrt(acc / double(n));
        }

        if (finite && err <= 1.0) {
            t += h;
            y.swap(ynew);
            k[0].swap(k[6]);  // FSAL
            consecutive_rejects = 0;
            while (next_out < output_times.size() &&
                   output_times[next_out] <= t + eps_time) {
                observer(output_times[next_out], y);
                ++next_out;
            }
            const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            if (++consecutive_rejects > 60)
                throw NumericalError("integrator failed to find an acceptable step at t = " +
                                     std::to_string(t) + " ps");
            h *= finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.25;
        }
    }

    // fire any output exactly at t1 that floating point left behind
    while (next_out < output_times.size()) {
        observer(output_times[next_out], y);
        ++next_out;
    }
}

} // namespace qbat
