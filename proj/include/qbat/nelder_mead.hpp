#pragma once

// Derivative-free simplex minimizer (Nelder-Mead) for small smooth problems.
// Deterministic: no randomness, fixed tie handling.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qbat/core.hpp"

namespace qbat {

struct SimplexResult {
    std::vector<double> x;   ///< best vertex found
    double fmin = 0.0;       ///< objective at best vertex
    int iterations = 0;      ///< objective evaluations spent
    bool converged = false;  ///< simplex collapsed below tolerance
};

/// Minimize f starting from x0. `step` sets the initial simplex edge per
/// coordinate. Convergence: relative spread of vertex values and of vertex
/// coordinates both below tol. `max_iter` bounds objective evaluations.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0,
                                 const std::vector<double>& step,
                                 int max_iter = 5000, double tol = 1e-6) {
    const std::size_t n = x0.size();
    if (n == 0 || step.size() != n)
        throw DomainError("nelder_mead: bad dimensions");

    std::vector<std::vector<double>> verts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i)
        verts[i + 1][i] += (step[i] != 0.0 ? step[i] : 1e-4);

    int evals = 0;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) { fv[i] = f(verts[i]); ++evals; }

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> v2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) { v2[i] = verts[idx[i]]; f2[i] = fv[idx[i]]; }
        verts.swap(v2);
        fv.swap(f2);
    };

    auto spread_ok = [&] {
        // The floor keeps the test satisfiable when the minimum is ~0 and the
        // vertex values are pure rounding noise (relative spread stays O(1)).
        const double fscale = std::abs(fv[0]) + std::abs(fv[n]) + 1e-12;
        if (std::abs(fv[n] - fv[0]) / fscale > tol) return false;
        for (std::size_t j = 0; j < n; ++j) {
            double lo = verts[0][j], hi = verts[0][j];
            for (std::size_t i = 1; i <= n; ++i) {
                lo = std::min(lo, verts[i][j]);
                hi = std::max(hi, verts[i][j]);
            }
            const double xscale = std::abs(verts[0][j]) + std::abs(step[j]) + 1e-300;
            if ((hi - lo) / xscale > tol) return false;
        }
        return true;
    };

    order();
    while (evals < max_iter) {
        if (spread_ok()) {
            return {verts[0], fv[0], evals, true};
        }
        // centroid of all but worst
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) c[j] += verts[i][j] / double(n);

        auto blend = [&](double coeff) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = c[j] + coeff * (verts[n][j] - c[j]);
            return p;
        };

        auto xr = blend(-1.0);  // reflection
        double fr = f(xr); ++evals;
        if (fr < fv[0]) {
            auto xe = blend(-2.0);  // expansion
            double fe = f(xe); ++evals;
            if (fe < fr) { verts[n] = xe; fv[n] = fe; }
            else         { verts[n] = xr; fv[n] = fr; }
        } else if (fr < fv[n - 1]) {
            verts[n] = xr; fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            auto xc = blend(outside ? -0.5 : 0.5);  // contraction
            double fc = f(xc); ++evals;
            if (fc < std::min(fr, fv[n])) {
                verts[n] = xc; fv[n] = fc;
            } else {
                // shrink toward best vertex
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        verts[i][j] = verts[0][j] + 0.5 * (verts[i][j] - verts[0][j]);
                    fv[i] = f(verts[i]); ++evals;
                }
            }
        }
        order();
    }
    return {verts[0], fv[0], evals, false};
}

} // namespace qbat
