#pragma once

// Steady-state polariton model.
//
// One cavity mode coupled to the two Davydov excitons of the CuPc film.
// In the basis {cavity, X1, X2} the Hamiltonian is
//
//     [ delta_c  g_co  g_co ]
//     [ g_co     delta1  0  ]
//     [ g_co     0   delta2 ]
//
// (energies in eV). Its eigenvectors give the three polariton branches
// LP/MP/UP; the photon weight |<cavity|mu>|^2 sets how strongly each branch
// shows up in reflectance.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "qbat/core.hpp"
#include "qbat/nelder_mead.hpp"

namespace qbat {

struct CoupledOscillatorParams {
    double delta1_ev = 1.80;  ///< lower Davydov exciton
    double delta2_ev = 1.98;  ///< upper Davydov exciton
    double delta_c_ev = 0.0;  ///< cavity resonance
    double g_co_ev = 0.0;     ///< collective coupling, >= 0
    double i0 = 0.0;          ///< reflectance dip amplitude
    double sigma = 0.0;       ///< Gaussian width parameter (enters as 2*sigma
                              ///  in the exponent denominator), > 0 for spectra
};

/// Sampled spectrum on a strictly increasing energy grid.
struct Spectrum {
    std::vector<double> energy_ev;
    std::vector<double> value;

    std::size_t size() const { return energy_ev.size(); }
};

inline void check_spectrum_grid(const Spectrum& s) {
    if (s.energy_ev.size() != s.value.size())
        throw DomainError("spectrum: column length mismatch");
    for (std::size_t i = 1; i < s.energy_ev.size(); ++i)
        if (!(s.energy_ev[i] > s.energy_ev[i - 1]))
            throw DomainError("spectrum: energies must be strictly increasing");
}

/// Default survey grid: 1.4 .. 2.4 eV, 500 points.
inline std::vector<double> default_energy_grid() {
    std::vector<double> g(500);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = 1.4 + (2.4 - 1.4) * double(i) / double(g.size() - 1);
    return g;
}

inline Eigen::Matrix3d coupled_oscillator_hamiltonian(const CoupledOscillatorParams& p) {
    Eigen::Matrix3d h;
    h << p.delta_c_ev, p.g_co_ev, p.g_co_ev,
         p.g_co_ev, p.delta1_ev, 0.0,
         p.g_co_ev, 0.0, p.delta2_ev;
    return h;
}

/// Polariton branches sorted by energy: index 0 = LP, 1 = MP, 2 = UP.
/// Degenerate energies are ordered by descending photon weight.
struct PolaritonModes {
    std::array<double, 3> energy_ev{};
    std::array<double, 3> photon_weight{};  ///< |<cavity|mu>|^2, sums to 1
    Eigen::Matrix3d vectors;                ///< columns are branch eigenvectors
};

inline PolaritonModes eigensystem(const CoupledOscillatorParams& p) {
    if (p.g_co_ev < 0.0)
        throw DomainError("g_co must be >= 0");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(coupled_oscillator_hamiltonian(p));
    if (solver.info() != Eigen::Success)
        throw NumericalError("coupled-oscillator eigensolver failed");

    std::array<int, 3> order{0, 1, 2};
    const auto& ev = solver.eigenvalues();
    const auto& vec = solver.eigenvectors();
    auto weight = [&](int i) { return vec(0, i) * vec(0, i); };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (ev[a] != ev[b]) return ev[a] < ev[b];
        return weight(a) > weight(b);  // tie: most photonic first
    });

    PolaritonModes m;
    for (int i = 0; i < 3; ++i) {
        m.energy_ev[i] = ev[order[i]];
        m.photon_weight[i] = weight(order[i]);
        m.vectors.col(i) = vec.col(order[i]);
    }
    return m;
}

/// Reflectance at a probe energy: unity minus a Gaussian dip per branch,
/// weighted by photon content. sigma enters the exponent literally, i.e.
/// R = 1 - i0 * sum_mu |c_mu|^2 exp(-(eps_mu - e)^2 / (2 sigma)).
inline double reflectance_at(const PolaritonModes& m, const CoupledOscillatorParams& p,
                             double energy_ev) {
    double dip = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = m.energy_ev[i] - energy_ev;
        dip += m.photon_weight[i] * std::exp(-d * d / (2.0 * p.sigma));
    }
    return 1.0 - p.i0 * dip;
}

inline Spectrum reflectance(const CoupledOscillatorParams& p,
                            const std::vector<double>& grid = default_energy_grid()) {
    if (!(p.sigma > 0.0))
        throw DomainError("sigma must be positive");
    const PolaritonModes m = eigensystem(p);
    Spectrum s;
    s.energy_ev = grid;
    s.value.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        s.value[i] = reflectance_at(m, p, grid[i]);
    check_spectrum_grid(s);
    return s;
}

/// LP-MP and MP-UP energy gaps in eV.
struct RabiSplittings {
    double lower_ev = 0.0;  ///< MP - LP
    double upper_ev = 0.0;  ///< UP - MP
};

inline RabiSplittings rabi_splittings(const CoupledOscillatorParams& p) {
    const PolaritonModes m = eigensystem(p);
    return {m.energy_ev[1] - m.energy_ev[0], m.energy_ev[2] - m.energy_ev[1]};
}

// ---------------------------------------------------------------------------
// reflectance fit
// ---------------------------------------------------------------------------

struct FitResult {
    CoupledOscillatorParams params;
    double residual_ss = 0.0;  ///< sum of squared residuals at the optimum
    int iterations = 0;
    bool converged = false;
};

/// Thrown when the simplex budget is exhausted; carries the best candidate.
struct FitConvergenceError : NumericalError {
    FitResult best;
    explicit FitConvergenceError(FitResult r)
        : NumericalError("reflectance fit did not converge within budget"),
          best(std::move(r)) {}
};

/// Fit (delta_c, g_co, i0, sigma) to a measured reflectance spectrum.
/// The exciton energies delta1/delta2 are taken from `init` and held fixed.
inline FitResult fit_reflectance(const Spectrum& measured,
                                 const CoupledOscillatorParams& init,
                                 int max_iter = 5000, double tol = 1e-6) {
    check_spectrum_grid(measured);
    if (measured.size() < 8)
        throw DomainError("fit needs at least 8 spectrum points");

    auto objective = [&](const std::vector<double>& x) {
        CoupledOscillatorParams p = init;
        p.delta_c_ev = x[0];
        p.g_co_ev = x[1];
        p.i0 = x[2];
        p.sigma = x[3];
        if (p.g_co_ev < 0.0 || p.i0 <= 0.0 || p.sigma <= 0.0)
            return 1e30;  // outside the physical domain
        const PolaritonModes m = eigensystem(p);
        double ss = 0.0;
        for (std::size_t i = 0; i < measured.size(); ++i) {
            const double r = reflectance_at(m, p, measured.energy_ev[i]) - measured.value[i];
            ss += r * r;
        }
        return ss;
    };

    std::vector<double> x0{init.delta_c_ev, init.g_co_ev, init.i0, init.sigma};
    std::vector<double> step{0.02, 0.01, 0.2 * std::abs(init.i0) + 1e-4,
                             0.2 * std::abs(init.sigma) + 1e-4};

    SimplexResult r = nelder_mead(objective, x0, step, max_iter, tol);
    if (r.converged && r.iterations < max_iter) {
        // one polishing restart from the found optimum with a tighter simplex
        std::vector<double> step2(4);
        for (int j = 0; j < 4; ++j) step2[j] = 0.05 * step[j];
        SimplexResult r2 = nelder_mead(objective, r.x, step2,
                                       max_iter - r.iterations, tol);
        if (r2.fmin <= r.fmin) {
            r2.iterations += r.iterations;
            r = r2;
        }
    }

    FitResult out;
    out.params = init;
    out.params.delta_c_ev = r.x[0];
    out.params.g_co_ev = r.x[1];
    out.params.i0 = r.x[2];
    out.params.sigma = r.x[3];
    out.residual_ss = r.fmin;
    out.iterations = r.iterations;
    out.converged = r.converged;
    if (!r.converged)
        throw FitConvergenceError(out);
    return out;
}

} // namespace qbat
