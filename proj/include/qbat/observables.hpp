#pragma once

// Thermodynamic and spectroscopic observables derived from a trajectory:
// stored energy per molecule, instrument-convolved transient reflectance,
// charging time, peak charging power, and the N-scaling sweep.

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "qbat/core.hpp"
#include "qbat/cumulant.hpp"

namespace qbat {

/// Stored energy per molecule in eV: each populated level weighted by its
/// bare energy (laboratory frame, ground state at zero).
inline double energy_density(const CumulantState& s, const DynamicsParams& p) {
    return p.delta1_ev * s.s(1, 1).real() + p.delta2_ev * s.s(2, 2).real() +
           p.delta_t_ev * s.s(3, 3).real();
}

inline std::vector<double> energy_series(const Trajectory& traj) {
    std::vector<double> e(traj.states.size());
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = energy_density(traj.states[i], traj.params);
    return e;
}

/// Total excited population per molecule (singlets plus triplet).
inline double excited_population(const CumulantState& s) {
    return s.s(1, 1).real() + s.s(2, 2).real() + s.s(3, 3).real();
}

struct TimeSeries {
    std::vector<double> time_ps;
    std::vector<double> value;
};

struct IrfParams {
    double fwhm_ps = 0.050;  ///< instrument response, 50 fs FWHM
};

namespace detail {

inline double check_uniform_grid(const std::vector<double>& t) {
    if (t.size() < 2) throw DomainError("time grid needs at least two samples");
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw DomainError("time grid must be increasing");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * dt)
            throw DomainError("time grid must be uniform");
    }
    return dt;
}

} // namespace detail

/// Transient reflectance proxy: the summed excited population convolved with
/// a unit-area Gaussian instrument response (proportionality constant one).
/// The trajectory must be sampled uniformly, finer than fwhm/5.
inline TimeSeries delta_r_over_r(const Trajectory& traj, const IrfParams& irf = {}) {
    if (!(irf.fwhm_ps > 0.0)) throw DomainError("IRF fwhm must be positive");
    const double dt = detail::check_uniform_grid(traj.time_ps);
    if (!(dt < irf.fwhm_ps / 5.0))
        throw DomainError("time grid must be finer than one fifth of the IRF fwhm");

    const std::size_t n = traj.states.size();
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = excited_population(traj.states[i]);

    // discrete Gaussian kernel, truncated at 6 sigma, normalized to unit area
    const double sigma = irf.fwhm_ps / 2.3548200450309493;
    const int half = int(std::ceil(6.0 * sigma / dt));
    std::vector<double> kernel(2 * half + 1);
    double area = 0.0;
    for (int k = -half; k <= half; ++k) {
        const double x = double(k) * dt / sigma;
        kernel[k + half] = std::exp(-0.5 * x * x);
        area += kernel[k + half] * dt;
    }
    for (double& k : kernel) k /= area;

    TimeSeries out;
    out.time_ps = traj.time_ps;
    out.value.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
            const auto j = static_cast<std::ptrdiff_t>(i) - k;
            if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;  // zero outside
            acc += kernel[k + half] * raw[std::size_t(j)];
        }
        out.value[i] = acc * dt;
    }
    return out;
}

// ---------------------------------------------------------------------------
// charging metrics
// ---------------------------------------------------------------------------

/// Charging time: interval from the pulse onset t0 - sqrt(2) sigma_t to the
/// first crossing of half the maximum stored energy (linear interpolation).
inline double charging_time(const std::vector<double>& time_ps,
                            const std::vector<double>& energy_ev,
                            const PulseParams& pulse) {
    if (time_ps.size() != energy_ev.size() || time_ps.size() < 2)
        throw DomainError("charging_time: need matching series with >= 2 samples");
    const double e_max = *std::max_element(energy_ev.begin(), energy_ev.end());
    if (!(e_max > 0.0))
        throw DomainError("charging_time undefined: stored energy never rises above zero");

    const double half = 0.5 * e_max;
    const double t_start = pulse.t0_ps - std::numbers::sqrt2 * pulse.sigma_t_ps;

    double t_half = time_ps.front();
    bool found = false;
    for (std::size_t i = 0; i < energy_ev.size(); ++i) {
        if (energy_ev[i] >= half) {
            if (i == 0) {
                t_half = time_ps[0];
            } else {
                const double f = (half - energy_ev[i - 1]) / (energy_ev[i] - energy_ev[i - 1]);
                t_half = time_ps[i - 1] + f * (time_ps[i] - time_ps[i - 1]);
            }
            found = true;
            break;
        }
    }
    if (!found)
        throw NumericalError("charging_time: half maximum never crossed");
    return t_half - t_start;
}

struct ChargingReport {
    double n_molecules = 0.0;
    double e_max_ev = 0.0;         ///< peak stored energy per molecule
    double tau_ps = 0.0;           ///< charging time
    double p_max_ev_per_ps = 0.0;  ///< e_max / tau
    double nu_ev = 0.0;            ///< laser frequency used
};

inline ChargingReport charging_report(const Trajectory& traj) {
    const std::vector<double> e = energy_series(traj);
    ChargingReport r;
    r.n_molecules = traj.params.n_molecules;
    r.nu_ev = traj.nu_ev;
    r.e_max_ev = *std::max_element(e.begin(), e.end());
    r.tau_ps = charging_time(traj.time_ps, e, traj.params.pulse);
    r.p_max_ev_per_ps = r.e_max_ev / r.tau_ps;
    return r;
}

// ---------------------------------------------------------------------------
// N-scaling sweep
// ---------------------------------------------------------------------------

struct SweepPoint {
    double n_molecules = 0.0;
    ChargingReport report;  ///< valid when ok
    bool ok = false;
    std::string error;      ///< failure reason when !ok
};

struct SweepOptions {
    double t_start_ps = -1.0;
    double t_end_ps = 10.0;
    double dt_ps = 0.01;
    IntegrationOptions integration;
};

/// Run the charging protocol over a list of molecule numbers. The pulse
/// rescales with sqrt(r N) automatically and the laser is retuned to the
/// lower polariton at each N. Points run in parallel; the result order
/// follows the input order and failed points are flagged, not fatal.
inline std::vector<SweepPoint> scaling_sweep(const DynamicsParams& base,
                                             const std::vector<double>& n_values,
                                             const SweepOptions& opt = {}) {
    auto run_point = [&](double n) {
        SweepPoint pt;
        pt.n_molecules = n;
        try {
            DynamicsParams p = base;
            p.n_molecules = n;
            p.nu_ev.reset();  // retune to the lower polariton for this N
            const auto times = uniform_times(opt.t_start_ps, opt.t_end_ps, opt.dt_ps);
            const Trajectory traj =
                integrate_cumulant(p, opt.t_start_ps, opt.t_end_ps, times, opt.integration);
            pt.report = charging_report(traj);
            pt.ok = true;
        } catch (const std::exception& ex) {
            pt.error = ex.what();
        }
        return pt;
    };

    std::vector<std::future<SweepPoint>> jobs;
    jobs.reserve(n_values.size());
    for (double n : n_values)
        jobs.push_back(std::async(std::launch::async, run_point, n));
    std::vector<SweepPoint> out;
    out.reserve(n_values.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

/// Default sweep grid: the eight catalog molecule numbers plus twenty
/// log-spaced interpolants across the same range.
inline std::vector<double> default_sweep_grid() {
    std::vector<double> n;
    for (const auto& d : device_catalog()) n.push_back(d.n_molecules);
    const double lo = *std::min_element(n.begin(), n.end());
    const double hi = *std::max_element(n.begin(), n.end());
    for (int i = 1; i <= 20; ++i) {
        const double f = double(i) / 21.0;
        n.push_back(lo * std::pow(hi / lo, f));
    }
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-6 * a; }),
            n.end());
    return n;
}

} // namespace qbat
