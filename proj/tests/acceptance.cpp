// Release gate: runs the ten acceptance checks and prints one line each.
// Exit status is the number of failed checks. Optional arguments select a
// subset by number, e.g. `acceptance 2 5`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbat/devices.hpp"
#include "qbat/electrical.hpp"
#include "qbat/observables.hpp"
#include "qbat/polariton.hpp"
#include "qbat/validate.hpp"

using namespace qbat;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string pct(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f%%", 100.0 * x);
    return buf;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

CoupledOscillatorParams co_of(const DeviceSpec& d) {
    CoupledOscillatorParams p;
    p.delta1_ev = d.delta1_ev;
    p.delta2_ev = d.delta2_ev;
    p.delta_c_ev = d.delta_c_ev;
    p.g_co_ev = d.g_co_ev;
    p.i0 = d.i0;
    p.sigma = d.sigma;
    return p;
}

DynamicsParams params_of(const DeviceSpec& d) {
    DynamicsParams p;
    p.n_molecules = d.n_molecules;
    p.delta_c_ev = d.delta_c_ev;
    p.g_ev = d.g_ev;
    p.kappa_per_ps = d.kappa_per_ps;
    p.gamma_minus_per_ps = d.gamma_minus_per_ps;
    p.gamma_t_minus_per_ps = d.gamma_t_minus_per_ps;
    p.gamma_z_per_ps = d.gamma_z_per_ps;
    p.gamma_isc_per_ps = d.gamma_isc_per_ps;
    return p;
}

// 1. stack geometry reproduces the published absorber counts and couplings
Outcome catalog_regression() {
    double worst_n = 0.0, worst_g = 0.0, mean_g = 0.0;
    std::string worst_g_name;
    for (const auto& d : device_catalog()) {
        const double n = absorber_count(d.stack);
        const double g = bare_coupling(d.g_co_ev, n);
        worst_n = std::max(worst_n, std::abs(n - d.ref_n_absorbers) / d.ref_n_absorbers);
        const double gd = std::abs(g - d.ref_g_ev) / d.ref_g_ev;
        if (gd > worst_g) {
            worst_g = gd;
            worst_g_name = d.name;
        }
        mean_g += d.ref_g_ev;
    }
    mean_g /= double(device_catalog().size());

    Outcome o;
    const bool n_ok = worst_n <= 0.01;
    const bool g_ok = worst_g <= 0.005;
    const bool mean_ok = std::abs(mean_g - 8.37e-9) <= 0.02e-9;
    o.pass = n_ok && g_ok && mean_ok;
    o.detail = "max N dev " + pct(worst_n) + " (<=1%), max g dev " + pct(worst_g) + " at " +
               worst_g_name + " (<=0.5%), mean g " + num(mean_g * 1e9) +
               " neV (8.37 +- 0.02)";
    return o;
}

// 2. reflectance fits round-trip every preset from a generic start
Outcome fit_round_trip() {
    double worst = 0.0;
    std::string worst_name;
    std::string failed;
    for (const auto& d : device_catalog()) {
        const auto truth = co_of(d);
        const Spectrum synth = reflectance(truth);
        CoupledOscillatorParams init;
        init.delta_c_ev = 1.85;
        init.g_co_ev = 0.10;
        init.i0 = 0.012;
        init.sigma = 0.065;
        try {
            const FitResult r = fit_reflectance(synth, init);
            const double dev = std::max(
                {std::abs(r.params.delta_c_ev - truth.delta_c_ev) / truth.delta_c_ev,
                 std::abs(r.params.g_co_ev - truth.g_co_ev) / truth.g_co_ev,
                 std::abs(r.params.i0 - truth.i0) / truth.i0,
                 std::abs(r.params.sigma - truth.sigma) / truth.sigma});
            if (dev > worst) {
                worst = dev;
                worst_name = d.name;
            }
        } catch (const FitConvergenceError&) {
            failed += failed.empty() ? d.name : ", " + d.name;
        }
    }
    Outcome o;
    o.pass = failed.empty() && worst <= 0.01;
    o.detail = "worst parameter dev " + pct(worst) + " at " + worst_name + " (<=1%)";
    if (!failed.empty()) o.detail += "; no convergence: " + failed;
    return o;
}

// 3. most-photonic branch: LP for D1-D6, UP for D7-D8
Outcome photonic_character() {
    std::string got;
    bool ok = true;
    for (const auto& d : device_catalog()) {
        const auto m = eigensystem(co_of(d));
        int arg = 0;
        for (int i = 1; i < 3; ++i)
            if (m.photon_weight[std::size_t(i)] > m.photon_weight[std::size_t(arg)]) arg = i;
        const int want = (d.name == "D7" || d.name == "D8") ? 2 : 0;
        ok = ok && arg == want;
        const char* label[3] = {"LP", "MP", "UP"};
        got += (got.empty() ? "" : " ") + d.name + ":" + label[arg];
    }
    Outcome o;
    o.pass = ok;
    o.detail = got;
    return o;
}

// 4. zero-coupling dynamics against the closed forms
Outcome exact_limits() {
    const CheckResult rates = check_cumulant_rate_equation();
    const CheckResult cavity = check_cumulant_driven_cavity();
    Outcome o;
    o.pass = rates.pass && cavity.pass;
    o.detail = "rate-equation dev " + num(rates.measured) + " (<=" + num(rates.tolerance) +
               "), driven-cavity dev " + num(cavity.measured) + " (<=" +
               num(cavity.tolerance) + ")";
    return o;
}

// 5. cumulant vs dense solver at one and two molecules
Outcome oracle_agreement() {
    const auto checks = check_oracle_agreement();
    Outcome o;
    o.pass = true;
    for (const auto& c : checks) {
        o.pass = o.pass && c.pass;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += c.name + " " + num(c.measured) + " (<=" + num(c.tolerance) + ")";
    }
    return o;
}

// 6. trace, hermiticity, and positivity along all catalog trajectories
Outcome conservation_suite() {
    const auto checks = check_catalog_conservation();
    Outcome o;
    o.pass = true;
    for (const auto& c : checks) {
        o.pass = o.pass && c.pass;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += c.name + " " + num(c.measured) + " (<=" + num(c.tolerance) + ")";
    }
    return o;
}

// 7. intersystem crossing dominates one picosecond after the pulse
Outcome triplet_crossover() {
    DynamicsParams p = params_of(device_by_name("D5"));
    const auto times = uniform_times(-1.0, 10.0, 0.01);
    const Trajectory traj = integrate_cumulant(p, -1.0, 10.0, times);

    double min_margin = 1e300, peak_triplet = 0.0;
    for (std::size_t i = 0; i < traj.time_ps.size(); ++i) {
        const auto& s = traj.states[i];
        peak_triplet = std::max(peak_triplet, s.s(3, 3).real());
        if (traj.time_ps[i] <= 1.0) continue;
        min_margin = std::min(
            min_margin, s.s(3, 3).real() - s.s(1, 1).real() - s.s(2, 2).real());
    }
    Outcome o;
    o.pass = min_margin > 0.0 && peak_triplet > 0.0;
    o.detail = "min (triplet - singlets) past 1 ps: " + num(min_margin) +
               ", peak triplet " + num(peak_triplet);
    return o;
}

// 8. charging is superextensive across the idealized-device sweep
Outcome superextensive_scaling() {
    DynamicsParams base = params_of(idealized_device());
    const std::vector<double> grid{2.2e10, 3.0e10, 5.0e10, 6.2e10};
    const auto pts = scaling_sweep(base, grid);

    Outcome o;
    std::string taus;
    bool all_ok = true, tau_dec = true, e_inc = true, p_inc = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].ok) {
            all_ok = false;
            continue;
        }
        taus += (taus.empty() ? "tau/ps: " : " ") + num(pts[i].report.tau_ps);
        if (i == 0) continue;
        tau_dec = tau_dec && pts[i].report.tau_ps < pts[i - 1].report.tau_ps;
        e_inc = e_inc && pts[i].report.e_max_ev > pts[i - 1].report.e_max_ev;
        p_inc = p_inc && pts[i].report.p_max_ev_per_ps > pts[i - 1].report.p_max_ev_per_ps;
    }
    o.pass = all_ok && tau_dec && e_inc && p_inc;
    o.detail = taus + "; tau decreasing: " + (tau_dec ? "yes" : "no") +
               ", E_max increasing: " + (e_inc ? "yes" : "no") +
               ", P_max increasing: " + (p_inc ? "yes" : "no");
    if (!all_ok) o.detail += "; some points failed";
    return o;
}

// 9. ringdown spectrum peaks on the coupled-oscillator lines
Outcome spectral_agreement() {
    const SpectralCheck c = spectral_crosscheck();
    Outcome o;
    o.pass = c.max_bin_error <= 1.0;
    o.detail = "max peak offset " + num(c.max_bin_error) + " bins (<=1), bin " +
               num(c.bin_rad_per_ps) + " rad/ps";
    return o;
}

// 10. electrical utilities on the analytic fixture
Outcome electrical_fixture() {
    IvCurve c;
    for (int k = 0; k <= 100; ++k) {
        const double v = double(k) / 100.0;
        c.points.push_back({v, 1e-3 * (1.0 - v)});
    }
    const MppResult r = max_power_point(c);
    const double ratio = power_ratio(c, c);
    Outcome o;
    o.pass = std::abs(r.voltage_v - 0.5) <= 0.01 && ratio == 1.0;
    o.detail = "V_mpp " + num(r.voltage_v) + " V (0.5 +- 0.01), identical-curve ratio " +
               num(ratio) + " (== 1)";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "catalog-regression", 1, catalog_regression},
        {2, "fit-round-trip", 30, fit_round_trip},
        {3, "photonic-character", 1, photonic_character},
        {4, "exact-limit-dynamics", 10, exact_limits},
        {5, "oracle-agreement", 120, oracle_agreement},
        {6, "conservation-suite", 300, conservation_suite},
        {7, "triplet-crossover", 60, triplet_crossover},
        {8, "superextensive-scaling", 600, superextensive_scaling},
        {9, "spectral-cross-check", 60, spectral_agreement},
        {10, "electrical-fixture", 1, electrical_fixture},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.pass && in_budget;
        failures += pass ? 0 : 1;
        std::printf("%s  %2d  %-24s %6.1fs/%gs  %s%s\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, secs, c.budget_s, o.detail.c_str(),
                    in_budget ? "" : "  [over budget]");
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failures, ran);
    return failures;
}
