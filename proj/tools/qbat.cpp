// qbat: command-line front end for the quantum-battery toolkit.
//
// Subcommands: spectrum | fit | charge | sweep | validate | electrical.
// Exit codes: 0 success, 1 domain error (bad input), 2 numerical failure,
// 3 validation failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbat/config.hpp"
#include "qbat/csv.hpp"
#include "qbat/cumulant.hpp"
#include "qbat/devices.hpp"
#include "qbat/electrical.hpp"
#include "qbat/observables.hpp"
#include "qbat/polariton.hpp"
#include "qbat/validate.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "1.0.0";

using Record = std::vector<std::pair<std::string, std::string>>;

struct CommonArgs {
    std::string device;
    bool ideal = false;
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_device) {
    if (with_device) {
        cmd->add_option("--device", args.device, "Device preset (D1..D8)");
        cmd->add_flag("--ideal", args.ideal, "Use the idealized average device");
    }
    cmd->add_option("--config", args.config_path, "Configuration file (key = value)");
    cmd->add_option("--out", args.out_dir, "Output directory (created if missing)");
    cmd->add_option("--set", args.sets, "Parameter override key=value (repeatable)");
}

qbat::Config load_config(const CommonArgs& args) {
    qbat::Config cfg;
    if (!args.config_path.empty()) cfg.load_file(args.config_path);
    for (const auto& s : args.sets) cfg.set(s);
    return cfg;
}

qbat::DeviceSpec resolve_device(const CommonArgs& args, const qbat::Config& cfg) {
    const std::string name =
        !args.device.empty() ? args.device : cfg.get_string({"device"}, "");
    if (args.ideal) {
        if (!name.empty())
            throw qbat::DomainError("--ideal conflicts with an explicit device name");
        return qbat::idealized_device();
    }
    if (name.empty())
        throw qbat::DomainError("no device selected; pass --device D1..D8 or --ideal");
    if (name == "ideal") return qbat::idealized_device();
    return qbat::device_by_name(name);
}

qbat::DynamicsParams dynamics_params(const qbat::DeviceSpec& dev, const qbat::Config& cfg) {
    qbat::DynamicsParams p = qbat::dynamics_from_device(dev);
    p.n_molecules = cfg.get_double({"dynamics.n_molecules", "n_molecules"}, p.n_molecules);
    p.delta1_ev = cfg.get_double({"dynamics.delta1_ev", "delta1"}, p.delta1_ev);
    p.delta2_ev = cfg.get_double({"dynamics.delta2_ev", "delta2"}, p.delta2_ev);
    p.delta_t_ev = cfg.get_double({"dynamics.delta_t_ev", "delta_t"}, p.delta_t_ev);
    p.delta_c_ev = cfg.get_double({"dynamics.delta_c_ev", "delta_c"}, p.delta_c_ev);
    p.g_ev = cfg.get_double({"dynamics.g_ev", "g"}, p.g_ev);
    p.kappa_per_ps = cfg.get_double({"dynamics.kappa_per_ps", "kappa"}, p.kappa_per_ps);
    p.gamma_minus_per_ps =
        cfg.get_double({"dynamics.gamma_minus_per_ps", "gamma_minus"}, p.gamma_minus_per_ps);
    p.gamma_t_minus_per_ps = cfg.get_double({"dynamics.gamma_t_minus_per_ps", "gamma_t_minus"},
                                            p.gamma_t_minus_per_ps);
    p.gamma_z_per_ps = cfg.get_double({"dynamics.gamma_z_per_ps", "gamma_z"}, p.gamma_z_per_ps);
    p.gamma_isc_per_ps =
        cfg.get_double({"dynamics.gamma_isc_per_ps", "gamma_isc"}, p.gamma_isc_per_ps);
    const double nu = cfg.get_double({"dynamics.nu_ev", "nu"}, std::nan(""));
    if (!std::isnan(nu)) p.nu_ev = nu;
    p.pulse.r = cfg.get_double({"pulse.r", "r"}, p.pulse.r);
    p.pulse.sigma_t_ps = cfg.get_double({"pulse.sigma_t_ps", "sigma_t"}, p.pulse.sigma_t_ps);
    p.pulse.t0_ps = cfg.get_double({"pulse.t0_ps", "t0"}, p.pulse.t0_ps);
    return p;
}

void write_record(const fs::path& path, const Record& kv) {
    std::ofstream out(path);
    if (!out) throw qbat::ValidationError(path.string() + ": cannot open for writing");
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
    if (!out) throw qbat::ValidationError(path.string() + ": write failed");
}

Record provenance_base(const std::string& command, const qbat::Config& cfg) {
    Record rec;
    rec.emplace_back("tool", "qbat");
    rec.emplace_back("version", kToolVersion);
    rec.emplace_back("command", command);
    const long seed = cfg.get_int({"seed"}, 0);  // reserved; runs are deterministic
    rec.emplace_back("seed", std::to_string(seed));
    return rec;
}

void append_dynamics(Record& rec, const qbat::DynamicsParams& p, double t_start,
                     double t_end, double dt, const qbat::IntegrationOptions& io) {
    using qbat::format_double;
    rec.emplace_back("n_molecules", format_double(p.n_molecules));
    rec.emplace_back("delta1_ev", format_double(p.delta1_ev));
    rec.emplace_back("delta2_ev", format_double(p.delta2_ev));
    rec.emplace_back("delta_t_ev", format_double(p.delta_t_ev));
    rec.emplace_back("delta_c_ev", format_double(p.delta_c_ev));
    rec.emplace_back("g_ev", format_double(p.g_ev));
    rec.emplace_back("nu_ev", format_double(qbat::resolved_laser_ev(p)));
    rec.emplace_back("kappa_per_ps", format_double(p.kappa_per_ps));
    rec.emplace_back("gamma_minus_per_ps", format_double(p.gamma_minus_per_ps));
    rec.emplace_back("gamma_t_minus_per_ps", format_double(p.gamma_t_minus_per_ps));
    rec.emplace_back("gamma_z_per_ps", format_double(p.gamma_z_per_ps));
    rec.emplace_back("gamma_isc_per_ps", format_double(p.gamma_isc_per_ps));
    rec.emplace_back("pulse.r", format_double(p.pulse.r));
    rec.emplace_back("pulse.sigma_t_ps", format_double(p.pulse.sigma_t_ps));
    rec.emplace_back("pulse.t0_ps", format_double(p.pulse.t0_ps));
    rec.emplace_back("t_start_ps", format_double(t_start));
    rec.emplace_back("t_end_ps", format_double(t_end));
    rec.emplace_back("dt_ps", format_double(dt));
    rec.emplace_back("rel_tol", format_double(io.rel_tol));
    rec.emplace_back("abs_tol", format_double(io.abs_tol));
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

int run_spectrum(const CommonArgs& args) {
    using qbat::format_double;
    qbat::Config cfg = load_config(args);
    const qbat::DeviceSpec dev = resolve_device(args, cfg);

    qbat::CoupledOscillatorParams co;
    co.delta1_ev = cfg.get_double({"spectrum.delta1_ev", "delta1"}, dev.delta1_ev);
    co.delta2_ev = cfg.get_double({"spectrum.delta2_ev", "delta2"}, dev.delta2_ev);
    co.delta_c_ev = cfg.get_double({"spectrum.delta_c_ev", "delta_c"}, dev.delta_c_ev);
    co.g_co_ev = cfg.get_double({"spectrum.g_co_ev", "g_co"}, dev.g_co_ev);
    co.i0 = cfg.get_double({"spectrum.i0", "i0"}, dev.i0);
    co.sigma = cfg.get_double({"spectrum.sigma", "sigma"}, dev.sigma);
    const double e_min = cfg.get_double({"spectrum.e_min_ev"}, 1.4);
    const double e_max = cfg.get_double({"spectrum.e_max_ev"}, 2.4);
    const long points = cfg.get_int({"spectrum.points"}, 500);
    cfg.require_all_recognized();
    if (points < 2 || !(e_max > e_min))
        throw qbat::DomainError("spectrum grid needs points >= 2 and e_max > e_min");

    std::vector<double> grid(static_cast<std::size_t>(points));
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = e_min + (e_max - e_min) * double(i) / double(grid.size() - 1);
    const qbat::Spectrum spec = qbat::reflectance(co, grid);

    fs::create_directories(args.out_dir);
    const fs::path out_dir(args.out_dir);
    std::vector<std::vector<double>> rows;
    rows.reserve(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i)
        rows.push_back({spec.energy_ev[i], spec.value[i]});
    const fs::path csv_path = out_dir / (dev.name + "_spectrum.csv");
    qbat::write_csv_file(csv_path.string(), {"energy_ev", "reflectance"}, rows);

    const qbat::PolaritonModes modes = qbat::eigensystem(co);
    const qbat::RabiSplittings rabi = qbat::rabi_splittings(co);
    const char* branch[3] = {"lp", "mp", "up"};
    Record rep;
    for (int b = 0; b < 3; ++b) {
        rep.emplace_back(std::string(branch[b]) + "_energy_ev",
                         format_double(modes.energy_ev[std::size_t(b)]));
        rep.emplace_back(std::string(branch[b]) + "_photon_weight",
                         format_double(modes.photon_weight[std::size_t(b)]));
        rep.emplace_back(std::string(branch[b]) + "_dip_depth",
                         format_double(co.i0 * modes.photon_weight[std::size_t(b)]));
    }
    rep.emplace_back("rabi_lower_ev", format_double(rabi.lower_ev));
    rep.emplace_back("rabi_upper_ev", format_double(rabi.upper_ev));
    const fs::path branches_path = out_dir / (dev.name + "_branches.txt");
    write_record(branches_path, rep);

    Record prov = provenance_base("spectrum", cfg);
    prov.emplace_back("device", dev.name);
    prov.emplace_back("delta1_ev", format_double(co.delta1_ev));
    prov.emplace_back("delta2_ev", format_double(co.delta2_ev));
    prov.emplace_back("delta_c_ev", format_double(co.delta_c_ev));
    prov.emplace_back("g_co_ev", format_double(co.g_co_ev));
    prov.emplace_back("i0", format_double(co.i0));
    prov.emplace_back("sigma", format_double(co.sigma));
    prov.emplace_back("e_min_ev", format_double(e_min));
    prov.emplace_back("e_max_ev", format_double(e_max));
    prov.emplace_back("points", std::to_string(points));
    write_record(out_dir / (dev.name + "_spectrum_provenance.txt"), prov);

    std::cout << "wrote " << csv_path.string() << " and " << branches_path.string()
              << "\nbranches (eV): " << format_double(modes.energy_ev[0]) << " "
              << format_double(modes.energy_ev[1]) << " "
              << format_double(modes.energy_ev[2]) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

Record fit_record(const qbat::FitResult& fr, const std::string& error) {
    using qbat::format_double;
    Record rep;
    rep.emplace_back("delta_c_ev", format_double(fr.params.delta_c_ev));
    rep.emplace_back("g_co_ev", format_double(fr.params.g_co_ev));
    rep.emplace_back("i0", format_double(fr.params.i0));
    rep.emplace_back("sigma", format_double(fr.params.sigma));
    rep.emplace_back("residual_ss", format_double(fr.residual_ss));
    rep.emplace_back("iterations", std::to_string(fr.iterations));
    rep.emplace_back("converged", fr.converged ? "true" : "false");
    if (!error.empty()) rep.emplace_back("error", error);
    return rep;
}

int run_fit(const CommonArgs& args, const std::string& spectrum_file) {
    using qbat::format_double;
    qbat::Config cfg = load_config(args);
    const qbat::CsvTable table = qbat::read_csv_file(spectrum_file);
    qbat::Spectrum measured;
    measured.energy_ev = table.numeric_column("energy_ev");
    measured.value = table.numeric_column("reflectance");

    qbat::CoupledOscillatorParams init;
    init.delta1_ev = cfg.get_double({"fit.delta1_ev", "delta1"}, 1.80);
    init.delta2_ev = cfg.get_double({"fit.delta2_ev", "delta2"}, 1.98);
    init.delta_c_ev = cfg.get_double({"fit.init_delta_c_ev"}, 1.85);
    init.g_co_ev = cfg.get_double({"fit.init_g_co_ev"}, 0.10);
    init.i0 = cfg.get_double({"fit.init_i0"}, 0.012);
    init.sigma = cfg.get_double({"fit.init_sigma"}, 0.065);
    cfg.require_all_recognized();

    fs::create_directories(args.out_dir);
    const std::string stem = fs::path(spectrum_file).stem().string();
    const fs::path report_path = fs::path(args.out_dir) / (stem + "_fit.txt");

    Record prov = provenance_base("fit", cfg);
    prov.emplace_back("input", spectrum_file);
    prov.emplace_back("delta1_ev", format_double(init.delta1_ev));
    prov.emplace_back("delta2_ev", format_double(init.delta2_ev));
    write_record(fs::path(args.out_dir) / (stem + "_fit_provenance.txt"), prov);

    try {
        const qbat::FitResult fr = qbat::fit_reflectance(measured, init);
        write_record(report_path, fit_record(fr, ""));
        std::cout << "wrote " << report_path.string()
                  << "\ndelta_c = " << format_double(fr.params.delta_c_ev)
                  << " eV, g_co = " << format_double(fr.params.g_co_ev)
                  << " eV, i0 = " << format_double(fr.params.i0)
                  << ", sigma = " << format_double(fr.params.sigma)
                  << ", residual = " << format_double(fr.residual_ss) << "\n";
        return 0;
    } catch (const qbat::FitConvergenceError& e) {
        write_record(report_path, fit_record(e.best, e.what()));
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// ---------------------------------------------------------------------------
// charge
// ---------------------------------------------------------------------------

int run_charge(const CommonArgs& args) {
    using qbat::format_double;
    qbat::Config cfg = load_config(args);
    const qbat::DeviceSpec dev = resolve_device(args, cfg);
    qbat::DynamicsParams p = dynamics_params(dev, cfg);
    const double t_start = cfg.get_double({"run.t_start_ps", "t_start"}, -1.0);
    const double t_end = cfg.get_double({"run.t_end_ps", "t_end"}, 10.0);
    const double dt = cfg.get_double({"run.dt_ps", "dt"}, 0.005);
    qbat::IntegrationOptions io;
    io.rel_tol = cfg.get_double({"run.rel_tol"}, io.rel_tol);
    io.abs_tol = cfg.get_double({"run.abs_tol"}, io.abs_tol);
    qbat::IrfParams irf;
    irf.fwhm_ps = cfg.get_double({"irf.fwhm_ps"}, irf.fwhm_ps);
    cfg.require_all_recognized();

    fs::create_directories(args.out_dir);
    const fs::path out_dir(args.out_dir);
    const fs::path report_path = out_dir / (dev.name + "_charge_report.txt");

    Record prov = provenance_base("charge", cfg);
    prov.emplace_back("device", dev.name);
    append_dynamics(prov, p, t_start, t_end, dt, io);
    prov.emplace_back("irf.fwhm_ps", format_double(irf.fwhm_ps));
    write_record(out_dir / (dev.name + "_charge_provenance.txt"), prov);

    qbat::Trajectory traj;
    try {
        traj = qbat::integrate_cumulant(p, t_start, t_end,
                                        qbat::uniform_times(t_start, t_end, dt), io);
    } catch (const qbat::NumericalError& e) {
        Record rep;
        rep.emplace_back("device", dev.name);
        rep.emplace_back("error", e.what());
        write_record(report_path, rep);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const std::vector<double> energy = qbat::energy_series(traj);
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        rows.push_back({traj.time_ps[k], s.a.real(), s.a.imag(), s.n_ph,
                        s.s(0, 0).real(), s.s(1, 1).real(), s.s(2, 2).real(),
                        s.s(3, 3).real(), energy[k]});
    }
    const fs::path traj_path = out_dir / (dev.name + "_trajectory.csv");
    qbat::write_csv_file(traj_path.string(),
                         {"time_ps", "re_a", "im_a", "n_ph", "pop_s0", "pop_s1a",
                          "pop_s1b", "pop_T", "energy_ev"},
                         rows);

    const qbat::TimeSeries drr = qbat::delta_r_over_r(traj, irf);
    std::vector<std::vector<double>> drr_rows;
    drr_rows.reserve(drr.time_ps.size());
    for (std::size_t k = 0; k < drr.time_ps.size(); ++k)
        drr_rows.push_back({drr.time_ps[k], drr.value[k]});
    const fs::path drr_path = out_dir / (dev.name + "_drr.csv");
    qbat::write_csv_file(drr_path.string(), {"time_ps", "delta_r_over_r"}, drr_rows);

    try {
        const qbat::ChargingReport rep = qbat::charging_report(traj);
        Record rec;
        rec.emplace_back("device", dev.name);
        rec.emplace_back("n_molecules", format_double(rep.n_molecules));
        rec.emplace_back("nu_ev", format_double(rep.nu_ev));
        rec.emplace_back("e_max_ev", format_double(rep.e_max_ev));
        rec.emplace_back("tau_ps", format_double(rep.tau_ps));
        rec.emplace_back("p_max_ev_per_ps", format_double(rep.p_max_ev_per_ps));
        rec.emplace_back("max_trace_deviation", format_double(traj.max_trace_deviation));
        write_record(report_path, rec);
        std::cout << "wrote " << traj_path.string() << ", " << drr_path.string() << ", "
                  << report_path.string() << "\nE_max = " << format_double(rep.e_max_ev)
                  << " eV, tau = " << format_double(rep.tau_ps)
                  << " ps, P_max = " << format_double(rep.p_max_ev_per_ps) << " eV/ps\n";
        return 0;
    } catch (const qbat::DomainError& e) {
        // no stored energy (e.g. r = 0): record the report with the error
        Record rec;
        rec.emplace_back("device", dev.name);
        rec.emplace_back("n_molecules", format_double(p.n_molecules));
        rec.emplace_back("e_max_ev",
                         format_double(*std::max_element(energy.begin(), energy.end())));
        rec.emplace_back("error", e.what());
        write_record(report_path, rec);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const CommonArgs& args) {
    using qbat::format_double;
    qbat::Config cfg = load_config(args);
    const qbat::DeviceSpec dev = resolve_device(args, cfg);
    qbat::DynamicsParams base = dynamics_params(dev, cfg);
    std::vector<double> grid =
        cfg.get_double_list({"sweep.grid"}, qbat::default_sweep_grid());
    qbat::SweepOptions so;
    so.t_start_ps = cfg.get_double({"run.t_start_ps", "t_start"}, so.t_start_ps);
    so.t_end_ps = cfg.get_double({"run.t_end_ps", "t_end"}, so.t_end_ps);
    so.dt_ps = cfg.get_double({"run.dt_ps", "dt"}, so.dt_ps);
    so.integration.rel_tol = cfg.get_double({"run.rel_tol"}, so.integration.rel_tol);
    so.integration.abs_tol = cfg.get_double({"run.abs_tol"}, so.integration.abs_tol);
    cfg.require_all_recognized();

    std::sort(grid.begin(), grid.end());
    const std::vector<qbat::SweepPoint> points = qbat::scaling_sweep(base, grid, so);

    fs::create_directories(args.out_dir);
    const fs::path out_dir(args.out_dir);
    std::vector<std::vector<double>> rows;
    std::vector<const qbat::SweepPoint*> ok_points;
    Record summary;
    std::size_t failures = 0;
    for (const auto& pt : points) {
        if (pt.ok) {
            rows.push_back({pt.n_molecules, pt.report.e_max_ev, pt.report.tau_ps,
                            pt.report.p_max_ev_per_ps});
            ok_points.push_back(&pt);
        } else {
            ++failures;
            summary.emplace_back("failed_n_" + format_double(pt.n_molecules), pt.error);
            std::cerr << "warning: sweep point N = " << format_double(pt.n_molecules)
                      << " failed: " << pt.error << "\n";
        }
    }
    const fs::path csv_path = out_dir / (dev.name + "_sweep.csv");
    qbat::write_csv_file(csv_path.string(),
                         {"n_molecules", "e_max_ev", "tau_ps", "p_max_ev_per_ps"}, rows);

    auto strictly = [&ok_points](auto pick, bool decreasing) {
        for (std::size_t i = 1; i < ok_points.size(); ++i) {
            const double a = pick(ok_points[i - 1]->report);
            const double b = pick(ok_points[i]->report);
            if (decreasing ? !(b < a) : !(b > a)) return false;
        }
        return !ok_points.empty();
    };
    const bool tau_dec = strictly([](const qbat::ChargingReport& r) { return r.tau_ps; }, true);
    const bool emax_inc =
        strictly([](const qbat::ChargingReport& r) { return r.e_max_ev; }, false);
    const bool pmax_inc =
        strictly([](const qbat::ChargingReport& r) { return r.p_max_ev_per_ps; }, false);

    Record head;
    head.emplace_back("points_total", std::to_string(points.size()));
    head.emplace_back("points_failed", std::to_string(failures));
    head.emplace_back("tau_strictly_decreasing", tau_dec ? "true" : "false");
    head.emplace_back("e_max_strictly_increasing", emax_inc ? "true" : "false");
    head.emplace_back("p_max_strictly_increasing", pmax_inc ? "true" : "false");
    head.insert(head.end(), summary.begin(), summary.end());
    const fs::path summary_path = out_dir / (dev.name + "_sweep_summary.txt");
    write_record(summary_path, head);

    Record prov = provenance_base("sweep", cfg);
    prov.emplace_back("device", dev.name);
    append_dynamics(prov, base, so.t_start_ps, so.t_end_ps, so.dt_ps, so.integration);
    std::string grid_str;
    for (double n : grid) grid_str += (grid_str.empty() ? "" : ",") + format_double(n);
    prov.emplace_back("sweep.grid", grid_str);
    write_record(out_dir / (dev.name + "_sweep_provenance.txt"), prov);

    std::cout << "wrote " << csv_path.string() << " and " << summary_path.string() << "\n"
              << (points.size() - failures) << "/" << points.size() << " points ok"
              << ", tau decreasing: " << (tau_dec ? "true" : "false")
              << ", P_max increasing: " << (pmax_inc ? "true" : "false") << "\n";
    if (failures == points.size()) {
        std::cerr << "error: every sweep point failed\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int run_validate(const CommonArgs& args, bool quick) {
    using qbat::format_double;
    qbat::Config cfg = load_config(args);
    cfg.require_all_recognized();

    qbat::ValidationOptions vo;
    vo.quick = quick;
    const std::vector<qbat::CheckResult> checks = qbat::run_validation_suite(vo);

    fs::create_directories(args.out_dir);
    Record rep;
    bool all_pass = true;
    for (const auto& c : checks) {
        all_pass = all_pass && c.pass;
        std::string line = std::string(c.pass ? "PASS" : "FAIL") +
                           " measured=" + format_double(c.measured) +
                           " tolerance=" + format_double(c.tolerance);
        if (!c.note.empty()) line += " (" + c.note + ")";
        rep.emplace_back(c.name, line);
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                  << ": measured=" << format_double(c.measured)
                  << " tolerance=" << format_double(c.tolerance)
                  << (c.note.empty() ? "" : "  [" + c.note + "]") << "\n";
    }
    const fs::path report_path = fs::path(args.out_dir) / "validation_report.txt";
    write_record(report_path, rep);

    Record prov = provenance_base("validate", cfg);
    prov.emplace_back("quick", quick ? "true" : "false");
    prov.emplace_back("checks", std::to_string(checks.size()));
    write_record(fs::path(args.out_dir) / "validate_provenance.txt", prov);

    std::cout << "wrote " << report_path.string() << "\n";
    return all_pass ? 0 : 3;
}

// ---------------------------------------------------------------------------
// electrical
// ---------------------------------------------------------------------------

qbat::IvCurve read_iv(const std::string& path) {
    const qbat::CsvTable table = qbat::read_csv_file(path);
    const auto v = table.numeric_column("voltage_v");
    const auto i = table.numeric_column("current_a");
    qbat::IvCurve curve;
    curve.points.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) curve.points[k] = {v[k], i[k]};
    return curve;
}

int run_electrical(const CommonArgs& args, const std::vector<std::string>& iv_files,
                   const std::string& eqe_file) {
    using qbat::format_double;
    qbat::Config cfg = load_config(args);
    cfg.require_all_recognized();
    if (iv_files.empty() && eqe_file.empty())
        throw qbat::DomainError("electrical: no input files given");

    struct Pair {
        std::optional<qbat::IvCurve> cavity, control;
    };
    std::map<std::string, Pair> devices;
    for (const auto& f : iv_files) {
        const std::string stem = fs::path(f).stem().string();
        const auto tail = stem.rfind('_');
        const std::string suffix = tail == std::string::npos ? "" : stem.substr(tail + 1);
        if (suffix == "cavity")
            devices[stem.substr(0, tail)].cavity = read_iv(f);
        else if (suffix == "control")
            devices[stem.substr(0, tail)].control = read_iv(f);
        else
            devices[stem].cavity = read_iv(f);  // bare name: treat as cavity
    }

    fs::create_directories(args.out_dir);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> warnings;
    for (const auto& [name, pair] : devices) {
        if (!pair.cavity) {
            warnings.push_back("device " + name + " has a control curve but no cavity curve");
            std::cerr << "warning: " << warnings.back() << "\n";
            continue;
        }
        const qbat::MppResult mpp = qbat::max_power_point(*pair.cavity);
        std::string ratio;
        if (pair.control) {
            ratio = format_double(qbat::power_ratio(*pair.cavity, *pair.control));
        } else {
            warnings.push_back("device " + name + " is unpaired: no control curve, "
                               "power ratio unavailable");
            std::cerr << "warning: " << warnings.back() << "\n";
        }
        rows.push_back({name, format_double(mpp.voltage_v), format_double(mpp.power_w),
                        ratio});
    }
    const fs::path report_path = fs::path(args.out_dir) / "electrical_report.csv";
    qbat::write_csv_file(report_path.string(), {"device", "v_mpp", "p_mpp", "ratio"}, rows);
    std::cout << "wrote " << report_path.string() << "\n";

    if (!eqe_file.empty()) {
        const qbat::CsvTable table = qbat::read_csv_file(eqe_file);
        const auto wl = table.numeric_column("wavelength_nm");
        const auto cur = table.numeric_column("photocurrent_a");
        const auto pw = table.numeric_column("incident_power_w");
        std::vector<std::vector<double>> eqe_rows;
        eqe_rows.reserve(wl.size());
        for (std::size_t k = 0; k < wl.size(); ++k) {
            const qbat::EqePoint pt = qbat::make_eqe_point(wl[k], cur[k], pw[k]);
            eqe_rows.push_back({pt.wavelength_nm, pt.photon_energy_ev, pt.eqe});
        }
        const fs::path eqe_path = fs::path(args.out_dir) / "eqe_report.csv";
        qbat::write_csv_file(eqe_path.string(),
                             {"wavelength_nm", "photon_energy_ev", "eqe"}, eqe_rows);
        std::cout << "wrote " << eqe_path.string() << "\n";
    }

    Record prov = provenance_base("electrical", cfg);
    for (std::size_t k = 0; k < iv_files.size(); ++k)
        prov.emplace_back("input_" + std::to_string(k), iv_files[k]);
    if (!eqe_file.empty()) prov.emplace_back("eqe_input", eqe_file);
    prov.emplace_back("sign_convention", "normalized: I_sc > 0, V_oc > 0, P = I*V");
    for (std::size_t k = 0; k < warnings.size(); ++k)
        prov.emplace_back("warning_" + std::to_string(k), warnings[k]);
    write_record(fs::path(args.out_dir) / "electrical_provenance.txt", prov);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Microcavity quantum-battery simulation toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonArgs a_spectrum, a_fit, a_charge, a_sweep, a_validate, a_electrical;
    std::string fit_file, eqe_file;
    std::vector<std::string> iv_files;
    bool quick = false;

    CLI::App* c_spectrum =
        app.add_subcommand("spectrum", "Steady-state reflectance of a device");
    add_common(c_spectrum, a_spectrum, true);

    CLI::App* c_fit =
        app.add_subcommand("fit", "Fit the coupled-oscillator model to a spectrum CSV");
    c_fit->add_option("spectrum_csv", fit_file, "Measured spectrum (energy_ev,reflectance)")
        ->required();
    add_common(c_fit, a_fit, false);

    CLI::App* c_charge =
        app.add_subcommand("charge", "Pulse-charging dynamics of a device");
    add_common(c_charge, a_charge, true);

    CLI::App* c_sweep =
        app.add_subcommand("sweep", "Charging observables across molecule numbers");
    add_common(c_sweep, a_sweep, true);

    CLI::App* c_validate =
        app.add_subcommand("validate", "Run the oracle cross-check suite");
    c_validate->add_flag("--quick", quick, "Skip the dense-oracle and catalog checks");
    add_common(c_validate, a_validate, false);

    CLI::App* c_electrical =
        app.add_subcommand("electrical", "Maximum power points and cavity/control ratios");
    c_electrical->add_option("iv_csv", iv_files,
                             "I-V curves, named <device>_cavity.csv / <device>_control.csv");
    c_electrical->add_option("--eqe", eqe_file,
                             "EQE input (wavelength_nm,photocurrent_a,incident_power_w)");
    add_common(c_electrical, a_electrical, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_spectrum->parsed()) return run_spectrum(a_spectrum);
        if (c_fit->parsed()) return run_fit(a_fit, fit_file);
        if (c_charge->parsed()) return run_charge(a_charge);
        if (c_sweep->parsed()) return run_sweep(a_sweep);
        if (c_validate->parsed()) return run_validate(a_validate, quick);
        if (c_electrical->parsed()) return run_electrical(a_electrical, iv_files, eqe_file);
    } catch (const qbat::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qbat::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qbat::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
