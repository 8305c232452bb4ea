#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("qbat_cli_" + tag + "_" + std::to_string(++counter));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out_log = dir / "stdout.log";
    const fs::path err_log = dir / "stderr.log";
    const std::string cmd = std::string(QBAT_CLI_PATH) + " " + args + " >" +
                            out_log.string() + " 2>" + err_log.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_log);
    r.err = slurp(err_log);
    return r;
}

// value of "key = v" in a record file, empty if absent
std::string record_value(const fs::path& file, const std::string& key) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        const std::string prefix = key + " = ";
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return {};
}

} // namespace

TEST_CASE("spectrum runs are deterministic") {
    const fs::path d1 = fresh_dir("spec1");
    const fs::path d2 = fresh_dir("spec2");
    REQUIRE(run_cli("spectrum --device D5 --out " + d1.string(), d1).exit_code == 0);
    REQUIRE(run_cli("spectrum --device D5 --out " + d2.string(), d2).exit_code == 0);

    for (const char* name :
         {"D5_spectrum.csv", "D5_branches.txt", "D5_spectrum_provenance.txt"}) {
        const std::string a = slurp(d1 / name);
        REQUIRE_FALSE(a.empty());
        CHECK(a == slurp(d2 / name));
    }

    // 500 grid points plus the header line
    const std::string csv = slurp(d1 / "D5_spectrum.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 501);
    CHECK_FALSE(record_value(d1 / "D5_branches.txt", "lp_energy_ev").empty());

    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("unknown presets are rejected with the valid names") {
    const fs::path dir = fresh_dir("baddev");
    const RunResult r = run_cli("spectrum --device D9 --out " + dir.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.err, ContainsSubstring("D9"));
    CHECK_THAT(r.err, ContainsSubstring("D8"));
    fs::remove_all(dir);
}

TEST_CASE("missing device selection is a usage error") {
    const fs::path dir = fresh_dir("nodev");
    const RunResult r = run_cli("charge --out " + dir.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.err, ContainsSubstring("device"));
    fs::remove_all(dir);
}

TEST_CASE("cli parse errors exit nonzero, help exits zero") {
    const fs::path dir = fresh_dir("usage");
    CHECK(run_cli("", dir).exit_code == 1);
    CHECK(run_cli("--help", dir).exit_code == 0);
    CHECK(run_cli("charge --device D5 --ideal --out " + dir.string(), dir).exit_code == 1);
    fs::remove_all(dir);
}

TEST_CASE("charge produces the trajectory bundle deterministically") {
    const std::string setup = "charge --ideal --set run.t_start_ps=-0.5 --set run.t_end_ps=2 --out ";
    const fs::path d1 = fresh_dir("charge1");
    const fs::path d2 = fresh_dir("charge2");
    REQUIRE(run_cli(setup + d1.string(), d1).exit_code == 0);
    REQUIRE(run_cli(setup + d2.string(), d2).exit_code == 0);

    for (const char* name : {"ideal_trajectory.csv", "ideal_drr.csv",
                             "ideal_charge_report.txt", "ideal_charge_provenance.txt"}) {
        const std::string a = slurp(d1 / name);
        REQUIRE_FALSE(a.empty());
        CHECK(a == slurp(d2 / name));
    }

    const double e_max = std::atof(record_value(d1 / "ideal_charge_report.txt", "e_max_ev").c_str());
    const double tau = std::atof(record_value(d1 / "ideal_charge_report.txt", "tau_ps").c_str());
    CHECK(e_max > 0.0);
    CHECK(tau > 0.0);

    const std::string traj = slurp(d1 / "ideal_trajectory.csv");
    CHECK_THAT(traj, ContainsSubstring("time_ps,re_a,im_a,n_ph,pop_s0,pop_s1a,pop_s1b,pop_T,energy_ev"));

    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("charge without a pulse reports the domain failure") {
    const fs::path dir = fresh_dir("nopulse");
    const RunResult r = run_cli("charge --ideal --set pulse.r=0 --set run.t_end_ps=1 --out " +
                                    dir.string(),
                                dir);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(record_value(dir / "ideal_charge_report.txt", "error").empty());
    fs::remove_all(dir);
}

TEST_CASE("unrecognized parameters are flagged") {
    const fs::path dir = fresh_dir("badkey");
    const RunResult r =
        run_cli("charge --ideal --set run.t_edn=2 --out " + dir.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.err, ContainsSubstring("t_edn"));
    fs::remove_all(dir);
}

TEST_CASE("quick validation passes from the command line") {
    const fs::path dir = fresh_dir("validate");
    const RunResult r = run_cli("validate --quick --out " + dir.string(), dir);
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("PASS"));
    CHECK(fs::exists(dir / "validation_report.txt"));
    fs::remove_all(dir);
}

TEST_CASE("sweep summarizes the scaling trends") {
    const fs::path dir = fresh_dir("sweep");
    const RunResult r = run_cli(
        "sweep --ideal --set sweep.grid=2.2e10,3.0e10 --set run.t_start_ps=-0.5 "
        "--set run.t_end_ps=4 --set run.dt_ps=0.01 --out " +
            dir.string(),
        dir);
    REQUIRE(r.exit_code == 0);

    const std::string csv = slurp(dir / "ideal_sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 points
    CHECK(record_value(dir / "ideal_sweep_summary.txt", "points_failed") == "0");
    CHECK(record_value(dir / "ideal_sweep_summary.txt", "e_max_strictly_increasing") == "true");
    CHECK(record_value(dir / "ideal_sweep_summary.txt", "p_max_strictly_increasing") == "true");
    // the tau trend is reported, whichever way it comes out
    const std::string tau_flag =
        record_value(dir / "ideal_sweep_summary.txt", "tau_strictly_decreasing");
    CHECK((tau_flag == "true" || tau_flag == "false"));
    fs::remove_all(dir);
}

TEST_CASE("fit recovers the device that generated the spectrum") {
    const fs::path dir = fresh_dir("fit");
    REQUIRE(run_cli("spectrum --device D1 --out " + dir.string(), dir).exit_code == 0);
    const RunResult r =
        run_cli("fit " + (dir / "D1_spectrum.csv").string() + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);

    const fs::path report = dir / "D1_spectrum_fit.txt";
    const double g_co = std::atof(record_value(report, "g_co_ev").c_str());
    const double delta_c = std::atof(record_value(report, "delta_c_ev").c_str());
    CHECK(std::abs(g_co - 0.080) < 0.01 * 0.080);
    CHECK(std::abs(delta_c - 1.79) < 0.01 * 1.79);
    CHECK(record_value(report, "converged") == "true");
    fs::remove_all(dir);
}

TEST_CASE("electrical pairs cavity and control curves") {
    const fs::path dir = fresh_dir("elec");
    auto write_iv = [&](const std::string& name, double isc) {
        std::ofstream out(dir / name);
        out << "voltage_v,current_a\n";
        for (int k = 0; k <= 100; ++k) {
            const double v = double(k) / 100.0;
            out << v << "," << isc * (1.0 - v) << "\n";
        }
    };
    // cavity current is exactly twice the control current at every sample, so
    // the peak-power ratio is exactly 2
    write_iv("cell_cavity.csv", 2e-3);
    write_iv("cell_control.csv", 1e-3);

    std::ofstream eqe_csv(dir / "eqe_in.csv");
    eqe_csv << "wavelength_nm,photocurrent_a,incident_power_w\n625,2e-3,1e-2\n";
    eqe_csv.close();

    const RunResult r = run_cli("electrical " + (dir / "cell_cavity.csv").string() + " " +
                                    (dir / "cell_control.csv").string() + " --eqe " +
                                    (dir / "eqe_in.csv").string() + " --out " + dir.string(),
                                dir);
    REQUIRE(r.exit_code == 0);

    const std::string report = slurp(dir / "electrical_report.csv");
    CHECK_THAT(report, ContainsSubstring("device,v_mpp,p_mpp,ratio"));
    CHECK_THAT(report, ContainsSubstring("cell,0.5,"));
    CHECK_THAT(report, ContainsSubstring(",2\n"));

    const std::string eqe_report = slurp(dir / "eqe_report.csv");
    CHECK_THAT(eqe_report, ContainsSubstring("625,"));
    fs::remove_all(dir);
}

TEST_CASE("electrical warns about unpaired curves") {
    const fs::path dir = fresh_dir("elec_unpaired");
    std::ofstream out(dir / "solo_cavity.csv");
    out << "voltage_v,current_a\n";
    for (int k = 0; k <= 100; ++k) {
        const double v = double(k) / 100.0;
        out << v << "," << 1e-3 * (1.0 - v) << "\n";
    }
    out.close();

    const RunResult r =
        run_cli("electrical " + (dir / "solo_cavity.csv").string() + " --out " + dir.string(),
                dir);
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(r.err, ContainsSubstring("unpaired"));
    CHECK_THAT(slurp(dir / "electrical_report.csv"), ContainsSubstring("solo,"));
    fs::remove_all(dir);
}
