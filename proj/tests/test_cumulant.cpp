#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qbat/cumulant.hpp"
#include "qbat/devices.hpp"
#include "qbat/observables.hpp"
#include "qbat/polariton.hpp"

using namespace qbat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

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

// true when X_ab is a coherence between the triplet and another level
bool triplet_coherence(int a, int b) { return (a == 3) != (b == 3); }

} // namespace

TEST_CASE("flat layout invariants") {
    CHECK(cumulant_flat_size() == 189);
    CHECK(layout::flat_size == 5 + 16 + 32 + 136);

    // conjugation partner is an involution and lands in the m <= n wedge
    for (int m = 0; m < 16; ++m) {
        for (int n = m; n < 16; ++n) {
            auto [p, q] = layout::conj_partner(m, n);
            CHECK(p <= q);
            auto [m2, n2] = layout::conj_partner(p, q);
            CHECK(m2 == m);
            CHECK(n2 == n);
        }
    }
}

TEST_CASE("flatten and unflatten are inverse on the flat vector") {
    // deterministic pseudo-random fill
    std::vector<double> y(cumulant_flat_size());
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (double& v : y) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        v = double(state >> 11) / double(1ull << 53) - 0.5;
    }
    CumulantState s;
    unflatten(y, s);
    std::vector<double> y2;
    flatten(s, y2);
    REQUIRE(y2.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y2[i] == y[i]);
}

TEST_CASE("unflattened states are Hermitian by construction") {
    std::vector<double> y(cumulant_flat_size(), 0.25);
    CumulantState s;
    unflatten(y, s);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(s.s(a, b) == std::conj(s.s(b, a)));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d)
                    CHECK(s.p2(a, b, c, d) == std::conj(s.p2(b, a, d, c)));
}

TEST_CASE("ground state is stationary without drive") {
    const CumulantState g = ground_state();
    CHECK_THAT(g.trace(), WithinAbs(1.0, 1e-15));

    DynamicsParams p = params_of(device_by_name("D5"));
    const CumulantState ds = cumulant_rhs(p, 0.0, g, [](double) { return 0.0; });
    std::vector<double> flat;
    flatten(ds, flat);
    for (double v : flat) CHECK_THAT(v, WithinAbs(0.0, 1e-18));
}

TEST_CASE("product state construction") {
    const CumulantState s = product_state({0.1, 0.3, 0.2, 0.4});
    CHECK_THAT(s.trace(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(s.s(1, 1).real(), WithinAbs(0.3, 1e-15));
    CHECK_THAT(s.p2(1, 1, 3, 3).real(), WithinAbs(0.12, 1e-15));
    CHECK(s.a == complexd{});

    CHECK_THROWS_AS(product_state({-0.1, 0.5, 0.3, 0.3}), DomainError);
    CHECK_THROWS_AS(product_state({0.3, 0.3, 0.3, 0.3}), DomainError);
}

TEST_CASE("laser tunes to the lower polariton") {
    DynamicsParams p = params_of(idealized_device());
    CoupledOscillatorParams co;
    co.delta_c_ev = p.delta_c_ev;
    co.g_co_ev = collective_coupling(p.g_ev, p.n_molecules);
    CHECK_THAT(tuned_laser_ev(p), WithinAbs(eigensystem(co).energy_ev[0], 1e-14));
    CHECK_THAT(tuned_laser_ev(p), WithinAbs(1.745543, 1e-6));

    p.nu_ev = 1.7;
    CHECK(resolved_laser_ev(p) == 1.7);
    p.nu_ev.reset();
    CHECK(resolved_laser_ev(p) == tuned_laser_ev(p));
}

TEST_CASE("parameter validation") {
    DynamicsParams p;
    p.n_molecules = 0.5;
    CHECK_THROWS_AS(cumulant_rhs(p, 0.0, ground_state()), DomainError);
    p = DynamicsParams{};
    p.kappa_per_ps = -1.0;
    CHECK_THROWS_AS(cumulant_rhs(p, 0.0, ground_state()), DomainError);
    p = DynamicsParams{};
    p.g_ev = -1e-9;
    CHECK_THROWS_AS(cumulant_rhs(p, 0.0, ground_state()), DomainError);

    CHECK_THROWS_AS(uniform_times(0.0, 1.0, -0.1), DomainError);
    CHECK_THROWS_AS(uniform_times(1.0, 0.0, 0.1), DomainError);
}

TEST_CASE("uniform grid covers the window") {
    const auto ts = uniform_times(-1.0, 2.0, 0.5);
    REQUIRE(ts.size() == 7);
    CHECK(ts.front() == -1.0);
    CHECK_THAT(ts.back(), WithinAbs(2.0, 1e-12));
}

TEST_CASE("driven trajectory conserves trace and lands on the grid") {
    DynamicsParams p = params_of(device_by_name("D5"));
    const auto times = uniform_times(-0.2, 0.4, 0.05);
    const Trajectory traj = integrate_cumulant(p, -0.2, 0.4, times);

    REQUIRE(traj.time_ps.size() == times.size());
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(traj.time_ps[i] == times[i]);
    CHECK(traj.max_trace_deviation < 1e-8);
    CHECK(traj.nu_ev == tuned_laser_ev(params_of(device_by_name("D5"))));

    // the pulse actually populated the device
    CHECK(traj.states.back().s(1, 1).real() > 1e-6);

    // triplet coherences are decoupled at this order and must stay exactly zero
    for (const auto& st : traj.states) {
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                if (!triplet_coherence(a, b)) continue;
                CHECK(st.s(a, b) == complexd{});
                CHECK(st.m(a, b) == complexd{});
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d)
                        CHECK(st.p2(a, b, c, d) == complexd{});
            }
        }
    }
}

TEST_CASE("generator preserves the trace for arbitrary states") {
    DynamicsParams p = params_of(device_by_name("D3"));
    // a populated, correlated state from a short driven run
    const auto times = uniform_times(-0.1, 0.3, 0.1);
    const Trajectory traj = integrate_cumulant(p, -0.1, 0.3, times);
    for (const auto& st : traj.states) {
        const CumulantState ds = cumulant_rhs(p, 0.0, st);
        double pop_rate = 0.0;
        for (int a = 0; a < 4; ++a) pop_rate += ds.s(a, a).real();
        CHECK_THAT(pop_rate, WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("custom initial state enters the integration") {
    DynamicsParams p = params_of(device_by_name("D5"));
    p.g_ev = 0.0;
    p.nu_ev = p.delta1_ev;
    IntegrationOptions opt;
    opt.drive_override = [](double) { return 0.0; };
    opt.initial_state = product_state({0.2, 0.5, 0.2, 0.1});
    const auto times = uniform_times(0.0, 0.1, 0.1);
    const Trajectory traj = integrate_cumulant(p, 0.0, 0.1, times, opt);
    CHECK(traj.states.front().s(1, 1).real() > 0.3);
}
