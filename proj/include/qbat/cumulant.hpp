#pragma once

// Second-order cumulant engine for the pulsed cavity, N identical four-level
// molecules and one photon mode.
//
// Molecular levels: 0 ground, 1 lower singlet, 2 upper singlet, 3 triplet.
// The frame rotates at the laser frequency nu; cavity and singlet energies
// appear as detunings, the triplet energy is not shifted (no coherent process
// connects it to the drive).
//
// Tracked moments:
//   <a>, <a'a>, <aa>
//   single[ab]    = <X_ab>                     (one molecule)
//   pair[ab][cd]  = <X_ab X_cd>                (two distinct molecules)
//   mixed[ab]     = <a X_ab>
// <a'X_ab> is not stored; it equals conj(<a X_ba>).
//
// Every equation of motion below is obtained from d<O>/dt = Tr(O drho/dt)
// with the Lindblad generator; three-operator moments are closed with the
// third-cumulant truncation close_triple(), so errors scale as 1/N.
//
// The flat state exposed to the integrator keeps independent real degrees of
// freedom only. Layout:
//   [0] Re<a>  [1] Im<a>  [2] <a'a>  [3] Re<aa>  [4] Im<aa>
//   [5..8]    populations <X_00>, <X_11>, <X_22>, <X_33>
//   [9..20]   Re/Im of <X_ab> for ab in {01,02,03,12,13,23}
//   [21..52]  Re/Im of <a X_ab>, ab row-major
//   [53..188] pair entries: for m = 4a+b <= n = 4c+d in lexicographic order,
//             entries fixed by hermiticity store one real, canonical entries
//             store Re/Im, mirrored entries store nothing.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbat/core.hpp"
#include "qbat/devices.hpp"
#include "qbat/ode.hpp"
#include "qbat/polariton.hpp"

namespace qbat {

using complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

/// Gaussian drive pulse. The envelope integrates to sqrt(r*N): r is the
/// number of injected photons per molecule.
struct PulseParams {
    double r = 0.5;
    double sigma_t_ps = 0.035 / 2.3548200450309493;  ///< 35 fs FWHM / (2 sqrt(2 ln 2))
    double t0_ps = 0.0;
};

inline double pulse_amplitude(const PulseParams& p, double n_molecules, double t_ps) {
    if (p.r < 0.0) throw DomainError("pulse r must be >= 0");
    if (!(p.sigma_t_ps > 0.0)) throw DomainError("pulse sigma_t must be positive");
    const double x = (t_ps - p.t0_ps) / p.sigma_t_ps;
    const double peak = std::sqrt(p.r * n_molecules /
                                  (2.0 * std::numbers::pi * p.sigma_t_ps * p.sigma_t_ps));
    return peak * std::exp(-0.5 * x * x);
}

struct DynamicsParams {
    double n_molecules = 1.0;  ///< emitters in the pumped spot, >= 1

    double delta1_ev = 1.80;  ///< lower singlet
    double delta2_ev = 1.98;  ///< upper singlet
    double delta_t_ev = 1.20; ///< triplet
    double delta_c_ev = 1.87; ///< cavity resonance
    double g_ev = 500e-9;     ///< bare coupling

    /// Laser frequency; unset means "tune to the lower polariton".
    std::optional<double> nu_ev;

    double kappa_per_ps = 33.0;           ///< cavity loss
    double gamma_minus_per_ps = 0.5;      ///< singlet decay
    double gamma_t_minus_per_ps = 0.01;   ///< triplet decay
    double gamma_z_per_ps = 20.0;         ///< pure dephasing
    double gamma_isc_per_ps = 5.0;        ///< intersystem crossing

    PulseParams pulse;
};

/// Lower-polariton energy of the collective-coupling oscillator model built
/// from these dynamics parameters. Used to tune the laser.
inline double tuned_laser_ev(const DynamicsParams& p) {
    CoupledOscillatorParams co;
    co.delta1_ev = p.delta1_ev;
    co.delta2_ev = p.delta2_ev;
    co.delta_c_ev = p.delta_c_ev;
    co.g_co_ev = collective_coupling(p.g_ev, p.n_molecules);
    return eigensystem(co).energy_ev[0];
}

inline double resolved_laser_ev(const DynamicsParams& p) {
    return p.nu_ev ? *p.nu_ev : tuned_laser_ev(p);
}

// ---------------------------------------------------------------------------
// state
// ---------------------------------------------------------------------------

struct CumulantState {
    complexd a{};
    double n_ph = 0.0;
    complexd aa{};
    std::array<complexd, 16> single{};  ///< <X_ab> at 4a+b
    std::array<complexd, 256> pair{};   ///< <X_ab X_cd> at 16*(4a+b)+(4c+d)
    std::array<complexd, 16> mixed{};   ///< <a X_ab> at 4a+b

    static constexpr int idx(int a, int b) { return 4 * a + b; }

    complexd s(int a, int b) const { return single[idx(a, b)]; }
    complexd m(int a, int b) const { return mixed[idx(a, b)]; }
    /// <a' X_ab>, derived by conjugation.
    complexd mdag(int a, int b) const { return std::conj(mixed[idx(b, a)]); }
    complexd p2(int a, int b, int c, int d) const {
        return pair[16 * idx(a, b) + idx(c, d)];
    }

    double trace() const {
        return (single[0] + single[5] + single[10] + single[15]).real();
    }
};

/// All molecules in the ground state, empty cavity.
inline CumulantState ground_state() {
    CumulantState s;
    s.single[CumulantState::idx(0, 0)] = 1.0;
    s.pair[0] = 1.0;  // <X_00 X_00> between any two distinct molecules
    return s;
}

/// Uncorrelated product state with the given level populations, empty cavity,
/// no coherences. Pair moments factorize: <X_aa X_bb> = pop_a * pop_b.
inline CumulantState product_state(const std::array<double, 4>& pops) {
    double total = 0.0;
    for (double p : pops) {
        if (p < 0.0) throw DomainError("product_state: populations must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw DomainError("product_state: populations must sum to 1");
    CumulantState s;
    for (int a = 0; a < 4; ++a) {
        s.single[CumulantState::idx(a, a)] = pops[std::size_t(a)];
        for (int b = 0; b < 4; ++b)
            s.pair[std::size_t(16 * CumulantState::idx(a, a) + CumulantState::idx(b, b))] =
                pops[std::size_t(a)] * pops[std::size_t(b)];
    }
    return s;
}

/// Third-cumulant closure <MNO> ~ <MN><O> + <M><NO> + <MO><N> - 2<M><N><O>.
inline complexd close_triple(complexd mn, complexd mo, complexd no,
                             complexd m, complexd n, complexd o) {
    return mn * o + m * no + mo * n - 2.0 * m * n * o;
}

// ---------------------------------------------------------------------------
// flat layout
// ---------------------------------------------------------------------------

namespace layout {

enum class Kind : int { real_slot, canonical, mirrored };

struct PairEntry {
    int offset = 0;  ///< index into the flat vector
    Kind kind = Kind::real_slot;
};

/// Swap-normalized conjugation partner of the lexicographic pair (m, n):
/// hermiticity relates <X_ab X_cd> to conj(<X_ba X_dc>).
inline std::pair<int, int> conj_partner(int m, int n) {
    auto bar = [](int k) { return 4 * (k % 4) + k / 4; };
    int p = bar(m), q = bar(n);
    if (p > q) std::swap(p, q);
    return {p, q};
}

struct PairLayout {
    std::array<PairEntry, 256> entry{};  ///< indexed by 16*m+n for m <= n
    struct Canonical { int m, n, offset; Kind kind; };
    std::vector<Canonical> canonical;    ///< slots that own flat storage
    int n_reals = 0;
    int base = 0;  ///< offset of the pair section in the flat vector

    static const PairLayout& instance() {
        static const PairLayout l = build();
        return l;
    }

  private:
    static PairLayout build() {
        PairLayout l;
        l.base = 5 + 16 + 32;
        int off = l.base;
        // first pass: assign storage to real and canonical slots
        for (int m = 0; m < 16; ++m) {
            for (int n = m; n < 16; ++n) {
                auto [p, q] = conj_partner(m, n);
                if (p == m && q == n) {
                    l.entry[16 * m + n] = {off, Kind::real_slot};
                    l.canonical.push_back({m, n, off, Kind::real_slot});
                    off += 1;
                } else if (std::pair{m, n} < std::pair{p, q}) {
                    l.entry[16 * m + n] = {off, Kind::canonical};
                    l.canonical.push_back({m, n, off, Kind::canonical});
                    off += 2;
                }
            }
        }
        // second pass: point mirrored slots at their partner's storage
        for (int m = 0; m < 16; ++m) {
            for (int n = m; n < 16; ++n) {
                auto [p, q] = conj_partner(m, n);
                if (std::pair{m, n} > std::pair{p, q})
                    l.entry[16 * m + n] = {l.entry[16 * p + q].offset, Kind::mirrored};
            }
        }
        l.n_reals = off - l.base;
        if (l.n_reals != 136)
            throw NumericalError("pair layout construction is inconsistent");
        return l;
    }
};

inline constexpr int coherence_order[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                              {1, 2}, {1, 3}, {2, 3}};

inline constexpr int flat_size = 5 + 16 + 32 + 136;

} // namespace layout

inline std::size_t cumulant_flat_size() { return layout::flat_size; }

inline void flatten(const CumulantState& s, std::vector<double>& y) {
    y.resize(layout::flat_size);
    y[0] = s.a.real();
    y[1] = s.a.imag();
    y[2] = s.n_ph;
    y[3] = s.aa.real();
    y[4] = s.aa.imag();
    for (int a = 0; a < 4; ++a) y[5 + a] = s.single[CumulantState::idx(a, a)].real();
    for (int c = 0; c < 6; ++c) {
        const auto [a, b] = layout::coherence_order[c];
        const complexd v = s.single[CumulantState::idx(a, b)];
        y[9 + 2 * c] = v.real();
        y[9 + 2 * c + 1] = v.imag();
    }
    for (int k = 0; k < 16; ++k) {
        y[21 + 2 * k] = s.mixed[k].real();
        y[21 + 2 * k + 1] = s.mixed[k].imag();
    }
    for (const auto& c : layout::PairLayout::instance().canonical) {
        const complexd v = s.pair[16 * c.m + c.n];
        if (c.kind == layout::Kind::real_slot) {
            y[c.offset] = v.real();
        } else {
            y[c.offset] = v.real();
            y[c.offset + 1] = v.imag();
        }
    }
}

inline void unflatten(const std::vector<double>& y, CumulantState& s) {
    s.a = {y[0], y[1]};
    s.n_ph = y[2];
    s.aa = {y[3], y[4]};
    for (int a = 0; a < 4; ++a) s.single[CumulantState::idx(a, a)] = y[5 + a];
    for (int c = 0; c < 6; ++c) {
        const auto [a, b] = layout::coherence_order[c];
        const complexd v{y[9 + 2 * c], y[9 + 2 * c + 1]};
        s.single[CumulantState::idx(a, b)] = v;
        s.single[CumulantState::idx(b, a)] = std::conj(v);
    }
    for (int k = 0; k < 16; ++k) s.mixed[k] = {y[21 + 2 * k], y[21 + 2 * k + 1]};
    const auto& pl = layout::PairLayout::instance();
    for (int m = 0; m < 16; ++m) {
        for (int n = m; n < 16; ++n) {
            const auto& e = pl.entry[16 * m + n];
            complexd v;
            switch (e.kind) {
                case layout::Kind::real_slot: v = y[e.offset]; break;
                case layout::Kind::canonical: v = {y[e.offset], y[e.offset + 1]}; break;
                case layout::Kind::mirrored:  v = {y[e.offset], -y[e.offset + 1]}; break;
            }
            s.pair[16 * m + n] = v;
            s.pair[16 * n + m] = v;  // distinct molecules commute
        }
    }
}

/// Human-readable name of a flat component, for diagnostics.
inline std::string flat_index_name(int i) {
    auto ri = [](bool re) { return re ? std::string("Re ") : std::string("Im "); };
    if (i == 0 || i == 1) return ri(i == 0) + "<a>";
    if (i == 2) return "<a'a>";
    if (i == 3 || i == 4) return ri(i == 3) + "<aa>";
    if (i >= 5 && i < 9) {
        const int a = i - 5;
        return "<X_" + std::to_string(a) + std::to_string(a) + ">";
    }
    if (i >= 9 && i < 21) {
        const int c = (i - 9) / 2;
        const auto [a, b] = layout::coherence_order[c];
        return ri((i - 9) % 2 == 0) + "<X_" + std::to_string(a) + std::to_string(b) + ">";
    }
    if (i >= 21 && i < 53) {
        const int k = (i - 21) / 2;
        return ri((i - 21) % 2 == 0) + "<a X_" + std::to_string(k / 4) +
               std::to_string(k % 4) + ">";
    }
    for (const auto& c : layout::PairLayout::instance().canonical) {
        const int span = c.kind == layout::Kind::real_slot ? 1 : 2;
        if (i >= c.offset && i < c.offset + span) {
            return ri(i == c.offset) + "<X_" + std::to_string(c.m / 4) +
                   std::to_string(c.m % 4) + " X_" + std::to_string(c.n / 4) +
                   std::to_string(c.n % 4) + ">";
        }
    }
    return "component " + std::to_string(i);
}

// ---------------------------------------------------------------------------
// equations of motion
// ---------------------------------------------------------------------------

namespace detail {

struct Jump {
    double rate;  // 1/ps
    int xi;       // operator X_{xi,zeta}: moves zeta -> xi
    int zeta;
};

struct EngineParams {
    double w[4];      // level angular rates in the rotating frame
    double dc;        // cavity detuning angular rate
    double n;         // molecule count
    double g;         // coupling angular rate
    double kappa;
    std::array<Jump, 7> jumps;
};

inline EngineParams make_engine_params(const DynamicsParams& p, double nu_ev) {
    if (!(p.n_molecules >= 1.0))
        throw DomainError("n_molecules must be >= 1");
    if (p.kappa_per_ps < 0 || p.gamma_minus_per_ps < 0 || p.gamma_t_minus_per_ps < 0 ||
        p.gamma_z_per_ps < 0 || p.gamma_isc_per_ps < 0)
        throw DomainError("rates must be >= 0");
    if (p.g_ev < 0)
        throw DomainError("coupling must be >= 0");
    EngineParams e{};
    e.w[0] = 0.0;
    e.w[1] = ev_to_angular_rate(p.delta1_ev - nu_ev);
    e.w[2] = ev_to_angular_rate(p.delta2_ev - nu_ev);
    e.w[3] = ev_to_angular_rate(p.delta_t_ev);  // triplet stays unshifted
    e.dc = ev_to_angular_rate(p.delta_c_ev - nu_ev);
    e.n = p.n_molecules;
    e.g = ev_to_angular_rate(p.g_ev);
    e.kappa = p.kappa_per_ps;
    e.jumps = {{{p.gamma_minus_per_ps, 0, 1},
                {p.gamma_minus_per_ps, 0, 2},
                {p.gamma_t_minus_per_ps, 0, 3},
                {p.gamma_z_per_ps, 1, 1},
                {p.gamma_z_per_ps, 2, 2},
                {p.gamma_isc_per_ps, 3, 1},
                {p.gamma_isc_per_ps, 3, 2}}};
    return e;
}

/// Full structured derivative. eta is the drive amplitude at time t.
inline void cumulant_rhs(const EngineParams& e, double eta, const CumulantState& s,
                         CumulantState& ds) {
    constexpr complexd I{0.0, 1.0};
    const double G = e.g;
    const double N = e.n;

    // --- closures -----------------------------------------------------------
    // <a'a X_ab>
    auto n_x = [&](int a, int b) {
        return close_triple(complexd{s.n_ph, 0.0}, s.mdag(a, b), s.m(a, b),
                            std::conj(s.a), s.a, s.s(a, b));
    };
    // <aa X_ab>
    auto aa_x = [&](int a, int b) {
        return close_triple(s.aa, s.m(a, b), s.m(a, b), s.a, s.a, s.s(a, b));
    };
    // <a X_ab X_cd>, distinct molecules
    auto a_xx = [&](int a, int b, int c, int d) {
        return close_triple(s.m(a, b), s.m(c, d), s.p2(a, b, c, d), s.a, s.s(a, b),
                            s.s(c, d));
    };
    // <a' X_ab X_cd>
    auto adag_xx = [&](int a, int b, int c, int d) {
        return close_triple(s.mdag(a, b), s.mdag(c, d), s.p2(a, b, c, d),
                            std::conj(s.a), s.s(a, b), s.s(c, d));
    };

    // --- photon sector ------------------------------------------------------
    ds.a = -(0.5 * e.kappa + I * e.dc) * s.a - I * G * N * (s.s(0, 1) + s.s(0, 2)) + eta;
    ds.n_ph = -e.kappa * s.n_ph + 2.0 * eta * s.a.real() +
              2.0 * G * N * (s.mdag(0, 1).imag() + s.mdag(0, 2).imag());
    ds.aa = -(e.kappa + 2.0 * I * e.dc) * s.aa - 2.0 * I * G * N * (s.m(0, 1) + s.m(0, 2)) +
            2.0 * eta * s.a;

    // --- single-molecule moments ---------------------------------------------
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            complexd d = I * (e.w[a] - e.w[b]) * s.s(a, b);
            complexd c{};
            if (a == 1 || a == 2) c += s.mdag(0, b);
            if (b == 0) c -= s.mdag(a, 1) + s.mdag(a, 2);
            if (a == 0) c += s.m(1, b) + s.m(2, b);
            if (b == 1 || b == 2) c -= s.m(a, 0);
            d += I * G * c;
            for (const auto& j : e.jumps) {
                if (a == j.xi && b == j.xi) d += j.rate * s.s(j.zeta, j.zeta);
                if (a == j.zeta) d -= 0.5 * j.rate * s.s(j.zeta, b);
                if (b == j.zeta) d -= 0.5 * j.rate * s.s(a, j.zeta);
            }
            ds.single[CumulantState::idx(a, b)] = d;
        }
    }

    // --- photon-molecule moments ----------------------------------------------
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const complexd m = s.m(a, b);
            complexd d = -(0.5 * e.kappa + I * e.dc) * m + I * (e.w[a] - e.w[b]) * m +
                         eta * s.s(a, b);
            complexd c{};
            if (a == 1 || a == 2) c += n_x(0, b);
            if (b == 0) c -= n_x(a, 1) + n_x(a, 2) + s.s(a, 1) + s.s(a, 2);
            if (a == 0) c += aa_x(1, b) + aa_x(2, b);
            if (b == 1 || b == 2) c -= aa_x(a, 0);
            d += I * G * c;
            // remaining N-1 molecules seen through pair correlations
            d -= I * G * (N - 1.0) * (s.p2(a, b, 0, 1) + s.p2(a, b, 0, 2));
            for (const auto& j : e.jumps) {
                if (a == j.xi && b == j.xi) d += j.rate * s.m(j.zeta, j.zeta);
                if (a == j.zeta) d -= 0.5 * j.rate * s.m(j.zeta, b);
                if (b == j.zeta) d -= 0.5 * j.rate * s.m(a, j.zeta);
            }
            ds.mixed[CumulantState::idx(a, b)] = d;
        }
    }

    // --- two-molecule moments ---------------------------------------------------
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            for (int c2 = 0; c2 < 4; ++c2) {
                for (int d2 = 0; d2 < 4; ++d2) {
                    complexd d = I * (e.w[a] - e.w[b] + e.w[c2] - e.w[d2]) *
                                 s.p2(a, b, c2, d2);
                    complexd c{};
                    // coupling acting on the first molecule
                    if (a == 1 || a == 2) c += adag_xx(0, b, c2, d2);
                    if (b == 0) c -= adag_xx(a, 1, c2, d2) + adag_xx(a, 2, c2, d2);
                    if (a == 0) c += a_xx(1, b, c2, d2) + a_xx(2, b, c2, d2);
                    if (b == 1 || b == 2) c -= a_xx(a, 0, c2, d2);
                    // coupling acting on the second molecule
                    if (c2 == 1 || c2 == 2) c += adag_xx(a, b, 0, d2);
                    if (d2 == 0) c -= adag_xx(a, b, c2, 1) + adag_xx(a, b, c2, 2);
                    if (c2 == 0) c += a_xx(a, b, 1, d2) + a_xx(a, b, 2, d2);
                    if (d2 == 1 || d2 == 2) c -= a_xx(a, b, c2, 0);
                    d += I * G * c;
                    for (const auto& j : e.jumps) {
                        if (a == j.xi && b == j.xi)
                            d += j.rate * s.p2(j.zeta, j.zeta, c2, d2);
                        if (a == j.zeta) d -= 0.5 * j.rate * s.p2(j.zeta, b, c2, d2);
                        if (b == j.zeta) d -= 0.5 * j.rate * s.p2(a, j.zeta, c2, d2);
                        if (c2 == j.xi && d2 == j.xi)
                            d += j.rate * s.p2(a, b, j.zeta, j.zeta);
                        if (c2 == j.zeta) d -= 0.5 * j.rate * s.p2(a, b, j.zeta, d2);
                        if (d2 == j.zeta) d -= 0.5 * j.rate * s.p2(a, b, c2, j.zeta);
                    }
                    ds.pair[16 * CumulantState::idx(a, b) + CumulantState::idx(c2, d2)] = d;
                }
            }
        }
    }
}

} // namespace detail

/// Structured derivative of the cumulant state; drive defaults to the pulse.
inline CumulantState cumulant_rhs(const DynamicsParams& p, double t, const CumulantState& s,
                                  const std::function<double(double)>& drive = {}) {
    const double nu = resolved_laser_ev(p);
    const auto e = detail::make_engine_params(p, nu);
    const double eta = drive ? drive(t) : pulse_amplitude(p.pulse, p.n_molecules, t);
    CumulantState ds;
    detail::cumulant_rhs(e, eta, s, ds);
    return ds;
}

// ---------------------------------------------------------------------------
// integration
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<double> time_ps;
    std::vector<CumulantState> states;
    double nu_ev = 0.0;                ///< laser frequency used for the frame
    double max_trace_deviation = 0.0;  ///< max |trace - 1| over the samples
    DynamicsParams params;             ///< resolved parameter set
};

struct IntegrationOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double pulse_ceiling_ps = 0.01;  ///< step ceiling within t0 +- 4 sigma_t
    double tail_ceiling_ps = 0.1;    ///< step ceiling elsewhere
    /// Replaces the Gaussian pulse when set (validation hook).
    std::function<double(double)> drive_override;
    /// Starting state; the molecular/photonic ground state when unset.
    std::optional<CumulantState> initial_state;
};

/// Integrate the cumulant equations from the collective ground state.
/// `output_times` must be increasing and inside [t_start, t_end].
inline Trajectory integrate_cumulant(const DynamicsParams& p, double t_start_ps,
                                     double t_end_ps,
                                     const std::vector<double>& output_times,
                                     const IntegrationOptions& opt = {}) {
    const double nu = resolved_laser_ev(p);
    const auto e = detail::make_engine_params(p, nu);

    auto drive = opt.drive_override
                     ? opt.drive_override
                     : std::function<double(double)>([&p](double t) {
                           return pulse_amplitude(p.pulse, p.n_molecules, t);
                       });

    CumulantState scratch;
    CumulantState dscratch;
    auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!std::isfinite(y[i]))
                throw NumericalError("non-finite moment " + flat_index_name(int(i)) +
                                     " at t = " + std::to_string(t) + " ps");
        }
        unflatten(y, scratch);
        detail::cumulant_rhs(e, drive(t), scratch, dscratch);
        flatten(dscratch, dy);
    };

    OdeOptions ode;
    ode.rel_tol = opt.rel_tol;
    ode.abs_tol = opt.abs_tol;
    ode.initial_step = 1e-4;
    const double pulse_lo = p.pulse.t0_ps - 4.0 * p.pulse.sigma_t_ps;
    const double pulse_hi = p.pulse.t0_ps + 4.0 * p.pulse.sigma_t_ps;
    ode.max_step = [=, &opt](double t) {
        return (t >= pulse_lo && t <= pulse_hi) ? opt.pulse_ceiling_ps
                                                : opt.tail_ceiling_ps;
    };

    Trajectory traj;
    traj.nu_ev = nu;
    traj.params = p;
    traj.params.nu_ev = nu;
    traj.time_ps.reserve(output_times.size());
    traj.states.reserve(output_times.size());

    std::vector<double> y;
    flatten(opt.initial_state ? *opt.initial_state : ground_state(), y);
    integrate_adaptive(
        rhs, y, t_start_ps, t_end_ps, output_times,
        [&](double t, const std::vector<double>& yt) {
            CumulantState st;
            unflatten(yt, st);
            traj.max_trace_deviation =
                std::max(traj.max_trace_deviation, std::abs(st.trace() - 1.0));
            traj.time_ps.push_back(t);
            traj.states.push_back(std::move(st));
        },
        ode);
    return traj;
}

/// Uniform sampling grid with spacing dt covering [t0, t1].
inline std::vector<double> uniform_times(double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 > t0))
        throw DomainError("uniform_times: need dt > 0 and t1 > t0");
    std::vector<double> ts;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
    ts.reserve(n + 1);
    // Rounding in t0 + n*dt can overshoot t1 by one ulp; clamp so the grid
    // stays inside the integration window.
    for (std::size_t i = 0; i <= n; ++i) ts.push_back(std::min(t0 + double(i) * dt, t1));
    return ts;
}

/// Dynamics parameters for a catalog device: table rates plus LP-tuned laser.
inline DynamicsParams dynamics_from_device(const DeviceSpec& dev) {
    DynamicsParams p;
    p.n_molecules = dev.n_molecules;
    p.delta1_ev = dev.delta1_ev;
    p.delta2_ev = dev.delta2_ev;
    p.delta_t_ev = dev.delta_t_ev;
    p.delta_c_ev = dev.delta_c_ev;
    p.g_ev = dev.g_ev;
    p.kappa_per_ps = dev.kappa_per_ps;
    p.gamma_minus_per_ps = dev.gamma_minus_per_ps;
    p.gamma_t_minus_per_ps = dev.gamma_t_minus_per_ps;
    p.gamma_z_per_ps = dev.gamma_z_per_ps;
    p.gamma_isc_per_ps = dev.gamma_isc_per_ps;
    return p;
}

} // namespace qbat
