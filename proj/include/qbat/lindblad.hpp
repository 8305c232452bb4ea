#pragma once

// Ground-truth oracles.
//
// lindblad_propagate integrates the full density matrix for one or two (or a
// few) molecules plus a truncated Fock ladder, with no closure. It exists to
// validate the cumulant engine at small N and is deliberately independent of
// it: different state representation, different operator algebra, shared
// integrator only.
//
// rate_equation_solution and driven_cavity_solution are closed-form solutions
// of the decoupled (g = 0) sectors.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qbat/core.hpp"
#include "qbat/cumulant.hpp"
#include "qbat/ode.hpp"

namespace qbat {

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

/// Populations of the four-level molecule with the cavity decoupled (g = 0)
/// and no coherences: singlets decay at gamma_minus + gamma_isc, the triplet
/// collects the ISC branch and decays at gamma_t_minus.
inline std::array<double, 4> rate_equation_solution(double gamma_minus,
                                                    double gamma_t_minus,
                                                    double gamma_isc,
                                                    const std::array<double, 4>& pop0,
                                                    double t_ps) {
    if (gamma_minus < 0 || gamma_t_minus < 0 || gamma_isc < 0)
        throw DomainError("rates must be >= 0");
    const double a = gamma_minus + gamma_isc;  // singlet depletion
    const double b = gamma_t_minus;
    const double ea = std::exp(-a * t_ps);
    const double eb = std::exp(-b * t_ps);

    std::array<double, 4> pop{};
    pop[1] = pop0[1] * ea;
    pop[2] = pop0[2] * ea;

    const double c = gamma_isc * (pop0[1] + pop0[2]);
    const double gap = b - a;
    if (std::abs(gap) > 1e-12 * std::max(a, b) + 1e-300) {
        pop[3] = pop0[3] * eb + c * (ea - eb) / gap;
    } else {
        pop[3] = pop0[3] * eb + c * t_ps * eb;  // degenerate limit
    }
    const double total = pop0[0] + pop0[1] + pop0[2] + pop0[3];
    pop[0] = total - pop[1] - pop[2] - pop[3];
    return pop;
}

namespace detail {

/// Adaptive Simpson quadrature for complex integrands.
inline complexd simpson_rec(const std::function<complexd(double)>& f, double a, double b,
                            complexd fa, complexd fm, complexd fb, complexd whole,
                            double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const complexd flm = f(lm), frm = f(rm);
    const complexd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const complexd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline complexd integrate_simpson(const std::function<complexd(double)>& f, double a,
                                  double b, double tol = 1e-13) {
    if (a == b) return {};
    // Start from a uniform split so a feature narrower than the interval
    // cannot slip between the top-level nodes and fool the error estimate.
    constexpr int panels = 64;
    const double h = (b - a) / panels;
    complexd total{};
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == panels) ? b : a + (k + 1) * h;
        const complexd fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        const complexd whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / panels, 40);
    }
    return total;
}

} // namespace detail

/// <a>(t) for the damped cavity under a constant drive:
/// da/dt = -(kappa/2 + i d) a + eta, with the detuning d already an angular
/// rate in 1/ps.
inline complexd driven_cavity_solution(double kappa_per_ps, double detuning_per_ps,
                                       complexd a0, double eta_const, double t_ps) {
    const complexd lambda{0.5 * kappa_per_ps, detuning_per_ps};
    if (std::abs(lambda) < 1e-300) return a0 + eta_const * t_ps;
    const complexd decay = std::exp(-lambda * t_ps);
    return a0 * decay + eta_const * (1.0 - decay) / lambda;
}

/// Same equation with an arbitrary drive, solved by the integrating factor:
/// a(t) = e^{-l t} a0 + int_0^t e^{-l(t-s)} eta(s) ds (times measured from
/// t_from). The quadrature is adaptive Simpson, absolute tolerance ~1e-13.
inline complexd driven_cavity_solution(double kappa_per_ps, double detuning_per_ps,
                                       const std::function<double(double)>& eta,
                                       double t_from, complexd a0, double t_ps) {
    const complexd lambda{0.5 * kappa_per_ps, detuning_per_ps};
    const complexd decay = std::exp(-lambda * (t_ps - t_from));
    auto integrand = [&](double s) {
        return std::exp(-lambda * (t_ps - s)) * complexd{eta(s), 0.0};
    };
    return a0 * decay + detail::integrate_simpson(integrand, t_from, t_ps);
}

// ---------------------------------------------------------------------------
// dense Lindblad propagation
// ---------------------------------------------------------------------------

struct LindbladOptions {
    int photon_cutoff = 6;   ///< Fock states 0..cutoff
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double pulse_ceiling_ps = 0.01;
    double tail_ceiling_ps = 0.1;
    std::function<double(double)> drive_override;
    bool track_min_eigenvalue = false;  ///< diagonalize rho at output times
    bool store_states = false;          ///< keep rho(t) at output times
    /// Starting level per molecule (empty: all molecules in the ground state).
    std::vector<int> initial_levels;
};

struct LindbladSample {
    double time_ps = 0.0;
    std::array<double, 4> pop{};        ///< level populations, molecule average
    complexd a{};
    double n_ph = 0.0;
    double trace_deviation = 0.0;       ///< |Tr rho - 1|
    double hermiticity_deviation = 0.0; ///< max |rho - rho'|
    double top_fock_population = 0.0;
    double min_eigenvalue = 0.0;        ///< filled when tracked
};

struct LindbladResult {
    int n_molecules = 0;
    int dim = 0;
    std::vector<LindbladSample> samples;
    std::vector<Eigen::MatrixXcd> states;  ///< filled when store_states is set
};

namespace detail {

using SpMat = Eigen::SparseMatrix<complexd>;

struct LindbladJump {
    double rate = 0.0;
    SpMat op;
    SpMat op_adj;  ///< stored adjoint; an adjoint view inside a product would
                   ///< re-materialize the transpose on every rhs call
};

struct LindbladModel {
    int n_mol = 0;
    int cutoff = 0;
    int dim = 0;
    SpMat a_const;  ///< -i H0 - (1/2) sum_k gamma_k L_k' L_k
    SpMat drive;    ///< a' - a, scaled by eta(t) at runtime
    std::vector<LindbladJump> jumps;
    std::vector<int> photon_of;             ///< Fock index per basis state
    std::vector<std::array<int, 4>> level_count;  ///< molecules per level, per state
};

/// Basis: index = fock * 4^n + sum_j level_j * 4^(n-1-j).
inline LindbladModel build_model(const DynamicsParams& p, double nu_ev, int cutoff) {
    if (cutoff < 2) throw DomainError("dense oracle requires photon cutoff >= 2");
    const double n_real = p.n_molecules;
    const int n_mol = int(std::lround(n_real));
    if (std::abs(n_real - double(n_mol)) > 1e-9 || n_mol < 1 || n_mol > 2)
        throw DomainError("dense oracle supports 1 or 2 molecules");
    int mol_dim = 1;
    for (int j = 0; j < n_mol; ++j) mol_dim *= 4;
    const int dim = (cutoff + 1) * mol_dim;
    if (dim > 4096)
        throw DomainError("dense oracle Hilbert space exceeds 4096 states");

    LindbladModel model;
    model.n_mol = n_mol;
    model.cutoff = cutoff;
    model.dim = dim;

    model.photon_of.resize(dim);
    model.level_count.assign(dim, {});
    for (int i = 0; i < dim; ++i) {
        model.photon_of[i] = i / mol_dim;
        int rem = i % mol_dim;
        for (int j = n_mol - 1; j >= 0; --j) {
            model.level_count[i][rem % 4] += 1;
            rem /= 4;
        }
    }

    using T = Eigen::Triplet<complexd>;
    auto sparse_from = [&](const std::vector<T>& trip) {
        SpMat m(dim, dim);
        m.setFromTriplets(trip.begin(), trip.end());
        m.makeCompressed();
        return m;
    };

    // annihilation operator
    std::vector<T> ta;
    for (int f = 1; f <= cutoff; ++f)
        for (int r = 0; r < mol_dim; ++r)
            ta.emplace_back((f - 1) * mol_dim + r, f * mol_dim + r, std::sqrt(double(f)));
    const SpMat op_a = sparse_from(ta);
    const SpMat op_adag = SpMat(op_a.adjoint());

    // single-molecule transition operators X_ab^j
    auto op_x = [&](int j, int a, int b) {
        int stride = 1;
        for (int k = j + 1; k < n_mol; ++k) stride *= 4;
        std::vector<T> tx;
        for (int i = 0; i < dim; ++i) {
            const int lv = (i / stride) % 4;
            if (lv == b) tx.emplace_back(i + (a - b) * stride, i, 1.0);
        }
        return sparse_from(tx);
    };

    const double w[4] = {0.0, ev_to_angular_rate(p.delta1_ev - nu_ev),
                         ev_to_angular_rate(p.delta2_ev - nu_ev),
                         ev_to_angular_rate(p.delta_t_ev)};
    const double dc = ev_to_angular_rate(p.delta_c_ev - nu_ev);
    const double g = ev_to_angular_rate(p.g_ev);

    SpMat h0 = SpMat(dc * (op_adag * op_a).eval());
    for (int j = 0; j < n_mol; ++j) {
        for (int lv = 1; lv < 4; ++lv)
            h0 = h0 + SpMat(w[lv] * op_x(j, lv, lv));
        const SpMat lower = SpMat(op_x(j, 0, 1) + op_x(j, 0, 2));
        const SpMat raise = SpMat(op_adag * lower);
        const SpMat raise_adj = SpMat(raise.adjoint());
        h0 = h0 + SpMat(g * SpMat(raise + raise_adj));
    }

    auto add_jump = [&](double rate, const SpMat& l) {
        model.jumps.push_back({rate, l, SpMat(l.adjoint())});
    };
    add_jump(p.kappa_per_ps, op_a);
    for (int j = 0; j < n_mol; ++j) {
        add_jump(p.gamma_minus_per_ps, op_x(j, 0, 1));
        add_jump(p.gamma_minus_per_ps, op_x(j, 0, 2));
        add_jump(p.gamma_t_minus_per_ps, op_x(j, 0, 3));
        add_jump(p.gamma_z_per_ps, op_x(j, 1, 1));
        add_jump(p.gamma_z_per_ps, op_x(j, 2, 2));
        add_jump(p.gamma_isc_per_ps, op_x(j, 3, 1));
        add_jump(p.gamma_isc_per_ps, op_x(j, 3, 2));
    }

    SpMat decay(dim, dim);
    for (const auto& j : model.jumps)
        decay = decay + SpMat(complexd{0.5 * j.rate, 0.0} * SpMat(j.op_adj * j.op));
    model.a_const = SpMat(complexd{0.0, -1.0} * h0) - decay;
    model.a_const.makeCompressed();
    model.drive = SpMat(op_adag - op_a);
    model.drive.makeCompressed();
    return model;
}

} // namespace detail

/// Integrate the full master equation and sample observables. The molecule
/// count comes from params (must be a small integer); the laser frame and
/// pulse match the cumulant engine exactly.
inline LindbladResult lindblad_propagate(const DynamicsParams& p, double t_start_ps,
                                         double t_end_ps,
                                         const std::vector<double>& output_times,
                                         const LindbladOptions& opt = {}) {
    const double nu = resolved_laser_ev(p);
    const auto model = detail::build_model(p, nu, opt.photon_cutoff);
    const int dim = model.dim;

    auto drive = opt.drive_override
                     ? opt.drive_override
                     : std::function<double(double)>([&p](double t) {
                           return pulse_amplitude(p.pulse, p.n_molecules, t);
                       });

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    if (opt.initial_levels.empty()) {
        rho(0, 0) = 1.0;  // empty cavity, all molecules in the ground state
    } else {
        if (int(opt.initial_levels.size()) != model.n_mol)
            throw DomainError("initial_levels must list one level per molecule");
        int idx = 0;
        for (int lv : opt.initial_levels) {
            if (lv < 0 || lv > 3) throw DomainError("initial level must be 0..3");
            idx = 4 * idx + lv;
        }
        rho(idx, idx) = 1.0;
    }

    Eigen::MatrixXcd m1(dim, dim), m2(dim, dim), dr(dim, dim);
    auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        const auto* src = reinterpret_cast<const complexd*>(y.data());
        Eigen::Map<const Eigen::MatrixXcd> r(src, dim, dim);
        m1.noalias() = model.a_const * r;
        const double eta = drive(t);
        if (eta != 0.0) m1.noalias() += eta * (model.drive * r);
        dr = m1 + m1.adjoint();
        for (const auto& j : model.jumps) {
            if (j.rate == 0.0) continue;
            m2.noalias() = j.op * r;
            dr.noalias() += j.rate * (m2 * j.op_adj);
        }
        dy.resize(y.size());
        auto* dst = reinterpret_cast<complexd*>(dy.data());
        Eigen::Map<Eigen::MatrixXcd>(dst, dim, dim) = dr;
    };

    LindbladResult result;
    result.n_molecules = model.n_mol;
    result.dim = dim;

    auto sample_observables = [&](double t, const std::vector<double>& y) {
        const auto* src = reinterpret_cast<const complexd*>(y.data());
        Eigen::Map<const Eigen::MatrixXcd> r(src, dim, dim);
        LindbladSample smp;
        smp.time_ps = t;
        double tr = 0.0, nph = 0.0, top = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double d = r(i, i).real();
            tr += d;
            nph += model.photon_of[i] * d;
            if (model.photon_of[i] == model.cutoff) top += d;
            for (int lv = 0; lv < 4; ++lv)
                smp.pop[lv] += model.level_count[i][lv] * d / double(model.n_mol);
        }
        smp.trace_deviation = std::abs(tr - 1.0);
        smp.n_ph = nph;
        smp.top_fock_population = top;
        // <a> = Tr(a rho): a has one subdiagonal band per Fock rung
        complexd aexp{};
        const int mol_dim = dim / (model.cutoff + 1);
        for (int f = 1; f <= model.cutoff; ++f)
            for (int rem = 0; rem < mol_dim; ++rem)
                aexp += std::sqrt(double(f)) * r(f * mol_dim + rem, (f - 1) * mol_dim + rem);
        smp.a = aexp;
        smp.hermiticity_deviation = (r - r.adjoint()).cwiseAbs().maxCoeff();
        if (opt.track_min_eigenvalue) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
            smp.min_eigenvalue = es.eigenvalues().minCoeff();
        }
        if (smp.top_fock_population > 1e-6)
            throw NumericalError("photon cutoff insufficient: top Fock population " +
                                 std::to_string(smp.top_fock_population) + " at t = " +
                                 std::to_string(t) + " ps");
        result.samples.push_back(smp);
        if (opt.store_states) result.states.emplace_back(r);
    };

    OdeOptions ode;
    ode.rel_tol = opt.rel_tol;
    ode.abs_tol = opt.abs_tol;
    ode.initial_step = 1e-4;
    const double pulse_lo = p.pulse.t0_ps - 4.0 * p.pulse.sigma_t_ps;
    const double pulse_hi = p.pulse.t0_ps + 4.0 * p.pulse.sigma_t_ps;
    ode.max_step = [=](double t) {
        return (t >= pulse_lo && t <= pulse_hi) ? opt.pulse_ceiling_ps
                                                : opt.tail_ceiling_ps;
    };

    std::vector<double> y(2 * std::size_t(dim) * std::size_t(dim), 0.0);
    auto* dst = reinterpret_cast<complexd*>(y.data());
    Eigen::Map<Eigen::MatrixXcd>(dst, dim, dim) = rho;

    integrate_adaptive(rhs, y, t_start_ps, t_end_ps, output_times, sample_observables, ode);
    return result;
}

} // namespace qbat
