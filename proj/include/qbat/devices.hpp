#pragma once

// Built-in device presets D1..D8.
//
// Each preset carries the absorber stack geometry, the fitted steady-state
// spectral model, the published reference values for the absorber count and
// bare coupling, and the ultrafast dynamics parameters. The reference columns
// are stored verbatim; tests recompute them from the stack geometry.

#include <array>
#include <string>

#include "qbat/core.hpp"

namespace qbat {

struct DeviceSpec {
    std::string name;

    LayerStack stack;

    // steady-state coupled-oscillator model (energies in eV)
    double delta1_ev = 1.80;   ///< lower Davydov exciton
    double delta2_ev = 1.98;   ///< upper Davydov exciton
    double delta_c_ev = 0.0;   ///< cavity resonance
    double g_co_ev = 0.0;      ///< collective coupling
    double i0 = 0.0;           ///< reflectance dip amplitude
    double sigma = 0.0;        ///< Gaussian width parameter in the dip profile

    // published reference columns (derived quantities, stored as printed)
    double ref_n_absorbers = 0.0;  ///< absorbers in the 4 mm^2 spot
    double ref_g_ev = 0.0;         ///< bare coupling g_co/sqrt(N)

    // ultrafast model (rates in 1/ps)
    double n_molecules = 0.0;       ///< emitters in the pumped spot
    double kappa_per_ps = 0.0;      ///< cavity loss
    double gamma_minus_per_ps = 0.0;   ///< singlet decay
    double gamma_t_minus_per_ps = 0.0; ///< triplet decay
    double gamma_z_per_ps = 0.0;       ///< pure dephasing
    double gamma_isc_per_ps = 0.0;     ///< intersystem crossing
    double delta_t_ev = 1.20;          ///< triplet energy
    double g_ev = 500e-9;              ///< bare coupling in the pumped spot
};

/// The eight fabricated microcavity devices.
inline const std::array<DeviceSpec, 8>& device_catalog() {
    static const std::array<DeviceSpec, 8> catalog = [] {
        std::array<DeviceSpec, 8> d{};
        // name, stack {pure nm, mixed nm, CuPc fraction},
        // delta_c, g_co, i0, sigma, ref N, ref g,
        // N_uf, kappa, gamma-, gammaT-, gammaz, gammaISC
        auto make = [](const char* name, double mixed_nm, double fraction,
                       double delta_c, double g_co_mev, double i0, double sigma,
                       double ref_n, double ref_g_nev, double n_uf,
                       double kappa, double gm, double gtm, double gz,
                       double gisc) {
            DeviceSpec s;
            s.name = name;
            s.stack = LayerStack{15.0, mixed_nm, fraction};
            s.delta_c_ev = delta_c;
            s.g_co_ev = g_co_mev * 1e-3;
            s.i0 = i0;
            s.sigma = sigma;
            s.ref_n_absorbers = ref_n;
            s.ref_g_ev = ref_g_nev * 1e-9;
            s.n_molecules = n_uf;
            s.kappa_per_ps = kappa;
            s.gamma_minus_per_ps = gm;
            s.gamma_t_minus_per_ps = gtm;
            s.gamma_z_per_ps = gz;
            s.gamma_isc_per_ps = gisc;
            return s;
        };
        d[0] = make("D1", 5, 0.30, 1.79, 80, 0.012, 0.060, 1.10e14, 7.63,
                    2.2e10, 25, 0.5, 0.40, 20, 5);
        d[1] = make("D2", 10, 0.30, 1.72, 85, 0.012, 0.060, 1.20e14, 7.30,
                    2.6e10, 25, 0.3, 0.20, 20, 5);
        d[2] = make("D3", 40, 0.20, 1.86, 100, 0.012, 0.060, 1.54e14, 8.03,
                    3.0e10, 33, 0.5, 0.10, 17, 5);
        d[3] = make("D4", 20, 0.70, 1.85, 109, 0.010, 0.070, 1.94e14, 7.81,
                    3.8e10, 29, 0.5, 0.40, 17, 5);
        d[4] = make("D5", 40, 0.50, 1.82, 142, 0.010, 0.060, 2.34e14, 9.30,
                    5.0e10, 29, 0.5, 0.01, 20, 5);
        d[5] = make("D6", 40, 0.60, 1.85, 141, 0.012, 0.070, 2.61e14, 8.73,
                    5.6e10, 33, 0.5, 0.01, 20, 5);
        d[6] = make("D7", 40, 0.70, 1.94, 157, 0.010, 0.070, 2.88e14, 9.25,
                    6.1e10, 33, 0.5, 0.01, 20, 5);
        d[7] = make("D8", 40, 0.80, 2.10, 158, 0.014, 0.070, 3.14e14, 8.94,
                    6.2e10, 40, 0.5, 0.01, 20, 5);
        return d;
    }();
    return catalog;
}

/// Look up a preset by name ("D1".."D8"). Throws DomainError if unknown.
inline const DeviceSpec& device_by_name(const std::string& name) {
    std::string known;
    for (const auto& d : device_catalog()) {
        if (d.name == name) return d;
        known += known.empty() ? d.name : " " + d.name;
    }
    throw DomainError("unknown device preset '" + name + "'; valid names: " + known);
}

/// Hypothetical average device used for scaling studies: cavity at 1.87 eV,
/// loss 33/ps, remaining rates set to the most common catalog values.
inline DeviceSpec idealized_device() {
    DeviceSpec s;
    s.name = "ideal";
    s.stack = LayerStack{15.0, 40.0, 0.50};
    s.delta_c_ev = 1.87;
    s.g_co_ev = 0.0;  // no fitted steady-state model for this preset
    s.i0 = 0.0;
    s.sigma = 0.0;
    s.n_molecules = 2.2e10;
    s.kappa_per_ps = 33;
    s.gamma_minus_per_ps = 0.5;
    s.gamma_t_minus_per_ps = 0.01;
    s.gamma_z_per_ps = 20;
    s.gamma_isc_per_ps = 5;
    return s;
}

} // namespace qbat
