#pragma once

// Core unit system, physical constants and absorber bookkeeping.
//
// Internal units everywhere in this library:
//   energy  eV
//   time    ps
//   rate    1/ps
// Angular rates are obtained from energies by dividing by hbar, see
// ev_to_angular_rate().

#include <cmath>
#include <stdexcept>
#include <string>

namespace qbat {

// ---------------------------------------------------------------------------
// error taxonomy
// ---------------------------------------------------------------------------

/// Invalid input or parameter outside its documented domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to converge or produced non-finite values.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A cross-check between independent computations disagreed.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

struct PhysicalConstants {
    /// Avogadro constant, 1/mol. Exact by SI definition.
    static constexpr double avogadro = 6.02214076e23;
    /// Reduced Planck constant in eV*ps. CODATA, exact.
    static constexpr double hbar = 6.582119569e-4;
    /// hc in eV*nm, used for wavelength <-> photon energy.
    static constexpr double hc_ev_nm = 1239.841984;
    /// Density of a vacuum-deposited CuPc film, g/cm^3.
    static constexpr double cupc_density = 1.6;
    /// Molar mass of CuPc (C32H16CuN8), g/mol.
    static constexpr double cupc_molar_mass = 576.07;
};

/// Angular rate (1/ps) equivalent of an energy in eV.
constexpr double ev_to_angular_rate(double energy_ev) {
    return energy_ev / PhysicalConstants::hbar;
}

/// Photon energy in eV for a vacuum wavelength in nm.
inline double wavelength_nm_to_ev(double wavelength_nm) {
    if (!(wavelength_nm > 0.0))
        throw DomainError("wavelength must be positive");
    return PhysicalConstants::hc_ev_nm / wavelength_nm;
}

// ---------------------------------------------------------------------------
// absorber geometry
// ---------------------------------------------------------------------------

/// Absorbing part of a device stack: a neat CuPc layer plus a blended
/// CuPc:C60 layer of which only the CuPc volume fraction absorbs.
struct LayerStack {
    double pure_cupc_nm = 0.0;    ///< neat CuPc thickness
    double mixed_nm = 0.0;        ///< blended layer thickness
    double cupc_fraction = 0.0;   ///< CuPc volume fraction in the blend, [0,1]
};

/// Effective CuPc thickness in nm: neat layer plus fraction-weighted blend.
inline double effective_cupc_thickness_nm(const LayerStack& stack) {
    if (stack.pure_cupc_nm < 0.0 || stack.mixed_nm < 0.0)
        throw DomainError("layer thicknesses must be >= 0");
    if (stack.cupc_fraction < 0.0 || stack.cupc_fraction > 1.0)
        throw DomainError("cupc_fraction must be in [0,1]");
    return stack.pure_cupc_nm + stack.cupc_fraction * stack.mixed_nm;
}

/// Number of CuPc molecules inside the illuminated spot.
///
/// N = N_A * rho * V / M with V the effective absorber volume,
/// V = spot_area * effective thickness. The default spot is 4 mm^2.
inline double absorber_count(const LayerStack& stack, double spot_area_mm2 = 4.0) {
    if (!(spot_area_mm2 > 0.0))
        throw DomainError("spot area must be positive");
    const double thickness_cm = effective_cupc_thickness_nm(stack) * 1e-7;
    const double area_cm2 = spot_area_mm2 * 1e-2;
    const double volume_cm3 = area_cm2 * thickness_cm;
    return PhysicalConstants::avogadro * PhysicalConstants::cupc_density *
           volume_cm3 / PhysicalConstants::cupc_molar_mass;
}

// ---------------------------------------------------------------------------
// light-matter couplings
// ---------------------------------------------------------------------------

/// Single-molecule coupling g (eV) from a collective coupling g_co and the
/// number of coupled absorbers: g = g_co / sqrt(N).
inline double bare_coupling(double g_co_ev, double n_absorbers) {
    if (g_co_ev < 0.0)
        throw DomainError("collective coupling must be >= 0");
    if (!(n_absorbers > 0.0))
        throw DomainError("absorber count must be positive");
    return g_co_ev / std::sqrt(n_absorbers);
}

/// Collective coupling g*sqrt(N) in eV for N identical emitters.
inline double collective_coupling(double g_ev, double n_molecules) {
    if (g_ev < 0.0)
        throw DomainError("coupling must be >= 0");
    if (!(n_molecules > 0.0))
        throw DomainError("molecule count must be positive");
    return g_ev * std::sqrt(n_molecules);
}

/// Rescale a single-molecule coupling between two quantization volumes:
/// g' = g * sqrt(v_from / v_to). Shrinking the mode volume raises g.
inline double rescale_coupling(double g_ev, double v_from, double v_to) {
    if (g_ev < 0.0)
        throw DomainError("coupling must be >= 0");
    if (!(v_from > 0.0) || !(v_to > 0.0))
        throw DomainError("volumes must be positive");
    return g_ev * std::sqrt(v_from / v_to);
}

} // namespace qbat
