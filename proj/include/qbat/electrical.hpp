#pragma once

// Electrical-measurement analysis: external quantum efficiency, maximum power
// point extraction, and cavity/control peak-power ratios.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qbat/core.hpp"

namespace qbat {

/// eqe = photon_energy[eV] * photocurrent[A] / incident_power[W]; the
/// electron charge and hbar*omega/e factors cancel into this form.
inline double eqe(double photon_energy_ev, double photocurrent_a, double incident_power_w) {
    if (!(incident_power_w > 0.0))
        throw DomainError("eqe: incident power must be > 0");
    return photon_energy_ev * photocurrent_a / incident_power_w;
}

struct EqePoint {
    double wavelength_nm = 0.0;
    double photon_energy_ev = 0.0;
    double photocurrent_a = 0.0;
    double incident_power_w = 0.0;
    double eqe = 0.0;
};

inline EqePoint make_eqe_point(double wavelength_nm, double photocurrent_a,
                               double incident_power_w) {
    EqePoint p;
    p.wavelength_nm = wavelength_nm;
    p.photon_energy_ev = wavelength_nm_to_ev(wavelength_nm);
    p.photocurrent_a = photocurrent_a;
    p.incident_power_w = incident_power_w;
    p.eqe = eqe(p.photon_energy_ev, photocurrent_a, incident_power_w);
    if (p.eqe < 0.0)
        throw DomainError("eqe must be >= 0; check the photocurrent sign convention");
    return p;
}

struct IvPoint {
    double voltage_v = 0.0;
    double current_a = 0.0;
};

struct IvCurve {
    std::vector<IvPoint> points;
    double illumination_mw_per_cm2 = 0.0;  ///< metadata only
};

struct MppResult {
    double voltage_v = 0.0;  ///< in the normalized convention (V_oc > 0)
    double power_w = 0.0;    ///< extracted power, positive
    bool current_flipped = false;  ///< sign normalization applied to I
    bool voltage_flipped = false;  ///< sign normalization applied to V
};

class NoPowerPointError : public DomainError {
  public:
    using DomainError::DomainError;
};

namespace detail {

/// Linear interpolation of current at v = 0; nearest endpoint if 0 is outside
/// the sampled range. Points must be sorted by voltage.
inline double current_at_zero(const std::vector<IvPoint>& pts) {
    if (0.0 <= pts.front().voltage_v) return pts.front().current_a;
    if (0.0 >= pts.back().voltage_v) return pts.back().current_a;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto& lo = pts[i];
        const auto& hi = pts[i + 1];
        if (lo.voltage_v <= 0.0 && 0.0 <= hi.voltage_v) {
            const double span = hi.voltage_v - lo.voltage_v;
            const double f = (0.0 - lo.voltage_v) / span;
            return lo.current_a + f * (hi.current_a - lo.current_a);
        }
    }
    return pts.back().current_a;  // unreachable for sorted input
}

/// Voltage where the current first crosses (or touches) zero moving away from
/// the short-circuit point. NaN when no crossing is sampled.
inline double open_circuit_voltage(const std::vector<IvPoint>& pts) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i].current_a, b = pts[i + 1].current_a;
        if (a == 0.0 && pts[i].voltage_v != 0.0) return pts[i].voltage_v;
        if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) {
            const double f = a / (a - b);
            return pts[i].voltage_v + f * (pts[i + 1].voltage_v - pts[i].voltage_v);
        }
    }
    if (pts.back().current_a == 0.0) return pts.back().voltage_v;
    return std::nan("");
}

} // namespace detail

/// Normalize an I-V curve so that the short-circuit current and open-circuit
/// voltage are both positive, then return the sampled point of maximal
/// extracted power I*V over the generating quadrant {V > 0, I > 0}. Discrete
/// samples only; ties go to the smaller |V|.
inline MppResult max_power_point(const IvCurve& curve) {
    if (curve.points.size() < 3)
        throw DomainError("max_power_point: need at least 3 samples");

    std::vector<IvPoint> pts = curve.points;
    if (pts.front().voltage_v > pts.back().voltage_v)
        std::reverse(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (!(pts[i].voltage_v < pts[i + 1].voltage_v))
            throw ValidationError("max_power_point: voltages must be strictly monotone");

    MppResult result;

    const double i_sc = detail::current_at_zero(pts);
    if (i_sc == 0.0)
        throw NoPowerPointError("max_power_point: zero short-circuit current, "
                                "no power-generating quadrant");
    if (i_sc < 0.0) {
        result.current_flipped = true;
        for (auto& p : pts) p.current_a = -p.current_a;
    }

    const double v_oc = detail::open_circuit_voltage(pts);
    if (std::isnan(v_oc))
        throw NoPowerPointError("max_power_point: current never crosses zero in the "
                                "sampled range, open-circuit point not bracketed");
    if (v_oc < 0.0) {
        result.voltage_flipped = true;
        for (auto& p : pts) p.voltage_v = -p.voltage_v;
        std::reverse(pts.begin(), pts.end());
    }

    bool found = false;
    for (const auto& p : pts) {
        if (!(p.voltage_v > 0.0 && p.current_a > 0.0)) continue;
        const double power = p.voltage_v * p.current_a;
        const bool better =
            !found || power > result.power_w ||
            (power == result.power_w && std::abs(p.voltage_v) < std::abs(result.voltage_v));
        if (better) {
            result.voltage_v = p.voltage_v;
            result.power_w = power;
            found = true;
        }
    }
    if (!found)
        throw NoPowerPointError("max_power_point: no sampled point in the "
                                "power-generating quadrant");
    return result;
}

/// Peak extracted power of the cavity device over its control.
inline double power_ratio(const IvCurve& cavity, const IvCurve& control) {
    const MppResult pc = max_power_point(cavity);
    const MppResult pnc = max_power_point(control);
    if (pnc.power_w == 0.0)
        throw DomainError("power_ratio: control device delivers zero power");
    return pc.power_w / pnc.power_w;
}

} // namespace qbat
