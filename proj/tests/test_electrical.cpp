#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qbat/electrical.hpp"

using namespace qbat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

IvCurve sampled(double v0, double v1, double dv, const std::function<double(double)>& current) {
    IvCurve c;
    for (double v = v0; v <= v1 + 1e-12; v += dv) c.points.push_back({v, current(v)});
    return c;
}

} // namespace

TEST_CASE("quantum efficiency from photocurrent and power") {
    CHECK_THAT(eqe(2.0, 1e-3, 1e-2), WithinAbs(0.2, 1e-15));
    CHECK_THAT(eqe(1.5, 2e-3, 1e-2), WithinAbs(0.3, 1e-15));
    CHECK_THAT(eqe(2.0, 0.0, 1e-2), WithinAbs(0.0, 1e-15));

    // first-order homogeneous in current and power
    CHECK(eqe(1.7, 2e-3, 2e-2) == eqe(1.7, 1e-3, 1e-2));

    CHECK_THROWS_AS(eqe(2.0, 1e-3, 0.0), DomainError);
    CHECK_THROWS_AS(eqe(2.0, 1e-3, -1.0), DomainError);
}

TEST_CASE("spectral point carries the photon energy") {
    const EqePoint p = make_eqe_point(625.0, 2e-3, 1e-2);
    CHECK_THAT(p.photon_energy_ev, WithinRel(1.9837471744, 1e-12));
    CHECK_THAT(p.eqe, WithinRel(1.9837471744 * 0.2, 1e-12));
    CHECK_THROWS_AS(make_eqe_point(625.0, -2e-3, 1e-2), DomainError);
}

TEST_CASE("maximum power point of a linear cell") {
    // I = 1 mA (1 - V / 1 V) sampled at 10 mV: peak power 0.25 mW at 0.5 V
    const IvCurve c = sampled(0.0, 1.0, 0.01, [](double v) { return 1e-3 * (1.0 - v); });
    const MppResult r = max_power_point(c);
    CHECK_THAT(r.voltage_v, WithinAbs(0.5, 1e-12));
    CHECK_THAT(r.power_w, WithinAbs(2.5e-4, 1e-15));
    CHECK_FALSE(r.current_flipped);
    CHECK_FALSE(r.voltage_flipped);
}

TEST_CASE("sign conventions normalize away") {
    auto gen = [](double v) { return 1e-3 * (1.0 - v); };
    const IvCurve base = sampled(-0.1, 1.0, 0.01, gen);
    const MppResult ref = max_power_point(base);

    IvCurve consumer = base;  // measured with the opposite current sign
    for (auto& p : consumer.points) p.current_a = -p.current_a;
    const MppResult rc = max_power_point(consumer);
    CHECK(rc.current_flipped);
    CHECK_THAT(rc.voltage_v, WithinAbs(ref.voltage_v, 1e-12));
    CHECK_THAT(rc.power_w, WithinRel(ref.power_w, 1e-12));

    IvCurve inverted = base;  // voltage axis mirrored
    for (auto& p : inverted.points) p.voltage_v = -p.voltage_v;
    const MppResult rv = max_power_point(inverted);
    CHECK(rv.voltage_flipped);
    CHECK_THAT(rv.voltage_v, WithinAbs(ref.voltage_v, 1e-12));
    CHECK_THAT(rv.power_w, WithinRel(ref.power_w, 1e-12));
}

TEST_CASE("short-circuit current is interpolated at zero bias") {
    // samples straddle V = 0 without hitting it
    auto gen = [](double v) { return 2e-3 * (1.0 - v / 0.8); };
    IvCurve c;
    for (double v = -0.035; v <= 0.81; v += 0.01) c.points.push_back({v, gen(v)});
    const MppResult r = max_power_point(c);
    CHECK(r.power_w > 0.0);
    CHECK_THAT(r.voltage_v, WithinAbs(0.395, 0.011));  // analytic peak at 0.4
}

TEST_CASE("diode-like cell agrees with a brute-force scan") {
    const double isc = 1e-3, i0 = 1e-9, vt = 0.02585;
    auto current = [&](double v) { return isc - i0 * (std::exp(v / vt) - 1.0); };

    const IvCurve coarse = sampled(0.0, 0.40, 0.01, current);
    const MppResult r = max_power_point(coarse);

    // dense analytic scan as reference
    double best_v = 0.0, best_p = 0.0;
    for (double v = 0.0; v <= 0.40; v += 1e-5) {
        const double p = v * current(v);
        if (p > best_p) {
            best_p = p;
            best_v = v;
        }
    }
    CHECK(std::abs(r.voltage_v - best_v) <= 0.01 + 1e-12);  // one sample step

    // refining the grid converges on the analytic optimum
    const MppResult fine = max_power_point(sampled(0.0, 0.40, 0.001, current));
    CHECK(std::abs(fine.voltage_v - best_v) <= 0.001 + 1e-12);
    CHECK(fine.power_w >= r.power_w - 1e-15);
}

TEST_CASE("power ties resolve to the smaller voltage") {
    IvCurve c;
    c.points = {{0.0, 3e-3}, {0.2, 2e-3}, {0.4, 1e-3}, {0.6, 0.0}};
    const MppResult r = max_power_point(c);  // 0.2*2mA == 0.4*1mA exactly
    CHECK(r.voltage_v == 0.2);
}

TEST_CASE("curves without a generating quadrant are rejected") {
    // pure resistor: i_sc = 0 (grid built from indices so V = 0 is sampled exactly)
    IvCurve resistor;
    for (int k = -50; k <= 50; ++k) {
        const double v = double(k) / 100.0;
        resistor.points.push_back({v, v / 1e3});
    }
    CHECK_THROWS_AS(max_power_point(resistor), NoPowerPointError);

    // current never crosses zero inside the sweep
    const IvCurve open = sampled(0.0, 0.5, 0.01, [](double) { return 1e-3; });
    CHECK_THROWS_AS(max_power_point(open), NoPowerPointError);
}

TEST_CASE("curve validation") {
    IvCurve tiny;
    tiny.points = {{0.0, 1e-3}, {0.5, 0.0}};
    CHECK_THROWS_AS(max_power_point(tiny), DomainError);

    IvCurve ragged;
    ragged.points = {{0.0, 1e-3}, {0.3, 5e-4}, {0.2, 6e-4}, {0.5, 0.0}};
    CHECK_THROWS_AS(max_power_point(ragged), ValidationError);

    // descending voltage sweeps are accepted as-is
    IvCurve descending = sampled(0.0, 1.0, 0.01, [](double v) { return 1e-3 * (1.0 - v); });
    std::reverse(descending.points.begin(), descending.points.end());
    const MppResult r = max_power_point(descending);
    CHECK_THAT(r.voltage_v, WithinAbs(0.5, 1e-12));
}

TEST_CASE("power ratio between cavity and control") {
    const IvCurve control = sampled(0.0, 1.0, 0.01, [](double v) { return 1e-3 * (1.0 - v); });
    CHECK(power_ratio(control, control) == 1.0);

    const IvCurve cavity = sampled(0.0, 1.0, 0.01, [](double v) { return 3e-3 * (1.0 - v); });
    CHECK_THAT(power_ratio(cavity, control), WithinRel(3.0, 1e-12));
}
