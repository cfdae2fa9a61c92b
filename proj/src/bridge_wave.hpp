#pragma once

// Internal: constructed bridge voltage waveform with resonant deadtime
// transition windows. Shared by the frequency-domain solver and the
// time-domain oracle so both model commutations identically.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "dab/circuit_params.hpp"
#include "dab/nifdm.hpp"
#include "dab/spectrum.hpp"

namespace dab::detail {

// Per-bridge constants of the commutation resonance.
struct CommutationModel {
    double v_link = 0.0;   // V, dc link of the commutating bridge
    double l_own = 0.0;    // H, series inductance on the commutating side
    double l_other = 0.0;  // H, series inductance on the far side (referred)
    double lm = 0.0;       // H
    double c_eff = 0.0;    // F, whole-leg charge-equivalent capacitance
    double td = 0.0;       // s
    double omega_s = 0.0;  // rad/s
};

struct Transition {
    Leg leg = Leg::P1;
    double theta0 = 0.0;   // window start angle in [0, 2pi)
    int dir = +1;          // +1 leg midpoint rising
    double i_tilde0 = 0.0; // x-frame drive current (negative = favorable)
    double i_out0 = 0.0;   // physical midpoint outflow current at theta0
    bool favorable = false;
    double delta_v = 0.0;  // V, residual Vds of incoming device at turn-on
    std::vector<double> leg_v;  // midpoint voltage samples over [theta0, theta0+tw]
};

// Solves one commutation window. v_th_eff is the far-bridge voltage at the
// window start mapped into the rising frame (dir * v_other).
Transition solve_transition(const CommutationModel& cm, Leg leg, double theta0,
                            int dir, double i_out0, double v_th_eff, int n_samples);

struct BridgeWave {
    double v_link = 0.0;
    double tw = 0.0;  // window width in angle, ws*Td
    // leg1 rising, leg1 falling, leg2 rising, leg2 falling
    std::array<Transition, 4> tr;

    // Midpoint voltages of the two legs and the bridge voltage.
    double leg_value(int which_leg, double theta) const;
    double value(double theta) const { return leg_value(0, theta) - leg_value(1, theta); }

    // Exact odd-harmonic spectrum of the constructed waveform (analytic
    // constant segments + trapezoidal window integrals).
    HarmonicSpectrum spectrum(int k_max) const;
};

// Builds the four transition windows of one bridge. delta/offset place the
// nominal commutation angles at offset+delta, offset+pi-delta and their
// half-period images. current(theta) is the midpoint outflow of leg 1;
// v_other(theta) is the far bridge voltage (referred to this side).
BridgeWave build_bridge_wave(const CommutationModel& cm, double delta, double offset,
                             Leg leg1, Leg leg2,
                             const std::function<double(double)>& current,
                             const std::function<double(double)>& v_other,
                             int n_samples);

// Commutation constants for each bridge of the converter.
CommutationModel primary_commutation_model(const CircuitParams& params, double vin);
CommutationModel secondary_commutation_model(const CircuitParams& params, double vout_prime);

}  // namespace dab::detail
