#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dab/circuit_params.hpp"
#include "dab/spectrum.hpp"

namespace dab {

/// Non-ideality-inclusive frequency-domain model: odd-harmonic phasor
/// solution of the full parasitic T-network with deadtime-corrected bridge
/// voltage spectra. All secondary quantities are handled primary-referred.

struct SingularNetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BridgeSpectra {
    HarmonicSpectrum vp;
    HarmonicSpectrum vs;
};

/// Ideal quasi-square bridge voltage spectra:
///   Vp_k = (4 Vin / k pi) cos(k dp) at angle 0,
///   Vs_k = (4 Vout' / k pi) cos(k ds) at angle -k phi
/// (signs folded into the complex phasor).
BridgeSpectra ideal_bridge_harmonics(const OperatingPoint& op,
                                     const ModulationPoint& m, int k_max);

/// Reduced T-equivalent of the parasitic network, per odd harmonic.
struct TNetwork {
    int k_max = 1;
    std::vector<std::complex<double>> z1;  // series, primary side
    std::vector<std::complex<double>> z2;  // series, secondary side (referred)
    std::vector<std::complex<double>> z3;  // shunt

    std::complex<double> z1_at(int k) const { return z1[(k - 1) / 2]; }
    std::complex<double> z2_at(int k) const { return z2[(k - 1) / 2]; }
    std::complex<double> z3_at(int k) const { return z3[(k - 1) / 2]; }
};

/// Star-delta transformation of the transformer branch, shunting of the
/// parasitic capacitances, and delta-star reduction back to a T-network.
TNetwork network_impedances(const CircuitParams& params, int k_max);

struct BranchCurrents {
    HarmonicSpectrum ip;  // out of the primary bridge leg-1 midpoint
    HarmonicSpectrum is;  // out of the secondary bridge leg-1 midpoint (referred)
};

BranchCurrents harmonic_currents(const HarmonicSpectrum& vp,
                                 const HarmonicSpectrum& vs, const TNetwork& net);

struct AcPowers {
    double pp_ac = 0.0;  // W, > 0 when the primary bridge sources
    double ps_ac = 0.0;  // W, < 0 when the secondary bridge absorbs
};

AcPowers ac_powers(const HarmonicSpectrum& vp, const HarmonicSpectrum& vs,
                   const HarmonicSpectrum& ip, const HarmonicSpectrum& is);

/// Ohmic dissipation summed branch-wise over the reduced network,
/// sum_k 1/2 (|Ip|^2 Re Z1 + |Is|^2 Re Z2 + |Ip+Is|^2 Re Z3).
double branch_conduction_sum(const BranchCurrents& cur, const TNetwork& net);

/// Resonant switching-node transition during deadtime for one commutating
/// leg. x(t) is the drain-source voltage of the outgoing device; the
/// effective capacitance is the whole leg's charge-equivalent value
/// (both switch positions), evaluated at the dc-link voltage.
struct DeadtimeTransition {
    double v_link = 0.0;   // V
    double veq = 0.0;      // V
    double leq = 0.0;      // H
    double c_eff = 0.0;    // F
    double omega0 = 0.0;   // rad/s
    double ip0 = 0.0;      // A at window start
    bool immediate = false;  // ip0 >= 0: transition treated as instantaneous

    /// Unclamped resonant solution, x(0) = 0.
    double x(double t) const;
    /// Bridge voltage 2x - Vin clamped to [-Vin, +Vin]; v_link for the
    /// immediate branch.
    double vp(double t) const;
};

DeadtimeTransition deadtime_transition(const CircuitParams& params, double v_in_leg,
                                       double v_th, double ip0);

/// One leg commutation event inside the steady-state solution.
struct CommutationEvent {
    Leg leg = Leg::P1;
    double theta0 = 0.0;      // rad, deadtime window start
    int direction = +1;       // +1 midpoint rising, -1 falling
    double i0 = 0.0;          // A, midpoint outflow current at window start
    bool favorable = false;   // current direction supports a resonant swing
    double delta_v = 0.0;     // V, residual Vds of the incoming device at turn-on
    double turn_on_theta = 0.0;  // rad, gate instant (theta0 + ws*Td)
};

struct SolveSettings {
    int k_max = 21;
    int correction_passes = 3;
    double power_tol = 1e-3;        // relative |dPs_ac| convergence threshold
    int window_samples = 64;        // trajectory samples per deadtime window
};

struct SteadyStateSolution {
    OperatingPoint op;
    ModulationPoint mod;
    int k_max = 21;

    HarmonicSpectrum vp;   // deadtime-corrected bridge voltage spectra
    HarmonicSpectrum vs;
    HarmonicSpectrum ip;
    HarmonicSpectrum is;

    double ip_rms = 0.0;
    double is_rms = 0.0;
    double pp_ac = 0.0;
    double ps_ac = 0.0;

    std::array<double, 4> leg_delta_v{};      // worst residual Vds per leg
    std::vector<CommutationEvent> events;     // 8 per period when Td > 0

    int passes_used = 0;
    bool converged = true;
    std::vector<std::string> warnings;

    TNetwork net;
    double omega_s = 0.0;
    double td = 0.0;
};

/// Full NIFDM solve: ideal spectra, then deadtime correction passes that
/// resample commutation currents, rebuild the bridge voltage spectra from
/// the constructed transition waveforms, and re-solve the network.
SteadyStateSolution solve_steady_state(const CircuitParams& params,
                                       const OperatingPoint& op,
                                       const ModulationPoint& m,
                                       const SolveSettings& settings = {});

/// Sampled (t, vp, vs, ip, is) rows over one period for export/plotting.
struct SampledWaveforms {
    std::vector<double> t;  // seconds
    std::vector<double> vp, vs, ip, is;
};

SampledWaveforms sample_waveforms(const SteadyStateSolution& sol, int samples, double fsw);

/// Magnetizing-branch voltage spectrum (Ip + Is through the shunt arm).
HarmonicSpectrum magnetizing_voltage(const SteadyStateSolution& sol);

/// Voltage spectrum across an external series inductor (primary-referred).
HarmonicSpectrum inductor_voltage(const SteadyStateSolution& sol,
                                  const CircuitParams& params, Winding which);

}  // namespace dab
