#pragma once

#include <array>
#include <vector>

#include "dab/nifdm.hpp"

namespace dab {

/// Loss accounting on top of a solved steady state: conduction, v-i overlap
/// switching, incomplete-ZVS charge loss, core loss, and terminal power
/// bookkeeping.

/// Per-leg top-device switching instants and the electrical state at them.
/// Bottom devices mirror the top ones half a period later with the same
/// |v| and |i|, which is where the factor 2 in the loss sums comes from.
struct SwitchingInstant {
    Leg leg = Leg::P1;
    double theta_on = 0.0;   // rad, gate-on instant (commutation start + ws*Td)
    double theta_off = 0.0;  // rad
    double v_on = 0.0;       // V, residual drain-source voltage at turn-on
    double v_off = 0.0;      // V, settled drain-source voltage after turn-off
    double i_on = 0.0;       // A, |bridge current| at turn-on
    double i_off = 0.0;      // A, |bridge current| at turn-off
};

/// Secondary-leg voltages are primary-referred, like the solution itself.
std::array<SwitchingInstant, 4> switching_instants(const CircuitParams& params,
                                                   const SteadyStateSolution& sol);

double vi_overlap_loss(const std::array<SwitchingInstant, 4>& instants,
                       const std::array<double, 4>& t_on,
                       const std::array<double, 4>& t_off, double fsw);

enum class ZvsClass { Full, Partial, Hard };
const char* zvs_name(ZvsClass c);

struct CossLoss {
    double watts = 0.0;
    std::array<double, 4> per_leg{};        // W
    std::array<ZvsClass, 4> classification{};
};

/// Charge/energy loss of the incomplete leg transitions, evaluated on the
/// physical (unreferred) device curves and link voltages.
CossLoss coss_switching_loss(const std::array<SwitchingInstant, 4>& instants,
                             const CircuitParams& params, const OperatingPoint& op);

struct CoreLoss {
    double watts = 0.0;
    std::vector<double> bm;  // T, per configured core
    bool saturation_warning = false;
};

/// Steinmetz fit over the peak flux density of each configured core; Bm from
/// the winding's flux swing (integrated voltage waveform) / (2 N Ae).
CoreLoss core_loss(const CircuitParams& params, const SteadyStateSolution& sol);

/// Terminal-power difference; equals the branch-wise ohmic sum.
double conduction_loss(const SteadyStateSolution& sol);

struct LossBreakdown {
    double p_cond = 0.0;
    double p_sw_vi = 0.0;
    double p_sw_coss = 0.0;
    double p_core = 0.0;
    double p_total = 0.0;
    double p_sw_primary = 0.0;    // v-i + coss of legs p1/p2
    double p_sw_secondary = 0.0;  // v-i + coss of legs s1/s2
    std::array<ZvsClass, 4> zvs{};
    std::vector<double> bm;
    bool saturation_warning = false;
};

LossBreakdown loss_breakdown(const CircuitParams& params, const OperatingPoint& op,
                             const SteadyStateSolution& sol);

struct PowerBalance {
    double ps_out = 0.0;      // W delivered to the output port
    double pp_in = 0.0;       // W drawn from the input port
    double efficiency = 0.0;
};

/// Throws std::runtime_error when the bookkeeping yields an efficiency
/// outside (0, 1].
PowerBalance power_balance(const SteadyStateSolution& sol, const LossBreakdown& b);

}  // namespace dab
