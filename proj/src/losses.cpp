#include "dab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dab {

namespace {
double wrap_2pi(double theta) {
    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) theta += 2.0 * M_PI;
    return theta;
}
}  // namespace

const char* zvs_name(ZvsClass c) {
    switch (c) {
        case ZvsClass::Full: return "full";
        case ZvsClass::Partial: return "partial";
        case ZvsClass::Hard: return "hard";
    }
    return "?";
}

std::array<SwitchingInstant, 4> switching_instants(const CircuitParams& params,
                                                   const SteadyStateSolution& sol) {
    const double tw = params.omega_s() * params.td;
    const double dp = sol.mod.delta_p, ds = sol.mod.delta_s, phi = sol.mod.phi;

    // Top-device gate instants per leg; the on instant trails the leg's
    // commutation start by the deadtime.
    const std::array<double, 4> rise{dp, M_PI - dp, phi + ds, phi + M_PI - ds};
    const std::array<double, 4> fall{M_PI + dp, 2.0 * M_PI - dp, M_PI + phi + ds,
                                     2.0 * M_PI + phi - ds};

    std::array<SwitchingInstant, 4> out;
    for (int i = 0; i < 4; ++i) {
        SwitchingInstant& s = out[i];
        s.leg = kAllLegs[i];
        s.theta_on = wrap_2pi(rise[i] + tw);
        s.theta_off = wrap_2pi(fall[i]);
        const bool prim = is_primary(s.leg);
        const HarmonicSpectrum& cur = prim ? sol.ip : sol.is;
        s.i_on = std::abs(cur.value(s.theta_on));
        s.i_off = std::abs(cur.value(s.theta_off));
        s.v_on = sol.leg_delta_v[i];
        s.v_off = prim ? sol.op.vin : sol.op.vout_prime;
    }
    return out;
}

double vi_overlap_loss(const std::array<SwitchingInstant, 4>& instants,
                       const std::array<double, 4>& t_on,
                       const std::array<double, 4>& t_off, double fsw) {
    double p = 0.0;
    for (int i = 0; i < 4; ++i) {
        const SwitchingInstant& s = instants[i];
        p += 2.0 * s.v_off * s.i_off * fsw * t_off[i] +
             2.0 * s.v_on * s.i_on * fsw * t_on[i];
    }
    return p;
}

CossLoss coss_switching_loss(const std::array<SwitchingInstant, 4>& instants,
                             const CircuitParams& params, const OperatingPoint& op) {
    CossLoss out;
    for (int i = 0; i < 4; ++i) {
        const SwitchingInstant& s = instants[i];
        const bool prim = is_primary(s.leg);
        const CossCurve& curve = prim ? params.coss_primary : params.coss_secondary;
        // Physical device quantities (the solution is primary-referred).
        const double v_link =
            prim ? op.vin : op.vout_prime / params.turns_ratio;
        const double dv =
            std::clamp(prim ? s.v_on : s.v_on / params.turns_ratio, 0.0, v_link);

        const double e_diss = curve.energy(dv) +
                              (curve.charge(v_link) - curve.charge(v_link - dv)) * v_link -
                              (curve.energy(v_link) - curve.energy(v_link - dv));
        out.per_leg[i] = 2.0 * e_diss * params.fsw;
        out.watts += out.per_leg[i];

        if (dv < 0.01 * v_link)
            out.classification[i] = ZvsClass::Full;
        else if (dv >= 0.99 * v_link)
            out.classification[i] = ZvsClass::Hard;
        else
            out.classification[i] = ZvsClass::Partial;
    }
    return out;
}

CoreLoss core_loss(const CircuitParams& params, const SteadyStateSolution& sol) {
    CoreLoss out;
    const double ws = sol.omega_s;
    for (const MagneticCore& core : params.cores) {
        HarmonicSpectrum v = inductor_voltage(sol, params, core.winding);
        // Flux linkage is the integral of the winding voltage.
        auto flux = [&](double theta) {
            double f = 0.0;
            for (int i = 0; i < v.count(); ++i) {
                const int k = v.harmonic(i);
                f -= std::abs(v.coeff[i]) / (k * ws) *
                     std::cos(k * theta + std::arg(v.coeff[i]));
            }
            return f;
        };
        double lo = 0.0, hi = 0.0;
        const int n = 512;
        for (int i = 0; i < n; ++i) {
            const double f = flux(2.0 * M_PI * i / n);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        const double bm = (hi - lo) / (2.0 * core.n_turns * core.ae_m2);
        out.bm.push_back(bm);
        if (bm > core.b_sat) out.saturation_warning = true;

        const double tc = 1.97 - 0.02226 * core.t_core_c +
                          0.000125 * core.t_core_c * core.t_core_c;
        out.watts += 0.00353 * std::pow(params.fsw, 1.42) * std::pow(bm, 2.88) *
                     tc * core.vcore_cm3 * 1e-3;
    }
    return out;
}

double conduction_loss(const SteadyStateSolution& sol) {
    return std::abs(sol.pp_ac) - std::abs(sol.ps_ac);
}

LossBreakdown loss_breakdown(const CircuitParams& params, const OperatingPoint& op,
                             const SteadyStateSolution& sol) {
    LossBreakdown b;
    const auto instants = switching_instants(params, sol);

    b.p_cond = conduction_loss(sol);
    b.p_sw_vi = vi_overlap_loss(instants, params.t_on, params.t_off, params.fsw);
    const CossLoss coss = coss_switching_loss(instants, params, op);
    b.p_sw_coss = coss.watts;
    b.zvs = coss.classification;

    for (int i = 0; i < 4; ++i) {
        const SwitchingInstant& s = instants[i];
        const double vi = 2.0 * s.v_off * s.i_off * params.fsw * params.t_off[i] +
                          2.0 * s.v_on * s.i_on * params.fsw * params.t_on[i];
        const double leg_total = vi + coss.per_leg[i];
        if (is_primary(s.leg))
            b.p_sw_primary += leg_total;
        else
            b.p_sw_secondary += leg_total;
    }

    const CoreLoss core = core_loss(params, sol);
    b.p_core = core.watts;
    b.bm = core.bm;
    b.saturation_warning = core.saturation_warning;

    b.p_total = b.p_cond + b.p_sw_vi + b.p_sw_coss + b.p_core;
    return b;
}

PowerBalance power_balance(const SteadyStateSolution& sol, const LossBreakdown& b) {
    PowerBalance p;
    p.ps_out = std::abs(sol.ps_ac) - b.p_core - b.p_sw_secondary;
    p.pp_in = sol.pp_ac + b.p_sw_primary;
    if (p.pp_in <= 0.0)
        throw std::runtime_error("power balance: non-positive input power");
    p.efficiency = p.ps_out / p.pp_in;
    if (p.efficiency <= 0.0 || p.efficiency > 1.0)
        throw std::runtime_error("power balance: efficiency outside (0, 1]");
    return p;
}

}  // namespace dab
