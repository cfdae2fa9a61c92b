#include "dab/nifdm.hpp"

#include <cmath>

#include "bridge_wave.hpp"

namespace dab {

using cplx = std::complex<double>;
namespace {
const cplx J(0.0, 1.0);

cplx par(cplx a, cplx b) {
    const cplx s = a + b;
    if (s == cplx(0.0, 0.0))
        throw SingularNetworkError("impedance cancellation in parallel combination");
    return a * b / s;
}
}  // namespace

BridgeSpectra ideal_bridge_harmonics(const OperatingPoint& op,
                                     const ModulationPoint& m, int k_max) {
    if (!m.in_bounds())
        throw std::domain_error("modulation point outside [0, pi/2]^3");
    BridgeSpectra s{HarmonicSpectrum(k_max), HarmonicSpectrum(k_max)};
    for (int i = 0; i < s.vp.count(); ++i) {
        const int k = s.vp.harmonic(i);
        s.vp.coeff[i] = 4.0 * op.vin / (k * M_PI) * std::cos(k * m.delta_p);
        s.vs.coeff[i] = 4.0 * op.vout_prime / (k * M_PI) * std::cos(k * m.delta_s) *
                        std::exp(-J * (double)k * m.phi);
    }
    return s;
}

TNetwork network_impedances(const CircuitParams& params, int k_max) {
    TNetwork net;
    net.k_max = k_max;
    const int n = (k_max + 1) / 2;
    net.z1.resize(n);
    net.z2.resize(n);
    net.z3.resize(n);
    const double ws = params.omega_s();
    const double n2 = params.n2();
    for (int i = 0; i < n; ++i) {
        const int k = 2 * i + 1;
        const double w = k * ws;
        const cplx zp = params.rp.at(k) + J * w * params.lp;
        const cplx zs = n2 * params.rs.at(k) + J * w * n2 * params.ls_prime;
        const cplx zlp = params.rlp.at(k) + J * w * params.llp;
        const cplx zls = n2 * params.rls.at(k) + J * w * n2 * params.lls;
        const cplx zlm = J * w * params.lm;

        // Star -> delta on the transformer branch.
        const cplx z1 = zlp + zlm + zlp * zlm / zls;
        const cplx z2 = zls + zlm + zls * zlm / zlp;
        const cplx z3 = zlp + zls + zlp * zls / zlm;

        // Shunt the parasitic capacitances, then delta -> star.
        auto with_cap = [&](cplx z, double c) {
            if (c <= 0.0) return z;
            return par(z, 1.0 / (J * w * c));
        };
        const cplx z1c = with_cap(z1, params.cip);
        const cplx z2c = with_cap(z2, params.cis / n2);
        const cplx z3c = with_cap(z3, params.cps);
        const cplx sum = z1c + z2c + z3c;
        if (sum == cplx(0.0, 0.0))
            throw SingularNetworkError("delta-star denominator vanished");
        net.z1[i] = zp + z1c * z3c / sum;
        net.z2[i] = zs + z2c * z3c / sum;
        net.z3[i] = z1c * z2c / sum;
    }
    return net;
}

BranchCurrents harmonic_currents(const HarmonicSpectrum& vp,
                                 const HarmonicSpectrum& vs, const TNetwork& net) {
    if (vp.k_max != vs.k_max || vp.k_max != net.k_max)
        throw std::invalid_argument("spectra and network k support differ");
    BranchCurrents out{HarmonicSpectrum(vp.k_max), HarmonicSpectrum(vp.k_max)};
    for (int i = 0; i < vp.count(); ++i) {
        const cplx z1 = net.z1[i], z2 = net.z2[i], z3 = net.z3[i];
        const cplx d1 = z1 + par(z2, z3);
        const cplx d2 = z2 + par(z1, z3);
        if (z3 == cplx(0.0, 0.0))
            throw SingularNetworkError("shunt impedance vanished");
        const cplx dm = z1 + z2 + z1 * z2 / z3;
        if (d1 == cplx(0.0, 0.0) || d2 == cplx(0.0, 0.0) || dm == cplx(0.0, 0.0))
            throw SingularNetworkError("current denominator vanished");
        out.ip.coeff[i] = vp.coeff[i] / d1 - vs.coeff[i] / dm;
        out.is.coeff[i] = vs.coeff[i] / d2 - vp.coeff[i] / dm;
    }
    return out;
}

AcPowers ac_powers(const HarmonicSpectrum& vp, const HarmonicSpectrum& vs,
                   const HarmonicSpectrum& ip, const HarmonicSpectrum& is) {
    AcPowers p;
    for (int i = 0; i < vp.count(); ++i) {
        p.pp_ac += 0.5 * std::real(vp.coeff[i] * std::conj(ip.coeff[i]));
        p.ps_ac += 0.5 * std::real(vs.coeff[i] * std::conj(is.coeff[i]));
    }
    return p;
}

double branch_conduction_sum(const BranchCurrents& cur, const TNetwork& net) {
    double loss = 0.0;
    for (int i = 0; i < cur.ip.count(); ++i) {
        const cplx ip = cur.ip.coeff[i];
        const cplx is = cur.is.coeff[i];
        loss += 0.5 * (std::norm(ip) * std::real(net.z1[i]) +
                       std::norm(is) * std::real(net.z2[i]) +
                       std::norm(ip + is) * std::real(net.z3[i]));
    }
    return loss;
}

double DeadtimeTransition::x(double t) const {
    return veq * (1.0 - std::cos(omega0 * t)) -
           ip0 / (omega0 * c_eff) * std::sin(omega0 * t);
}

double DeadtimeTransition::vp(double t) const {
    if (immediate) return v_link;
    const double raw = 2.0 * x(t) - v_link;
    return std::clamp(raw, -v_link, v_link);
}

DeadtimeTransition deadtime_transition(const CircuitParams& params, double v_in_leg,
                                       double v_th, double ip0) {
    if (!(params.td > 0.0))
        throw std::domain_error("deadtime_transition requires Td > 0");
    DeadtimeTransition t;
    t.v_link = v_in_leg;
    const double n2 = params.n2();
    const double ls = n2 * (params.ls_prime + params.lls);
    t.leq = params.lp + params.llp + params.lm * ls / (params.lm + ls);
    t.veq = v_in_leg - params.lm / (params.lm + ls) * v_th;
    t.c_eff = 2.0 * params.coss_primary.charge_equivalent(v_in_leg);
    t.omega0 = 1.0 / std::sqrt(t.leq * t.c_eff);
    t.ip0 = ip0;
    t.immediate = ip0 >= 0.0;
    return t;
}

SteadyStateSolution solve_steady_state(const CircuitParams& params,
                                       const OperatingPoint& op,
                                       const ModulationPoint& m,
                                       const SolveSettings& settings) {
    if (!m.in_bounds())
        throw std::domain_error("modulation point outside [0, pi/2]^3");
    if (settings.correction_passes < 0)
        throw std::domain_error("correction_passes must be >= 0");

    SteadyStateSolution sol;
    sol.op = op;
    sol.mod = m;
    sol.k_max = settings.k_max;
    sol.omega_s = params.omega_s();
    sol.td = params.td;
    sol.net = network_impedances(params, settings.k_max);

    BridgeSpectra volts = ideal_bridge_harmonics(op, m, settings.k_max);
    BranchCurrents cur = harmonic_currents(volts.vp, volts.vs, sol.net);
    AcPowers pw = ac_powers(volts.vp, volts.vs, cur.ip, cur.is);
    sol.passes_used = 0;
    sol.leg_delta_v.fill(0.0);
    sol.converged = true;

    if (params.td > 0.0 && settings.correction_passes > 0) {
        const detail::CommutationModel cmp =
            detail::primary_commutation_model(params, op.vin);
        const detail::CommutationModel cms =
            detail::secondary_commutation_model(params, op.vout_prime);
        sol.converged = false;
        for (int pass = 1; pass <= settings.correction_passes; ++pass) {
            const HarmonicSpectrum ip_prev = cur.ip;
            const HarmonicSpectrum is_prev = cur.is;
            const HarmonicSpectrum vp_prev = volts.vp;
            const HarmonicSpectrum vs_prev = volts.vs;

            detail::BridgeWave wave_p = detail::build_bridge_wave(
                cmp, m.delta_p, 0.0, Leg::P1, Leg::P2,
                [&](double th) { return ip_prev.value(th); },
                [&](double th) { return vs_prev.value(th); }, settings.window_samples);
            detail::BridgeWave wave_s = detail::build_bridge_wave(
                cms, m.delta_s, m.phi, Leg::S1, Leg::S2,
                [&](double th) { return is_prev.value(th); },
                [&](double th) { return vp_prev.value(th); }, settings.window_samples);

            volts.vp = wave_p.spectrum(settings.k_max);
            volts.vs = wave_s.spectrum(settings.k_max);
            cur = harmonic_currents(volts.vp, volts.vs, sol.net);
            const AcPowers pw_new = ac_powers(volts.vp, volts.vs, cur.ip, cur.is);
            sol.passes_used = pass;

            sol.events.clear();
            sol.leg_delta_v.fill(0.0);
            const double tw = sol.omega_s * params.td;
            for (const detail::BridgeWave* w : {&wave_p, &wave_s}) {
                for (const auto& t : w->tr) {
                    CommutationEvent ev;
                    ev.leg = t.leg;
                    ev.theta0 = t.theta0;
                    ev.direction = t.dir;
                    ev.i0 = t.i_out0;
                    ev.favorable = t.favorable;
                    ev.delta_v = t.delta_v;
                    ev.turn_on_theta = t.theta0 + tw;
                    sol.events.push_back(ev);
                    auto& worst = sol.leg_delta_v[static_cast<int>(t.leg)];
                    worst = std::max(worst, t.delta_v);
                }
            }

            const double dps = std::abs(pw_new.ps_ac - pw.ps_ac);
            pw = pw_new;
            const double scale = std::max(std::abs(pw.ps_ac), 1e-9);
            if (dps < settings.power_tol * scale) {
                sol.converged = true;
                break;
            }
        }
        if (!sol.converged)
            sol.warnings.push_back("deadtime correction did not converge within pass budget");
    }

    sol.vp = volts.vp;
    sol.vs = volts.vs;
    sol.ip = cur.ip;
    sol.is = cur.is;
    sol.ip_rms = cur.ip.rms();
    sol.is_rms = cur.is.rms();
    sol.pp_ac = pw.pp_ac;
    sol.ps_ac = pw.ps_ac;
    return sol;
}

SampledWaveforms sample_waveforms(const SteadyStateSolution& sol, int samples,
                                  double fsw) {
    SampledWaveforms w;
    w.t.resize(samples);
    w.vp.resize(samples);
    w.vs.resize(samples);
    w.ip.resize(samples);
    w.is.resize(samples);
    for (int n = 0; n < samples; ++n) {
        const double theta = 2.0 * M_PI * n / samples;
        w.t[n] = theta / (2.0 * M_PI * fsw);
        w.vp[n] = sol.vp.value(theta);
        w.vs[n] = sol.vs.value(theta);
        w.ip[n] = sol.ip.value(theta);
        w.is[n] = sol.is.value(theta);
    }
    return w;
}

HarmonicSpectrum magnetizing_voltage(const SteadyStateSolution& sol) {
    HarmonicSpectrum vm(sol.k_max);
    for (int i = 0; i < vm.count(); ++i)
        vm.coeff[i] = (sol.ip.coeff[i] + sol.is.coeff[i]) * sol.net.z3[i];
    return vm;
}

HarmonicSpectrum inductor_voltage(const SteadyStateSolution& sol,
                                  const CircuitParams& params, Winding which) {
    HarmonicSpectrum v(sol.k_max);
    const double ws = sol.omega_s;
    for (int i = 0; i < v.count(); ++i) {
        const double w = v.harmonic(i) * ws;
        switch (which) {
            case Winding::PrimaryInductor:
                v.coeff[i] = sol.ip.coeff[i] * (J * w * params.lp);
                break;
            case Winding::SecondaryInductor:
                // Physical (unreferred) winding voltage.
                v.coeff[i] = sol.is.coeff[i] *
                             (J * w * params.n2() * params.ls_prime) /
                             params.turns_ratio;
                break;
            case Winding::Transformer:
                v.coeff[i] = (sol.ip.coeff[i] + sol.is.coeff[i]) * sol.net.z3[i];
                break;
        }
    }
    return v;
}

}  // namespace dab
