#include "bridge_wave.hpp"

#include <algorithm>

namespace dab::detail {

namespace {
double wrap_2pi(double theta) {
    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) theta += 2.0 * M_PI;
    return theta;
}
}  // namespace

Transition solve_transition(const CommutationModel& cm, Leg leg, double theta0,
                            int dir, double i_out0, double v_th_eff, int n_samples) {
    Transition t;
    t.leg = leg;
    t.theta0 = wrap_2pi(theta0);
    t.dir = dir;
    t.i_out0 = i_out0;
    t.i_tilde0 = dir * i_out0;
    t.favorable = t.i_tilde0 < 0.0;
    t.leg_v.assign(n_samples + 1, 0.0);

    const double v = cm.v_link;
    if (!t.favorable) {
        // Current holds the node at the outgoing rail; the incoming device
        // force-commutates at the end of the deadtime with the full link
        // voltage across it.
        for (int i = 0; i <= n_samples; ++i)
            t.leg_v[i] = dir > 0 ? 0.0 : v;
        t.delta_v = v;
        return t;
    }

    const double leq = cm.l_own + cm.lm * cm.l_other / (cm.lm + cm.l_other);
    const double veq = v - cm.lm / (cm.lm + cm.l_other) * v_th_eff;
    const double w0 = 1.0 / std::sqrt(leq * cm.c_eff);

    double x_end = 0.0;
    bool latched = false;
    for (int i = 0; i <= n_samples; ++i) {
        const double tt = cm.td * i / n_samples;
        double x;
        if (latched) {
            x = v;
        } else {
            x = veq * (1.0 - std::cos(w0 * tt)) -
                t.i_tilde0 / (w0 * cm.c_eff) * std::sin(w0 * tt);
            if (x >= v) {
                x = v;
                latched = true;
            }
            x = std::max(x, 0.0);
        }
        x_end = x;
        t.leg_v[i] = dir > 0 ? x : v - x;
    }
    t.delta_v = std::clamp(v - x_end, 0.0, v);
    return t;
}

double BridgeWave::leg_value(int which_leg, double theta) const {
    const Transition& rise = tr[which_leg * 2];
    const Transition& fall = tr[which_leg * 2 + 1];
    // Angle measured from the rising window start.
    double rel = wrap_2pi(theta - rise.theta0);
    const double fall_rel = wrap_2pi(fall.theta0 - rise.theta0);
    auto window_value = [this](const Transition& t, double local) {
        const int n = static_cast<int>(t.leg_v.size()) - 1;
        const double pos = std::clamp(local / tw, 0.0, 1.0) * n;
        const int i = std::min(static_cast<int>(pos), n - 1);
        const double frac = pos - i;
        return t.leg_v[i] + frac * (t.leg_v[i + 1] - t.leg_v[i]);
    };
    if (rel < tw) return window_value(rise, rel);
    if (rel < fall_rel) return v_link;
    if (rel < fall_rel + tw) return window_value(fall, rel - fall_rel);
    return 0.0;
}

HarmonicSpectrum BridgeWave::spectrum(int k_max) const {
    HarmonicSpectrum out(k_max);
    const std::complex<double> j(0.0, 1.0);

    // F_k = j/pi * Int v(theta) e^{-j k theta} dtheta, legs contributing +/-.
    auto add_const = [&](int k, double a, double b, double value, double sign,
                         std::complex<double>& acc) {
        if (b <= a || value == 0.0) return;
        const std::complex<double> e_a = std::exp(-j * (double)k * a);
        const std::complex<double> e_b = std::exp(-j * (double)k * b);
        acc += sign * value * (e_a - e_b) / (j * (double)k);
    };

    for (int idx = 0; idx < out.count(); ++idx) {
        const int k = out.harmonic(idx);
        std::complex<double> acc(0.0, 0.0);
        for (int legi = 0; legi < 2; ++legi) {
            const double sign = legi == 0 ? 1.0 : -1.0;
            const Transition& rise = tr[legi * 2];
            const Transition& fall = tr[legi * 2 + 1];
            const double a0 = rise.theta0;
            const double fall_rel = wrap_2pi(fall.theta0 - rise.theta0);

            // Windows: trapezoid over the sampled trajectory.
            auto add_window = [&](const Transition& t, double start) {
                const int n = static_cast<int>(t.leg_v.size()) - 1;
                const double h = tw / n;
                for (int i = 0; i < n; ++i) {
                    const double th0 = start + h * i;
                    const double th1 = th0 + h;
                    const std::complex<double> f0 =
                        t.leg_v[i] * std::exp(-j * (double)k * th0);
                    const std::complex<double> f1 =
                        t.leg_v[i + 1] * std::exp(-j * (double)k * th1);
                    acc += sign * 0.5 * (f0 + f1) * h;
                }
            };
            add_window(rise, a0);
            add_const(k, a0 + tw, a0 + fall_rel, v_link, sign, acc);
            add_window(fall, a0 + fall_rel);
            // Low segment contributes zero.
        }
        out.coeff[idx] = j / M_PI * acc;
    }
    return out;
}

BridgeWave build_bridge_wave(const CommutationModel& cm, double delta, double offset,
                             Leg leg1, Leg leg2,
                             const std::function<double(double)>& current,
                             const std::function<double(double)>& v_other,
                             int n_samples) {
    BridgeWave w;
    w.v_link = cm.v_link;
    w.tw = cm.omega_s * cm.td;

    struct Slot {
        Leg leg;
        double theta0;
        int dir;
        double out_sign;  // midpoint outflow = out_sign * current(theta0)
    };
    const std::array<Slot, 4> slots{{
        {leg1, offset + delta, +1, +1.0},
        {leg1, offset + delta + M_PI, -1, +1.0},
        {leg2, offset + M_PI - delta, +1, -1.0},
        {leg2, offset + 2.0 * M_PI - delta, -1, -1.0},
    }};
    for (int i = 0; i < 4; ++i) {
        const Slot& s = slots[i];
        const double th = wrap_2pi(s.theta0);
        const double i_out = s.out_sign * current(th);
        const double v_th_eff = s.dir * v_other(th);
        w.tr[i] = solve_transition(cm, s.leg, th, s.dir, i_out, v_th_eff, n_samples);
    }
    return w;
}

CommutationModel primary_commutation_model(const CircuitParams& params, double vin) {
    CommutationModel cm;
    const double n2 = params.n2();
    cm.v_link = vin;
    cm.l_own = params.lp + params.llp;
    cm.l_other = n2 * (params.ls_prime + params.lls);
    cm.lm = params.lm;
    cm.c_eff = 2.0 * params.coss_primary.charge_equivalent(vin);
    cm.td = params.td;
    cm.omega_s = params.omega_s();
    return cm;
}

CommutationModel secondary_commutation_model(const CircuitParams& params,
                                             double vout_prime) {
    CommutationModel cm;
    const double n2 = params.n2();
    cm.v_link = vout_prime;
    cm.l_own = n2 * (params.ls_prime + params.lls);
    cm.l_other = params.lp + params.llp;
    cm.lm = params.lm;
    // Devices see the physical link voltage; referred capacitance scales 1/n^2.
    cm.c_eff = 2.0 * params.coss_secondary.charge_equivalent(
                         vout_prime / params.turns_ratio) / n2;
    cm.td = params.td;
    cm.omega_s = params.omega_s();
    return cm;
}

}  // namespace dab::detail
