#include "dab/ilm.hpp"

#include <cmath>
#include <stdexcept>

namespace dab {

IlmClassification classify_mode(const ModulationPoint& m) {
    if (!m.in_bounds())
        throw std::domain_error("modulation point outside [0, pi/2]^3");
    const double u = m.delta_p + m.delta_s;
    const double d = m.delta_p - m.delta_s;
    if (u <= M_PI / 2 && m.phi >= u)
        return {IlmMode::Mode1, "phi >= dp+ds; dp+ds <= pi/2"};
    if (m.phi >= M_PI - u)
        return {IlmMode::Mode2, "phi >= pi-(dp+ds); dp+ds > pi/2"};
    if (m.phi >= std::abs(d))
        return {IlmMode::Mode3, "|dp-ds| <= phi < min(dp+ds, pi-dp-ds)"};
    if (d < 0.0)
        return {IlmMode::Mode4, "phi < ds-dp; ds > dp"};
    return {IlmMode::Mode5, "phi < dp-ds; dp > ds"};
}

namespace {
double per_unit_power(IlmMode mode, const ModulationPoint& m) {
    const double dp = m.delta_p, ds = m.delta_s, phi = m.phi;
    switch (mode) {
        case IlmMode::Mode1:
            return phi * (1.0 - phi / M_PI) - (dp * dp + ds * ds) / M_PI;
        case IlmMode::Mode2:
            return (2.0 / M_PI) * (M_PI / 2 - dp) * (M_PI / 2 - ds);
        case IlmMode::Mode3:
            return phi * (1.0 - phi / (2.0 * M_PI)) - phi * (dp + ds) / M_PI -
                   (dp - ds) * (dp - ds) / (2.0 * M_PI);
        case IlmMode::Mode4:
            return phi * (1.0 - 2.0 * ds / M_PI);
        case IlmMode::Mode5:
            return phi * (1.0 - 2.0 * dp / M_PI);
    }
    return 0.0;
}
}  // namespace

IlmPower ilm_power(const OperatingPoint& op, const ModulationPoint& m,
                   double inductance, double fsw, const IlmOptions& opts) {
    if (!(inductance > 0.0)) throw std::domain_error("inductance must be positive");
    const IlmClassification cls = classify_mode(m);
    const double gain = opts.inverted_gain ? op.vin / op.vout_prime
                                           : op.vout_prime / op.vin;
    IlmPower out;
    out.mode = cls.mode;
    out.p_pu = gain * per_unit_power(cls.mode, m);
    const double p_base = op.vin * op.vin / (2.0 * M_PI * fsw * inductance);
    out.p_watts = out.p_pu * p_base;
    return out;
}

double ilm_estimate_inductance(const OperatingPoint& op, const ModulationPoint& m,
                               double p_measured, double fsw,
                               const IlmOptions& opts) {
    if (!(p_measured > 0.0)) throw std::domain_error("measured power must be positive");
    // L enters only through Pbase, so the inversion is closed-form.
    const IlmPower unit = ilm_power(op, m, 1.0, fsw, opts);
    const double p_at_unit_l = unit.p_watts;  // watts with L = 1 H
    if (p_at_unit_l == 0.0)
        throw std::domain_error("modulation point transfers no power; inductance not invertible");
    return p_at_unit_l / p_measured;
}

}  // namespace dab
