#include "dab/circuit_params.hpp"

#include <algorithm>
#include <sstream>

namespace dab {

const char* leg_name(Leg leg) {
    switch (leg) {
        case Leg::P1: return "p1";
        case Leg::P2: return "p2";
        case Leg::S1: return "s1";
        case Leg::S2: return "s2";
    }
    return "?";
}

void CossCurve::validate(const std::string& name) const {
    if (points.size() < 2)
        throw ConfigError(name + ": Coss table needs at least two points");
    if (points.front().v_ds != 0.0)
        throw ConfigError(name + ": Coss table must start at v_ds = 0");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].c <= 0.0)
            throw ConfigError(name + ": Coss values must be positive");
        if (i > 0 && points[i].v_ds <= points[i - 1].v_ds)
            throw ConfigError(name + ": Coss table v_ds must be strictly increasing");
    }
}

double CossCurve::capacitance(double v) const {
    if (v < 0.0 || v > max_voltage() * (1.0 + 1e-12))
        throw std::range_error("Coss lookup outside table range");
    v = std::min(v, max_voltage());
    auto it = std::upper_bound(points.begin(), points.end(), v,
                               [](double x, const Point& p) { return x < p.v_ds; });
    if (it == points.begin()) return points.front().c;
    if (it == points.end()) return points.back().c;
    const Point& hi = *it;
    const Point& lo = *(it - 1);
    const double t = (v - lo.v_ds) / (hi.v_ds - lo.v_ds);
    return lo.c + t * (hi.c - lo.c);
}

namespace {
// Trapezoidal accumulation over the table up to v, with a final partial
// segment ending at an interpolated point.
template <typename F>
double integrate_table(const CossCurve& curve, double v, F integrand) {
    if (v < 0.0 || v > curve.max_voltage() * (1.0 + 1e-12))
        throw std::range_error("Coss integral outside table range");
    v = std::min(v, curve.max_voltage());
    double acc = 0.0;
    const auto& pts = curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double v0 = pts[i - 1].v_ds;
        if (v <= v0) break;
        const double v1 = std::min(pts[i].v_ds, v);
        const double c1 = curve.capacitance(v1);
        acc += 0.5 * (integrand(v0, pts[i - 1].c) + integrand(v1, c1)) * (v1 - v0);
    }
    return acc;
}
}  // namespace

double CossCurve::energy(double v) const {
    return integrate_table(*this, v, [](double u, double c) { return c * u; });
}

double CossCurve::charge(double v) const {
    return integrate_table(*this, v, [](double, double c) { return c; });
}

double CossCurve::charge_equivalent(double v) const {
    if (v <= 0.0) return points.front().c;
    return charge(v) / v;
}

CossCurve CossCurve::constant(double c, double v_max) {
    CossCurve curve;
    curve.points = {{0.0, c}, {v_max, c}};
    return curve;
}

CossIntegrals coss_integrals(const CossCurve& curve, double v) {
    return {curve.energy(v), curve.charge(v)};
}

std::vector<std::string> CircuitParams::validate() const {
    auto positive = [](double x, const char* field) {
        if (!(x > 0.0)) {
            std::ostringstream os;
            os << field << " must be strictly positive, got " << x;
            throw ConfigError(os.str());
        }
    };
    positive(vin_nominal, "vin_nominal");
    positive(fsw, "fsw");
    positive(turns_ratio, "turns_ratio");
    positive(lp, "Lp");
    positive(ls_prime, "Ls_prime");
    positive(lm, "Lm");
    positive(llp, "Llp");
    positive(lls, "Lls");
    positive(rated_power, "rated_power");
    if (td < 0.0) throw ConfigError("Td must be >= 0");
    if (cip < 0.0 || cis < 0.0 || cps < 0.0)
        throw ConfigError("parasitic capacitances must be >= 0");
    if (k_max < 1 || k_max % 2 == 0)
        throw ConfigError("k_max must be odd and >= 1");

    auto check_r = [this](const HarmonicResistance& r, const char* field) {
        if (r.fundamental < 0.0)
            throw ConfigError(std::string(field) + " must be >= 0");
        for (const auto& [k, val] : r.overrides) {
            if (k < 1 || k % 2 == 0)
                throw ConfigError(std::string(field) + ": harmonic index must be odd");
            if (k > k_max)
                throw ConfigError(std::string(field) + ": harmonic index exceeds k_max");
            if (val < 0.0)
                throw ConfigError(std::string(field) + " must be >= 0");
        }
    };
    check_r(rp, "Rp");
    check_r(rs, "Rs");
    check_r(rlp, "Rlp");
    check_r(rls, "Rls");

    if (td > 0.0) {
        coss_primary.validate("coss_primary");
        coss_secondary.validate("coss_secondary");
    }
    for (double t : t_on)
        if (t < 0.0) throw ConfigError("t_on must be >= 0");
    for (double t : t_off)
        if (t < 0.0) throw ConfigError("t_off must be >= 0");
    for (const auto& core : cores) {
        positive(core.n_turns, "core n_turns");
        positive(core.ae_m2, "core Ae");
        positive(core.vcore_cm3, "core Vcore");
    }
    if (!(vout_min > 0.0) || !(vout_max > vout_min))
        throw ConfigError("vout range must satisfy 0 < vout_min < vout_max");

    std::vector<std::string> warnings;
    if (lm < 10.0 * lp) {
        std::ostringstream os;
        os << "Lm = " << lm << " H is less than 10x Lp = " << lp
           << " H; the lumped-parameter assumptions degrade";
        warnings.push_back(os.str());
    }
    return warnings;
}

LumpedParams lumped_params(const CircuitParams& params) {
    const double n2 = params.n2();
    LumpedParams out;
    out.lt = params.lp + n2 * params.ls_prime;
    if (params.lumped_includes_leakage)
        out.lt += params.llp + n2 * params.lls;
    out.rt = params.rp.at(1) + n2 * params.rs.at(1);
    return out;
}

}  // namespace dab
