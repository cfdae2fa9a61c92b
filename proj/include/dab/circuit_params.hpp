#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nonlinear device output capacitance as a sampled Coss(Vds) table.
/// Points must start at Vds = 0 and be strictly increasing in Vds.
struct CossCurve {
    struct Point {
        double v_ds = 0.0;  // V
        double c = 0.0;     // F
    };
    std::vector<Point> points;

    void validate(const std::string& name) const;
    double max_voltage() const { return points.empty() ? 0.0 : points.back().v_ds; }

    /// Linear interpolation of C at voltage v. v must be within the table range.
    double capacitance(double v) const;

    /// Stored energy Eoss = ∫0..v C(u)·u du (trapezoidal over the table grid).
    double energy(double v) const;

    /// Stored charge Qoss = ∫0..v C(u) du.
    double charge(double v) const;

    /// Charge-equivalent capacitance Qoss(v)/v; C(0) for v = 0.
    double charge_equivalent(double v) const;

    static CossCurve constant(double c, double v_max);
};

struct CossIntegrals {
    double eoss = 0.0;  // J
    double qoss = 0.0;  // C
};

CossIntegrals coss_integrals(const CossCurve& curve, double v);

/// Per-odd-harmonic resistance table. Harmonics not given explicitly fall
/// back to the fundamental (k = 1) value.
struct HarmonicResistance {
    double fundamental = 0.0;            // ohms at k = 1
    std::map<int, double> overrides;     // odd k -> ohms

    double at(int k) const {
        auto it = overrides.find(k);
        return it != overrides.end() ? it->second : fundamental;
    }
};

enum class Winding { Transformer, PrimaryInductor, SecondaryInductor };

struct MagneticCore {
    Winding winding = Winding::Transformer;
    double n_turns = 1.0;
    double ae_m2 = 0.0;       // effective core area, m^2
    double vcore_cm3 = 0.0;   // core volume, cm^3
    double t_core_c = 25.0;   // core temperature, degC
    double b_sat = 0.47;      // saturation flux density, T (warning threshold)
};

/// Switching leg identifiers: p1/p2 primary bridge, s1/s2 secondary bridge.
enum class Leg : int { P1 = 0, P2 = 1, S1 = 2, S2 = 3 };
constexpr std::array<Leg, 4> kAllLegs{Leg::P1, Leg::P2, Leg::S1, Leg::S2};
const char* leg_name(Leg leg);
inline bool is_primary(Leg leg) { return leg == Leg::P1 || leg == Leg::P2; }

/// Full parasitic-inclusive parameter set of the converter. Immutable after
/// construction; shared read-only across parallel workers.
struct CircuitParams {
    double vin_nominal = 160.0;   // V
    double fsw = 100e3;           // Hz
    double turns_ratio = 1.4;     // np/ns
    double lp = 5.35e-6;          // H, primary external inductor
    double ls_prime = 2.65e-6;    // H, secondary external inductor (secondary-side value)
    double lm = 770e-6;           // H, magnetizing
    double llp = 0.24e-6;         // H, transformer primary leakage
    double lls = 0.123e-6;        // H, transformer secondary leakage (secondary-side value)

    HarmonicResistance rp;        // primary series lumped R(k)
    HarmonicResistance rs;        // secondary series lumped R(k), secondary-side value
    HarmonicResistance rlp;       // transformer primary winding ac R(k)
    HarmonicResistance rls;       // transformer secondary winding ac R(k), secondary-side

    double cip = 0.0;             // F, primary intra-winding
    double cis = 0.0;             // F, secondary intra-winding (secondary-side value)
    double cps = 0.0;             // F, primary-secondary inter-winding

    double td = 0.0;              // s, deadtime

    CossCurve coss_primary;
    CossCurve coss_secondary;

    std::array<double, 4> t_on{};   // s, per leg (Leg enum order)
    std::array<double, 4> t_off{};  // s, per leg

    std::vector<MagneticCore> cores;

    int k_max = 21;               // highest odd harmonic
    double rated_power = 2000.0;  // W
    double vout_min = 80.0;       // V, primary-referred rated output range
    double vout_max = 150.0;

    bool lumped_includes_leakage = true;

    /// Checks all invariants; throws ConfigError naming the offending field.
    /// Returns warnings (e.g. Lm not >> Lp) without failing.
    std::vector<std::string> validate() const;

    double omega_s() const { return 2.0 * M_PI * fsw; }
    double n2() const { return turns_ratio * turns_ratio; }
};

/// TPS control triple, each in [0, pi/2].
struct ModulationPoint {
    double delta_p = 0.0;  // rad
    double delta_s = 0.0;  // rad
    double phi = 0.0;      // rad

    bool in_bounds(double tol = 1e-12) const {
        auto ok = [tol](double x) { return x >= -tol && x <= M_PI / 2 + tol; };
        return ok(delta_p) && ok(delta_s) && ok(phi);
    }
};

struct OperatingPoint {
    double vin = 160.0;        // V
    double vout_prime = 100.0; // V, primary referred
    double ps_out_target = 0.0;// W
};

struct LumpedParams {
    double lt = 0.0;  // H
    double rt = 0.0;  // ohm
};

/// Primary-referred lumped series inductance and resistance. Transformer
/// leakages are folded into Lt when params.lumped_includes_leakage is set
/// (the default), which reproduces the nominal 11.02 uH figure.
LumpedParams lumped_params(const CircuitParams& params);

}  // namespace dab
