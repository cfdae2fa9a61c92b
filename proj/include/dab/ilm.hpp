#pragma once

#include <string>

#include "dab/circuit_params.hpp"

namespace dab {

/// Ideal lossless model: classic piecewise-linear time-domain DAB analysis.
/// Serves as the analytical baseline for power flow and reverse inductance
/// estimation.

enum class IlmMode { Mode1 = 1, Mode2, Mode3, Mode4, Mode5 };

struct IlmClassification {
    IlmMode mode = IlmMode::Mode1;
    std::string condition;  // the governing inequality set, for diagnostics
};

/// Exactly one mode per point; boundary ties resolve to the lower-numbered
/// mode (the closed forms agree on the boundaries).
IlmClassification classify_mode(const ModulationPoint& m);

struct IlmPower {
    IlmMode mode = IlmMode::Mode1;
    double p_pu = 0.0;     // per-unit, base Vin^2 / (2*pi*fsw*L)
    double p_watts = 0.0;
};

struct IlmOptions {
    /// Gain factor applied to the per-unit formulas. The default uses
    /// m_gain = Vout'/Vin, which reproduces the standard SPS power law.
    /// The inverted definition (Vin/Vout') is kept behind this flag.
    bool inverted_gain = false;
};

IlmPower ilm_power(const OperatingPoint& op, const ModulationPoint& m,
                   double inductance, double fsw, const IlmOptions& opts = {});

/// Reverse computation: L such that the active-mode closed form reproduces
/// p_measured. Throws std::domain_error when P_pu = 0 at this point.
double ilm_estimate_inductance(const OperatingPoint& op, const ModulationPoint& m,
                               double p_measured, double fsw,
                               const IlmOptions& opts = {});

}  // namespace dab
