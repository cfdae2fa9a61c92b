#pragma once

#include <vector>

#include "dab/circuit_params.hpp"

namespace dab {

/// Time-domain reference solver. Integrates the full parasitic network as a
/// descriptor DAE (nodal voltages + branch currents) with trapezoidal steps
/// and finds the periodic steady state through the monodromy map, so the
/// frequency-domain solution can be checked against an independent method.
/// Winding resistances are taken at their fundamental-frequency values.

struct OracleSettings {
    int steps_per_period = 4096;
    int source_iterations = 3;  // deadtime source refinement passes (0 = ideal)
    int window_samples = 64;
};

struct OracleResult {
    std::vector<double> t;            // seconds, one period
    std::vector<double> vp, vs;       // bridge voltages (secondary referred)
    std::vector<double> ip, is;       // currents out of each bridge
    std::vector<double> vm;           // magnetizing-branch voltage

    double ip_rms = 0.0;
    double is_rms = 0.0;
    double pp_ac = 0.0;               // > 0 primary sourcing
    double ps_ac = 0.0;               // < 0 secondary absorbing
    double residual = 0.0;            // |x(T) - x(0)| closure of the final pass
};

OracleResult solve_time_domain(const CircuitParams& params, const OperatingPoint& op,
                               const ModulationPoint& m,
                               const OracleSettings& settings = {});

}  // namespace dab
