#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dab/losses.hpp"
#include "dab/nifdm.hpp"

namespace dab {

/// Loss-optimal TPS synthesis: the power constraint is handled by eliminating
/// phi (bracketed root-finding per duty pair), leaving a bounded 2-D descent
/// over (delta_p, delta_s) repeated from several low-discrepancy starts.

enum class CostSelector { TotalLoss, Conduction, Switching };

struct PointEval {
    SteadyStateSolution sol;
    LossBreakdown losses;
    PowerBalance balance;
};

/// Solve + loss accounting at one modulation point.
PointEval evaluate_modulation(const CircuitParams& params, const OperatingPoint& op,
                              const ModulationPoint& m, const SolveSettings& ss = {});

/// Root-finds phi in [0, pi/2] so that the delivered output power hits
/// op.ps_out_target; nullopt when the target is unreachable at this duty pair.
std::optional<double> solve_phi_for_power(const CircuitParams& params,
                                          const OperatingPoint& op, double delta_p,
                                          double delta_s, const SolveSettings& ss = {},
                                          double power_tol_w = 1.0);

struct OptimizerSettings {
    CostSelector cost = CostSelector::TotalLoss;
    int n_starts = 8;
    std::uint64_t seed = 1;
    double power_eps_w = 10.0;   // 0.5% of the 2 kW rating
    SolveSettings solve;         // inner model fidelity
    int max_iters = 60;
    double grad_step = 1e-4;     // rad, central differences
    double cost_tol = 1e-4;      // W, descent stop threshold
};

struct StartTrace {
    double start_dp = 0.0, start_ds = 0.0;
    ModulationPoint result;
    double cost = 0.0;
    bool feasible = false;
};

struct OptResult {
    ModulationPoint x;
    double ps_out = 0.0;
    double p_total = 0.0;
    double efficiency = 0.0;
    double cost = 0.0;           // selected-cost value at x
    std::vector<StartTrace> trace;
    bool ok = false;
    std::string status;
};

/// Throws std::runtime_error when the power target exceeds the converter's
/// envelope (checked at full phase shift with zero duties).
OptResult optimize_tps(const CircuitParams& params, const OperatingPoint& op,
                       const OptimizerSettings& settings = {});

/// Cartesian grid over the six swept quantities. Values are explicit lists
/// so irregular grids stay representable.
struct GridSpec {
    std::vector<double> lp;        // H
    std::vector<double> ls_prime;  // H, secondary-side value
    std::vector<double> rl_p;      // ohm, primary lumped series R
    std::vector<double> rl_s;      // ohm, secondary lumped series R (secondary-side)
    std::vector<double> vout;      // V, primary-referred
    std::vector<double> ps;        // W

    static std::vector<double> linspace(double lo, double hi, int n);
    std::size_t cells() const;
};

struct SweepRow {
    double lp = 0.0, ls_prime = 0.0, rl_p = 0.0, rl_s = 0.0;
    double vout = 0.0, ps = 0.0;
    double delta_p = 0.0, delta_s = 0.0, phi = 0.0;
    double p_total = 0.0, efficiency = 0.0;
    double lt = 0.0, rt = 0.0;
    bool feasible = false;
};

/// One row per grid cell in fixed lexicographic grid order; cells run in
/// parallel when `parallel` is set, with output order independent of the
/// schedule. Serial path kept as the reference for testing.
std::vector<SweepRow> sweep_optimal_dataset(const CircuitParams& base,
                                            const GridSpec& grid,
                                            const OptimizerSettings& settings,
                                            bool parallel = true);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

struct ZvsCell {
    double vout = 0.0, ps = 0.0;
    int full_zvs_legs = 0;   // -1 when the cell is infeasible
    std::array<ZvsClass, 4> legs{};
    ModulationPoint x;
};

std::vector<ZvsCell> zvs_map(const CircuitParams& params,
                             const std::vector<double>& vout_axis,
                             const std::vector<double>& ps_axis,
                             const OptimizerSettings& settings, bool parallel = true);

struct GainCell {
    double vout = 0.0, ps = 0.0;
    double eta_adapted = 0.0, eta_stale = 0.0;
    double delta_eta = 0.0;
    bool feasible = false;
};

/// Efficiency gained by re-optimizing the duty pair for the actual lumped
/// parameters instead of keeping the nominal-parameter duties; both cases
/// are evaluated on the actual plant with phi re-solved for the power target.
std::vector<GainCell> adaptive_gain_map(const CircuitParams& nominal,
                                        double lt_actual, double rt_actual,
                                        const std::vector<double>& vout_axis,
                                        const std::vector<double>& ps_axis,
                                        const OptimizerSettings& settings,
                                        bool parallel = true);

/// Rescales all series inductances / lumped resistances of `nominal`
/// uniformly so the lumped values match (lt, rt).
CircuitParams scale_to_lumped(const CircuitParams& nominal, double lt, double rt);

}  // namespace dab
