#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dab/pinn.hpp"
#include "dab/polyfit.hpp"

namespace dab {

/// Closed-loop simulation of the estimator-in-loop architecture: quasi-static
/// converter plant, PI regulation of the output voltage through phi,
/// polynomial feedforward duties, periodic parameter estimation, and the
/// fixed-point telemetry codec used on the estimator link.

/// Telemetry framing: each field is a physical value scaled by 100, rounded
/// half-up to an unsigned 16-bit integer, transmitted high byte first.
struct SpiField {
    std::string name;
    double value = 0.0;
};

std::vector<std::uint8_t> spi_encode(const std::vector<SpiField>& fields);
std::vector<double> spi_decode(const std::vector<std::uint8_t>& bytes);
std::string spi_hex(const std::vector<std::uint8_t>& bytes);

struct PiGains {
    double kp = 2e-3;          // rad/V
    double ki = 5.0;           // rad/(V*s)
    double control_period = 100e-6;  // s
};

struct ControllerState {
    double phi = 0.0;
    double prev_error = 0.0;   // V
    double delta_p = 0.0, delta_s = 0.0;
};

/// Velocity-form PI on phi (integrator naturally frozen at the clamp) plus
/// polynomial feedforward for the duty pair.
void controller_step(ControllerState& st, double sensed_vout, double vout_target,
                     double sensed_ps, const PolySurface& sp, const PolySurface& ss,
                     double believed_lt, double believed_rt, const PiGains& gains);

struct ScenarioEvent {
    double t = 0.0;
    std::string type;   // lt_scale | rt_scale | load_power | vout_target
    double value = 0.0;
};

struct Scenario {
    double duration = 1.0;             // s
    PiGains gains;
    double estimation_period = 0.25;   // s (paper cadence ~30 s, compressible)
    double frame_latency = 0.0;        // s between sensing and applying the result
    double vout_target = 100.0;        // V, physical secondary side
    double load_power = 1400.0;        // W at the target voltage (resistive load)
    double c_out = 1.5e-3;             // F, output capacitance (primary-referred)
    std::string estimator = "oracle";  // oracle | model
    std::string model_path;            // when estimator = model
    std::vector<ScenarioEvent> events;
};

Scenario load_scenario(const std::string& path);

struct LoopSample {
    double t = 0.0;
    double vout = 0.0;          // V physical
    double ps_out = 0.0;        // W
    double efficiency = 0.0;
    double ip_rms = 0.0;        // A
    double p_total = 0.0;       // W model loss
    int full_zvs_legs = 0;
    double phi = 0.0, delta_p = 0.0, delta_s = 0.0;
    double believed_lt = 0.0, believed_rt = 0.0;
    double true_lt = 0.0, true_rt = 0.0;
};

struct LoopResult {
    std::vector<LoopSample> series;
    std::vector<std::string> frame_log;  // hex dumps of exchanged frames
    std::vector<std::string> event_log;
};

using EstimatorFn = std::function<LumpedParams(const Sample&)>;

/// Runs the scenario on the given plant. The estimator receives only the
/// decoded telemetry values (codec round trip applied); `oracle_truth` is
/// used when the scenario selects the oracle estimator.
LoopResult run_scenario(const CircuitParams& nominal, const PolySurface& sp,
                        const PolySurface& ss, const Scenario& sc,
                        const EstimatorFn& model_estimator = {});

void write_loop_csv(const std::string& path, const LoopResult& r);

}  // namespace dab
