#include "dab/loop_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dab {

std::vector<std::uint8_t> spi_encode(const std::vector<SpiField>& fields) {
    std::vector<std::uint8_t> out;
    out.reserve(fields.size() * 2);
    for (const SpiField& f : fields) {
        const double scaled = std::floor(f.value * 100.0 + 0.5);  // round half up
        if (!(scaled >= 0.0 && scaled <= 65535.0)) {
            std::ostringstream os;
            os << "field " << f.name << " = " << f.value
               << " does not fit the scaled 16-bit range";
            throw std::range_error(os.str());
        }
        const std::uint16_t code = static_cast<std::uint16_t>(scaled);
        out.push_back(static_cast<std::uint8_t>(code >> 8));
        out.push_back(static_cast<std::uint8_t>(code & 0xff));
    }
    return out;
}

std::vector<double> spi_decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() % 2 != 0)
        throw std::invalid_argument("frame length must be an even byte count");
    std::vector<double> out;
    out.reserve(bytes.size() / 2);
    for (std::size_t i = 0; i < bytes.size(); i += 2) {
        const std::uint16_t code =
            static_cast<std::uint16_t>((bytes[i] << 8) | bytes[i + 1]);
        out.push_back(code / 100.0);
    }
    return out;
}

std::string spi_hex(const std::vector<std::uint8_t>& bytes) {
    std::string s;
    char buf[4];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%02X", bytes[i]);
        if (i) s += ' ';
        s += buf;
    }
    return s;
}

void controller_step(ControllerState& st, double sensed_vout, double vout_target,
                     double sensed_ps, const PolySurface& sp, const PolySurface& ss,
                     double believed_lt, double believed_rt, const PiGains& gains) {
    const double err = vout_target - sensed_vout;
    const double dphi =
        gains.kp * (err - st.prev_error) + gains.ki * gains.control_period * err;
    st.phi = std::clamp(st.phi + dphi, 0.0, M_PI / 2.0);
    st.prev_error = err;
    st.delta_p = eval_poly4(sp, sensed_ps, sensed_vout, believed_lt, believed_rt);
    st.delta_s = eval_poly4(ss, sensed_ps, sensed_vout, believed_lt, believed_rt);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    f >> j;
    Scenario sc;
    sc.duration = j.value("duration", sc.duration);
    sc.gains.kp = j.value("kp", sc.gains.kp);
    sc.gains.ki = j.value("ki", sc.gains.ki);
    sc.gains.control_period = j.value("control_period", sc.gains.control_period);
    sc.estimation_period = j.value("estimation_period", sc.estimation_period);
    sc.frame_latency = j.value("frame_latency", sc.frame_latency);
    sc.vout_target = j.value("vout_target", sc.vout_target);
    sc.load_power = j.value("load_power", sc.load_power);
    sc.c_out = j.value("c_out", sc.c_out);
    sc.estimator = j.value("estimator", sc.estimator);
    sc.model_path = j.value("model_path", sc.model_path);
    for (const auto& e : j.value("events", nlohmann::json::array())) {
        ScenarioEvent ev;
        ev.t = e.at("t");
        ev.type = e.at("type");
        ev.value = e.at("value");
        sc.events.push_back(ev);
    }
    std::sort(sc.events.begin(), sc.events.end(),
              [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t < b.t; });
    return sc;
}

LoopResult run_scenario(const CircuitParams& nominal, const PolySurface& sp,
                        const PolySurface& ss, const Scenario& sc,
                        const EstimatorFn& model_estimator) {
    if (sc.estimator == "model" && !model_estimator)
        throw std::invalid_argument("scenario selects the model estimator but none given");

    LoopResult out;
    CircuitParams plant = nominal;
    LumpedParams truth = lumped_params(plant);
    LumpedParams believed = truth;

    const double n = plant.turns_ratio;
    double vout_target = sc.vout_target;      // physical
    double load_power = sc.load_power;
    double r_load = vout_target * vout_target / load_power;
    double vout = vout_target;                // start regulated

    ControllerState ctl;
    ctl.delta_p = eval_poly4(sp, load_power, vout_target * n, believed.lt, believed.rt);
    ctl.delta_s = eval_poly4(ss, load_power, vout_target * n, believed.lt, believed.rt);
    {
        const auto phi = solve_phi_for_power(
            plant, {plant.vin_nominal, vout_target * n, load_power}, ctl.delta_p,
            ctl.delta_s);
        ctl.phi = phi.value_or(0.5);
    }

    const double ts = sc.gains.control_period;
    const long long steps = std::llround(sc.duration / ts);
    std::size_t next_event = 0;
    double next_estimation = sc.estimation_period;
    double pending_update_t = -1.0;
    LumpedParams pending_update;
    char msg[256];

    for (long long step = 0; step <= steps; ++step) {
        const double t = step * ts;

        while (next_event < sc.events.size() && sc.events[next_event].t <= t) {
            const ScenarioEvent& ev = sc.events[next_event++];
            if (ev.type == "lt_scale") {
                const LumpedParams cur = lumped_params(plant);
                plant = scale_to_lumped(plant, cur.lt * ev.value, cur.rt);
            } else if (ev.type == "rt_scale") {
                const LumpedParams cur = lumped_params(plant);
                plant = scale_to_lumped(plant, cur.lt, cur.rt * ev.value);
            } else if (ev.type == "load_power") {
                load_power = ev.value;
                r_load = vout_target * vout_target / load_power;
            } else if (ev.type == "vout_target") {
                vout_target = ev.value;
                r_load = vout_target * vout_target / load_power;
            } else {
                throw std::runtime_error("unknown scenario event type: " + ev.type);
            }
            truth = lumped_params(plant);
            std::snprintf(msg, sizeof msg, "t=%.6f event %s value=%g", ev.t,
                          ev.type.c_str(), ev.value);
            out.event_log.push_back(msg);
        }

        if (pending_update_t >= 0.0 && t >= pending_update_t) {
            believed = pending_update;
            pending_update_t = -1.0;
            std::snprintf(msg, sizeof msg,
                          "t=%.6f believed parameters updated Lt=%.4g Rt=%.4g", t,
                          believed.lt, believed.rt);
            out.event_log.push_back(msg);
        }

        const OperatingPoint op{plant.vin_nominal, vout * n, 0.0};
        const ModulationPoint m{ctl.delta_p, ctl.delta_s, ctl.phi};
        const PointEval e = evaluate_modulation(plant, op, m);

        LoopSample row;
        row.t = t;
        row.vout = vout;
        row.ps_out = e.balance.ps_out;
        row.efficiency = e.balance.efficiency;
        row.ip_rms = e.sol.ip_rms;
        row.p_total = e.losses.p_total;
        for (ZvsClass z : e.losses.zvs)
            if (z == ZvsClass::Full) ++row.full_zvs_legs;
        row.phi = ctl.phi;
        row.delta_p = ctl.delta_p;
        row.delta_s = ctl.delta_s;
        row.believed_lt = believed.lt;
        row.believed_rt = believed.rt;
        row.true_lt = truth.lt;
        row.true_rt = truth.rt;
        out.series.push_back(row);

        if (t >= next_estimation) {
            next_estimation += sc.estimation_period;
            Sample sensed;
            sensed.vin = op.vin;
            sensed.vout = vout;
            sensed.iin = e.balance.pp_in / op.vin;
            sensed.iout = e.balance.ps_out / vout;
            sensed.ploss = e.balance.pp_in - e.balance.ps_out;
            sensed.delta_p = ctl.delta_p;
            sensed.delta_s = ctl.delta_s;
            sensed.phi = ctl.phi;

            const std::vector<SpiField> tx{
                {"Vin", sensed.vin},     {"Vout", sensed.vout},
                {"Iin", sensed.iin},     {"Iout", sensed.iout},
                {"Ploss", sensed.ploss}, {"delta_p", sensed.delta_p},
                {"delta_s", sensed.delta_s}, {"phi", sensed.phi}};
            const auto tx_bytes = spi_encode(tx);
            std::snprintf(msg, sizeof msg, "t=%.6f tx  %s", t,
                          spi_hex(tx_bytes).c_str());
            out.frame_log.push_back(msg);

            // The estimator only sees the quantized link values.
            const auto rx = spi_decode(tx_bytes);
            Sample quantized = sensed;
            quantized.vin = rx[0];
            quantized.vout = rx[1];
            quantized.iin = rx[2];
            quantized.iout = rx[3];
            quantized.ploss = rx[4];
            quantized.delta_p = rx[5];
            quantized.delta_s = rx[6];
            quantized.phi = rx[7];

            LumpedParams est;
            if (sc.estimator == "oracle")
                est = truth;
            else
                est = model_estimator(quantized);

            const std::vector<SpiField> resp{{"Lt_uH", est.lt * 1e6},
                                             {"Rt_mOhm", est.rt * 1e3}};
            const auto resp_bytes = spi_encode(resp);
            std::snprintf(msg, sizeof msg, "t=%.6f rx  %s", t,
                          spi_hex(resp_bytes).c_str());
            out.frame_log.push_back(msg);
            const auto resp_vals = spi_decode(resp_bytes);
            pending_update = {resp_vals[0] * 1e-6, resp_vals[1] * 1e-3};
            pending_update_t = t + sc.frame_latency;
        }

        // Quasi-static output stage: energy balance on the output capacitor
        // against the resistive load (primary-referred frame).
        const double p_load = vout * vout / r_load;
        const double vref = vout * n;
        const double dv = ts * (e.balance.ps_out - p_load) / (sc.c_out * vref);
        vout = std::max((vref + dv) / n, 1.0);

        controller_step(ctl, vout, vout_target, e.balance.ps_out, sp, ss,
                        believed.lt, believed.rt, sc.gains);
    }
    return out;
}

void write_loop_csv(const std::string& path, const LoopResult& r) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "t,Vout,Ps_out,efficiency,Ip_rms,P_total,full_zvs_legs,phi,delta_p,"
         "delta_s,believed_Lt,believed_Rt,true_Lt,true_Rt\n";
    char buf[512];
    for (const LoopSample& s : r.series) {
        std::snprintf(buf, sizeof buf,
                      "%.6f,%.6f,%.4f,%.6f,%.4f,%.4f,%d,%.6f,%.6f,%.6f,%.6e,%.6e,"
                      "%.6e,%.6e\n",
                      s.t, s.vout, s.ps_out, s.efficiency, s.ip_rms, s.p_total,
                      s.full_zvs_legs, s.phi, s.delta_p, s.delta_s, s.believed_lt,
                      s.believed_rt, s.true_lt, s.true_rt);
        f << buf;
    }
}

}  // namespace dab
