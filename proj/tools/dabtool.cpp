#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "dab/config.hpp"
#include "dab/ilm.hpp"
#include "dab/loop_sim.hpp"
#include "dab/oracle.hpp"
#include "dab/pinn.hpp"
#include "dab/polyfit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 1;
    int k_max = 21;
};

dab::CircuitParams load_params(const Common& c) {
    if (c.config.empty()) {
        dab::CircuitParams p = dab::nominal_params();
        p.k_max = c.k_max;
        return p;
    }
    dab::CircuitParams p = dab::load_config(c.config);
    p.k_max = c.k_max;
    return p;
}

void write_manifest(const Common& c, const std::string& subcommand,
                    const std::vector<std::string>& artifacts,
                    const json& extra = json::object()) {
    json m;
    m["subcommand"] = subcommand;
    m["seed"] = c.seed;
    m["config"] = c.config.empty() ? "<builtin-nominal>" : c.config;
    m["config_hash"] = c.config.empty() ? "-" : dab::file_hash(c.config);
    m["artifacts"] = artifacts;
    for (auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream f(fs::path(c.out) / ("manifest-" + subcommand + ".json"));
    f << m.dump(2) << "\n";
}

dab::GridSpec load_grid(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    json j;
    f >> j;
    auto axis = [&](const char* name, std::vector<double> dflt) {
        if (!j.contains(name)) return dflt;
        const json& a = j.at(name);
        if (a.is_array()) return a.get<std::vector<double>>();
        return dab::GridSpec::linspace(a.at("lo"), a.at("hi"), a.at("n"));
    };
    dab::GridSpec g;
    g.lp = axis("Lp", {5.35e-6});
    g.ls_prime = axis("Ls_prime", {2.65e-6});
    g.rl_p = axis("Rl_p", {0.04});
    g.rl_s = axis("Rl_s", {0.01});
    g.vout = axis("Vout", {140.0});
    g.ps = axis("Ps", {1000.0});
    return g;
}

std::vector<double> load_axis_or(const std::string& grid_path, const char* name,
                                 std::vector<double> dflt) {
    if (grid_path.empty()) return dflt;
    std::ifstream f(grid_path);
    if (!f) throw std::runtime_error("cannot open " + grid_path);
    json j;
    f >> j;
    if (!j.contains(name)) return dflt;
    const json& a = j.at(name);
    if (a.is_array()) return a.get<std::vector<double>>();
    return dab::GridSpec::linspace(a.at("lo"), a.at("hi"), a.at("n"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parasitic-inclusive DAB modeling, modulation synthesis, "
                 "parameter estimation, and closed-loop simulation"};
    app.require_subcommand(1);

    Common c;
    app.add_option("--config", c.config, "circuit config (JSON)");
    app.add_option("--seed", c.seed, "RNG seed");
    app.add_option("--out", c.out, "output directory");
    app.add_option("--k-max", c.k_max, "highest odd harmonic");

    double dp = 0.285, ds = 0.1707, phi = 0.58;
    double vout = 140.0, ps = 1400.0;
    std::string grid, scenario, estimator = "oracle";
    std::string dataset_path, surface_dir, model_path, map_kind = "zvs";
    int starts = 8, epochs = 230, n_samples = 5000;
    double lambda = 0.8, lt_scale = 0.7, rt_scale = 1.0;

    auto* solve = app.add_subcommand("solve", "solve one steady-state point");
    solve->add_option("--dp", dp, "delta_p, rad");
    solve->add_option("--ds", ds, "delta_s, rad");
    solve->add_option("--phi", phi, "phi, rad");
    solve->add_option("--vout", vout, "V'out, primary-referred volts");

    auto* sweep = app.add_subcommand("sweep", "optimal-duty dataset over a grid");
    sweep->add_option("--grid", grid, "grid spec (JSON)")->required();
    sweep->add_option("--starts", starts, "multi-start count");

    auto* fit = app.add_subcommand("fit", "fit duty surfaces from a sweep CSV");
    fit->add_option("--sweep-csv", dataset_path, "sweep CSV")->required();

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    gen->add_option("--n", n_samples, "sample count");

    auto* train_cmd = app.add_subcommand("train", "train the lumped estimator");
    train_cmd->add_option("--dataset", dataset_path, "dataset CSV")->required();
    train_cmd->add_option("--lambda", lambda, "physics-loss weight");
    train_cmd->add_option("--epochs", epochs, "training epochs");

    auto* est = app.add_subcommand("estimate", "estimate Lt/Rt for one sample");
    est->add_option("--model", model_path, "trained model file")->required();
    est->add_option("--dp", dp)->required();
    est->add_option("--ds", ds)->required();
    est->add_option("--phi", phi)->required();
    est->add_option("--vout", vout, "physical output volts")->required();
    double e_vin = 160.0, e_iin = 0.0, e_iout = 0.0;
    est->add_option("--vin", e_vin);
    est->add_option("--iin", e_iin)->required();
    est->add_option("--iout", e_iout)->required();

    auto* sim = app.add_subcommand("simulate", "closed-loop scenario");
    sim->add_option("--scenario", scenario, "scenario spec (JSON)")->required();
    sim->add_option("--surfaces", surface_dir, "directory with duty surfaces")->required();
    sim->add_option("--estimator", estimator, "oracle|model");
    sim->add_option("--model", model_path, "model file for --estimator model");

    auto* map_cmd = app.add_subcommand("map", "zvs|gain|efficiency grid maps");
    map_cmd->add_option("kind", map_kind, "zvs|gain|efficiency")->required();
    map_cmd->add_option("--grid", grid, "axes spec (JSON, Vout/Ps)");
    map_cmd->add_option("--starts", starts, "multi-start count");
    map_cmd->add_option("--lt-scale", lt_scale, "actual/nominal Lt for gain maps");
    map_cmd->add_option("--rt-scale", rt_scale, "actual/nominal Rt for gain maps");

    auto* orc = app.add_subcommand("oracle", "time-domain reference solve");
    orc->add_option("--dp", dp);
    orc->add_option("--ds", ds);
    orc->add_option("--phi", phi);
    orc->add_option("--vout", vout, "V'out, primary-referred volts");

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(c.out);
        const dab::CircuitParams params = load_params(c);
        const dab::OperatingPoint op{params.vin_nominal, vout, ps};

        if (*solve) {
            const dab::PointEval e =
                dab::evaluate_modulation(params, op, {dp, ds, phi},
                                         {c.k_max, 3, 1e-3, 64});
            std::printf("Pp_ac   %10.3f W\nPs_ac   %10.3f W\n", e.sol.pp_ac,
                        e.sol.ps_ac);
            std::printf("Pp_in   %10.3f W\nPs_out  %10.3f W\neta     %10.4f\n",
                        e.balance.pp_in, e.balance.ps_out, e.balance.efficiency);
            std::printf("Ip_rms  %10.4f A\nIs_rms  %10.4f A\n", e.sol.ip_rms,
                        e.sol.is_rms);
            std::printf("P_cond  %10.3f W\nP_sw_vi %10.3f W\nP_coss  %10.3f W\n"
                        "P_core  %10.3f W\nP_total %10.3f W\n",
                        e.losses.p_cond, e.losses.p_sw_vi, e.losses.p_sw_coss,
                        e.losses.p_core, e.losses.p_total);
            for (int i = 0; i < 4; ++i)
                std::printf("leg %-3s dV %8.3f V  %s\n", dab::leg_name(dab::kAllLegs[i]),
                            e.sol.leg_delta_v[i], dab::zvs_name(e.losses.zvs[i]));
            const auto w = dab::sample_waveforms(e.sol, 512, params.fsw);
            std::ofstream wf(fs::path(c.out) / "waveforms.csv");
            wf << "t,vp,vs,ip,is\n";
            for (std::size_t i = 0; i < w.t.size(); ++i)
                wf << w.t[i] << ',' << w.vp[i] << ',' << w.vs[i] << ',' << w.ip[i]
                   << ',' << w.is[i] << "\n";
            write_manifest(c, "solve", {"waveforms.csv"});
        } else if (*sweep) {
            dab::OptimizerSettings s;
            s.seed = c.seed;
            s.n_starts = starts;
            const auto rows = dab::sweep_optimal_dataset(params, load_grid(grid), s);
            const std::string csv = (fs::path(c.out) / "sweep.csv").string();
            dab::write_sweep_csv(csv, rows);
            write_manifest(c, "sweep", {"sweep.csv"},
                           {{"rows", rows.size()}, {"grid", grid}});
            std::printf("wrote %zu rows to %s\n", rows.size(), csv.c_str());
        } else if (*fit) {
            const auto rows = dab::read_sweep_csv(dataset_path);
            const auto sp = dab::fit_poly4(rows, "delta_p");
            const auto ss = dab::fit_poly4(rows, "delta_s");
            const std::string fp = (fs::path(c.out) / "surface_delta_p.json").string();
            const std::string fsd = (fs::path(c.out) / "surface_delta_s.json").string();
            dab::save_surface(fp, sp);
            dab::save_surface(fsd, ss);
            std::printf("delta_p: %d terms, error variance %.3f%%, max |err| %.4f rad\n",
                        (int)sp.terms.size(), 100.0 * sp.error_variance,
                        sp.max_abs_error);
            std::printf("delta_s: %d terms, error variance %.3f%%, max |err| %.4f rad\n",
                        (int)ss.terms.size(), 100.0 * ss.error_variance,
                        ss.max_abs_error);
            write_manifest(c, "fit", {fp, fsd}, {{"input", dataset_path}});
        } else if (*gen) {
            const auto ds_set =
                dab::generate_synthetic_dataset(params, n_samples, {}, c.seed);
            const std::string csv = (fs::path(c.out) / "dataset.csv").string();
            dab::write_dataset_csv(csv, ds_set);
            write_manifest(c, "gen-data", {"dataset.csv"}, {{"n", n_samples}});
            std::printf("wrote %d samples to %s\n", n_samples, csv.c_str());
        } else if (*train_cmd) {
            dab::Dataset ds_set = dab::read_dataset_csv(dataset_path);
            dab::prepare_dataset(ds_set, c.seed);
            dab::TrainConfig cfg;
            cfg.seed = c.seed;
            cfg.lambda = lambda;
            cfg.epochs = epochs;
            const dab::TrainResult r = dab::train(ds_set, params, cfg);
            const std::string mp = (fs::path(c.out) / "model.json").string();
            dab::save_model(mp, r.model, ds_set);
            const dab::EvalResult ev = dab::evaluate(r.model, ds_set);
            std::printf("best epoch %d, val MSE %.5f; test MAE Lt %.2f%% Rt %.2f%%\n",
                        r.history.best_epoch,
                        r.history.val_loss[r.history.best_epoch], ev.mae_lt_pct,
                        ev.mae_rt_pct);
            std::ofstream hf(fs::path(c.out) / "history.csv");
            hf << "epoch,train_loss,val_loss,data_loss,physics_loss\n";
            for (std::size_t i = 0; i < r.history.train_loss.size(); ++i)
                hf << i << ',' << r.history.train_loss[i] << ','
                   << r.history.val_loss[i] << ',' << r.history.data_loss[i] << ','
                   << r.history.physics_loss[i] << "\n";
            write_manifest(c, "train", {"model.json", "history.csv"},
                           {{"lambda", lambda}, {"epochs", epochs}});
        } else if (*est) {
            dab::Dataset norms;
            const dab::MlpModel m = dab::load_model(model_path, &norms);
            dab::Sample s;
            s.vin = e_vin;
            s.vout = vout;
            s.iin = e_iin;
            s.iout = e_iout;
            s.ploss = e_vin * e_iin - vout * e_iout;
            s.delta_p = dp;
            s.delta_s = ds;
            s.phi = phi;
            const dab::LumpedParams lr = dab::estimate(m, norms, s);
            std::printf("Lt %.4f uH\nRt %.4f mOhm\n", lr.lt * 1e6, lr.rt * 1e3);
        } else if (*sim) {
            dab::Scenario sc = dab::load_scenario(scenario);
            if (sim->count("--estimator")) sc.estimator = estimator;
            const auto sp =
                dab::load_surface((fs::path(surface_dir) / "surface_delta_p.json").string());
            const auto ssf =
                dab::load_surface((fs::path(surface_dir) / "surface_delta_s.json").string());
            dab::EstimatorFn fn;
            if (sc.estimator == "model") {
                if (!model_path.empty()) sc.model_path = model_path;
                auto norms = std::make_shared<dab::Dataset>();
                auto model = std::make_shared<dab::MlpModel>(
                    dab::load_model(sc.model_path, norms.get()));
                fn = [norms, model](const dab::Sample& s) {
                    return dab::estimate(*model, *norms, s);
                };
            }
            const dab::LoopResult r = dab::run_scenario(params, sp, ssf, sc, fn);
            const std::string csv = (fs::path(c.out) / "loop.csv").string();
            dab::write_loop_csv(csv, r);
            std::ofstream lf(fs::path(c.out) / "frames.log");
            for (const auto& line : r.frame_log) lf << line << "\n";
            std::ofstream evf(fs::path(c.out) / "events.log");
            for (const auto& line : r.event_log) evf << line << "\n";
            write_manifest(c, "simulate", {"loop.csv", "frames.log", "events.log"},
                           {{"scenario", scenario}});
            std::printf("simulated %zu steps, %zu frames, %zu events -> %s\n",
                        r.series.size(), r.frame_log.size() / 2,
                        r.event_log.size(), csv.c_str());
        } else if (*map_cmd) {
            dab::OptimizerSettings s;
            s.seed = c.seed;
            s.n_starts = starts;
            const auto vax = load_axis_or(grid, "Vout",
                                          dab::GridSpec::linspace(120, 200, 5));
            const auto pax = load_axis_or(grid, "Ps",
                                          dab::GridSpec::linspace(200, 1800, 5));
            if (map_kind == "zvs") {
                const auto cells = dab::zvs_map(params, vax, pax, s);
                std::ofstream f(fs::path(c.out) / "zvs_map.csv");
                f << "Vout,Ps,full_zvs_legs,p1,p2,s1,s2,delta_p,delta_s,phi\n";
                for (const auto& cell : cells) {
                    f << cell.vout << ',' << cell.ps << ',' << cell.full_zvs_legs;
                    for (auto z : cell.legs) f << ',' << dab::zvs_name(z);
                    f << ',' << cell.x.delta_p << ',' << cell.x.delta_s << ','
                      << cell.x.phi << "\n";
                }
                write_manifest(c, "map", {"zvs_map.csv"}, {{"kind", map_kind}});
            } else if (map_kind == "gain") {
                const dab::LumpedParams nom = dab::lumped_params(params);
                const auto cells = dab::adaptive_gain_map(
                    params, nom.lt * lt_scale, nom.rt * rt_scale, vax, pax, s);
                std::ofstream f(fs::path(c.out) / "gain_map.csv");
                f << "Vout,Ps,eta_adapted,eta_stale,delta_eta,feasible\n";
                for (const auto& cell : cells)
                    f << cell.vout << ',' << cell.ps << ',' << cell.eta_adapted
                      << ',' << cell.eta_stale << ',' << cell.delta_eta << ','
                      << (cell.feasible ? 1 : 0) << "\n";
                write_manifest(c, "map", {"gain_map.csv"},
                               {{"kind", map_kind},
                                {"lt_scale", lt_scale},
                                {"rt_scale", rt_scale}});
            } else if (map_kind == "efficiency") {
                std::ofstream f(fs::path(c.out) / "efficiency_map.csv");
                f << "Vout,Ps,efficiency,delta_p,delta_s,phi\n";
                for (double v : vax)
                    for (double p : pax) {
                        try {
                            const auto r = dab::optimize_tps(
                                params, {params.vin_nominal, v, p}, s);
                            f << v << ',' << p << ',' << r.efficiency << ','
                              << r.x.delta_p << ',' << r.x.delta_s << ',' << r.x.phi
                              << "\n";
                        } catch (const std::exception&) {
                            f << v << ',' << p << ",,,,\n";
                        }
                    }
                write_manifest(c, "map", {"efficiency_map.csv"}, {{"kind", map_kind}});
            } else {
                throw std::runtime_error("unknown map kind: " + map_kind);
            }
        } else if (*orc) {
            const dab::OracleResult r = dab::solve_time_domain(params, op, {dp, ds, phi});
            std::printf("Pp_ac  %10.3f W\nPs_ac  %10.3f W\nIp_rms %10.4f A\n"
                        "Is_rms %10.4f A\nresidual %.3e\n",
                        r.pp_ac, r.ps_ac, r.ip_rms, r.is_rms, r.residual);
            std::ofstream wf(fs::path(c.out) / "oracle_waveforms.csv");
            wf << "t,vp,vs,ip,is,vm\n";
            for (std::size_t i = 0; i < r.t.size(); i += 8)
                wf << r.t[i] << ',' << r.vp[i] << ',' << r.vs[i] << ',' << r.ip[i]
                   << ',' << r.is[i] << ',' << r.vm[i] << "\n";
            write_manifest(c, "oracle", {"oracle_waveforms.csv"});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
