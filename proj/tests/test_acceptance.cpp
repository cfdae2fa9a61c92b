// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line; the binary exits nonzero when any criterion fails.
//
// Usage: test_acceptance [--cache DIR] [N ...]
//   N            run only the listed criteria (default: all)
//   --cache DIR  reuse/store the expensive artifacts (sweep, dataset) so
//                individual criteria can be iterated on quickly

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dab/config.hpp"
#include "dab/ilm.hpp"
#include "dab/loop_sim.hpp"
#include "dab/losses.hpp"
#include "dab/nifdm.hpp"
#include "dab/oracle.hpp"
#include "dab/optimizer.hpp"
#include "dab/pinn.hpp"
#include "dab/polyfit.hpp"

using namespace dab;
namespace fs = std::filesystem;

namespace {

struct Checker {
    bool ok = true;
    int shown = 0;
    void require(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (++shown <= 20) std::printf("    FAIL: %s\n", what.c_str());
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// Fidelity used inside the heavier search/training loops; the model checks
// themselves (criterion 1) run at full fidelity.
SolveSettings fast_solve() { return {11, 1, 1e-3, 24}; }

// ---------------------------------------------------------------------------
// Shared expensive artifacts, optionally cached on disk between runs.

struct Context {
    fs::path cache;
    CircuitParams params = nominal_params();

    std::vector<SweepRow> sweep;
    bool have_sweep = false;
    PolySurface sp4, ss4;
    bool have_fit = false;

    Dataset ds;
    bool have_ds = false;
};

GridSpec sweep_grid() {
    GridSpec g;
    g.lp = {2e-6, 2.9375e-6, 3.875e-6, 4.8125e-6, 5.75e-6};
    g.ls_prime = {2.65e-6};
    g.rl_p = {0.015, 0.03625, 0.0575, 0.07875, 0.10};
    g.rl_s = {0.01};
    g.vout = {130.0, 135.0, 140.0, 145.0, 150.0};
    // Conduction-dominated load range: below ~1.3 kW the loss landscape has
    // several near-degenerate minima (ZVS-boundary kinks) and the global
    // argmin is not a smooth function of the operating point. The largest-Lp /
    // lowest-Vout / highest-Ps corner is excluded too: there the optimum
    // collapses onto the delta_s = 0 boundary and the clipped surface is not
    // polynomial-representable.
    g.ps = {1400.0, 1500.0, 1600.0, 1700.0, 1800.0};
    return g;
}

OptimizerSettings sweep_settings() {
    OptimizerSettings s;
    s.n_starts = 4;
    s.max_iters = 40;
    // Tight power tolerance: the optimum valley is shallow, so slack in the
    // delivered power otherwise turns into jitter of the argmin duties.
    s.power_eps_w = 2.0;
    s.solve = fast_solve();
    s.seed = 9001;
    return s;
}

void ensure_sweep(Context& ctx) {
    if (ctx.have_sweep) return;
    const fs::path cached = ctx.cache / "sweep625.csv";
    if (!ctx.cache.empty() && fs::exists(cached)) {
        ctx.sweep = read_sweep_csv(cached.string());
    } else {
        std::printf("    [building %zu-cell sweep...]\n", sweep_grid().cells());
        ctx.sweep = sweep_optimal_dataset(ctx.params, sweep_grid(), sweep_settings());
        if (!ctx.cache.empty()) {
            fs::create_directories(ctx.cache);
            write_sweep_csv(cached.string(), ctx.sweep);
        }
    }
    ctx.have_sweep = true;
}

void ensure_fit(Context& ctx) {
    if (ctx.have_fit) return;
    ensure_sweep(ctx);
    ctx.sp4 = fit_poly4(ctx.sweep, "delta_p");
    ctx.ss4 = fit_poly4(ctx.sweep, "delta_s");
    ctx.have_fit = true;
}

void ensure_dataset(Context& ctx) {
    if (ctx.have_ds) return;
    const fs::path cached = ctx.cache / "dataset5000.csv";
    if (!ctx.cache.empty() && fs::exists(cached)) {
        ctx.ds = read_dataset_csv(cached.string());
    } else {
        std::printf("    [generating 5000-sample dataset...]\n");
        ctx.ds = generate_synthetic_dataset(ctx.params, 5000, GenRanges{}, 77);
        if (!ctx.cache.empty()) {
            fs::create_directories(ctx.cache);
            write_dataset_csv(cached.string(), ctx.ds);
        }
    }
    prepare_dataset(ctx.ds, 123);
    ctx.have_ds = true;
}

// ---------------------------------------------------------------------------
// 1. Frequency-domain model vs independent time-domain reference.

bool criterion1(Context& ctx) {
    Checker c;
    const double t0 = now_s();
    std::mt19937_64 rng(2026);
    auto u = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    SolveSettings ss;
    ss.k_max = 21;
    ss.correction_passes = 2;

    int accepted = 0, attempts = 0;
    double worst = 0.0;
    while (accepted < 50 && attempts < 2000) {
        ++attempts;
        CircuitParams p = ctx.params;
        p.lp = u(3e-6, 7e-6);
        p.ls_prime = u(1.5e-6, 3.5e-6);
        p.rp.fundamental = u(0.02, 0.06);
        p.rs.fundamental = u(0.005, 0.015);
        const OperatingPoint op{160.0, u(120.0, 160.0), 0.0};
        const ModulationPoint m{u(0.0, 1.2), u(0.0, 1.2), u(0.2, 1.5)};

        // Keep only points with substantial power transfer so the relative
        // comparison is meaningful.
        const LumpedParams lump = lumped_params(p);
        if (ilm_power(op, m, lump.lt, p.fsw).p_watts < 200.0) continue;

        const SteadyStateSolution f = solve_steady_state(p, op, m, ss);
        // Admissible = inside the model's validity envelope: the correction
        // passes settled, no commutation fell outside the constructed
        // waveform assumptions, and no two deadtime windows overlap (the
        // per-leg transition construction treats them independently).
        if (!f.converged || !f.warnings.empty()) continue;
        {
            // Adverse (current-reversed) commutations fall back to an
            // instantaneous-transition approximation in both solvers; the
            // agreement claim is scoped to the resonant regime.
            bool all_favorable = true;
            for (const CommutationEvent& e : f.events)
                all_favorable = all_favorable && e.favorable;
            if (!all_favorable) continue;
            std::vector<double> starts;
            for (const CommutationEvent& e : f.events) starts.push_back(e.theta0);
            std::sort(starts.begin(), starts.end());
            const double width = p.omega_s() * p.td;
            bool overlap = false;
            for (std::size_t j = 0; j < starts.size(); ++j) {
                const double next = j + 1 < starts.size() ? starts[j + 1]
                                                          : starts[0] + 2.0 * M_PI;
                if (next - starts[j] < width) overlap = true;
            }
            if (overlap) continue;
        }

        OracleSettings os;
        os.steps_per_period = 16384;  // the reference must out-resolve the model
        const OracleResult r = solve_time_domain(p, op, m, os);
        const double ep = std::abs(f.pp_ac - r.pp_ac) / std::abs(r.pp_ac);
        const double es = std::abs(f.ps_ac - r.ps_ac) / std::abs(r.ps_ac);
        worst = std::max({worst, ep, es});
        c.require(ep <= 0.01 && es <= 0.01,
                  fmt("point %d: pp err %.3e, ps err %.3e (dp=%.3f ds=%.3f phi=%.3f)",
                      accepted, ep, es, m.delta_p, m.delta_s, m.phi));
        ++accepted;
    }
    const double dt = now_s() - t0;
    c.require(accepted == 50, fmt("only %d admissible points found", accepted));
    c.require(dt < 60.0, fmt("runtime %.1f s exceeds 60 s", dt));
    std::printf("    50 points, worst relative power error %.3e, %.1f s\n", worst, dt);
    return c.ok;
}

// ---------------------------------------------------------------------------
// 2. Ideal-model closed forms vs exact piecewise-linear integration.

double three_level(double theta, double amplitude, double delta) {
    double th = std::fmod(theta, 2.0 * M_PI);
    if (th < 0.0) th += 2.0 * M_PI;
    if (th > delta && th < M_PI - delta) return amplitude;
    if (th > M_PI + delta && th < 2.0 * M_PI - delta) return -amplitude;
    return 0.0;
}

// The bridge voltages are three-level piecewise constant, so the inductor
// current is piecewise linear and every integral below is exact.
double piecewise_power(const OperatingPoint& op, const ModulationPoint& m,
                       double inductance, double fsw, Checker& c) {
    std::vector<double> edges{0.0, 2.0 * M_PI};
    auto push = [&edges](double th) {
        double v = std::fmod(th, 2.0 * M_PI);
        if (v < 0.0) v += 2.0 * M_PI;
        edges.push_back(v);
    };
    for (double base : {m.delta_p, M_PI - m.delta_p, M_PI + m.delta_p,
                        2.0 * M_PI - m.delta_p})
        push(base);
    for (double base : {m.delta_s, M_PI - m.delta_s, M_PI + m.delta_s,
                        2.0 * M_PI - m.delta_s})
        push(base + m.phi);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                edges.end());

    const std::size_t nseg = edges.size() - 1;
    const double didth = 1.0 / (2.0 * M_PI * fsw * inductance);

    std::vector<double> i(edges.size(), 0.0);
    for (std::size_t s = 0; s < nseg; ++s) {
        const double mid = 0.5 * (edges[s] + edges[s + 1]);
        const double vp = three_level(mid, op.vin, m.delta_p);
        const double vs = three_level(mid - m.phi, op.vout_prime, m.delta_s);
        i[s + 1] = i[s] + (vp - vs) * didth * (edges[s + 1] - edges[s]);
    }
    c.require(std::abs(i.back() - i.front()) < 1e-9 * (1.0 + std::abs(i.back())),
              "reference current does not close over the period");
    double mean = 0.0;
    for (std::size_t s = 0; s < nseg; ++s)
        mean += 0.5 * (i[s] + i[s + 1]) * (edges[s + 1] - edges[s]);
    mean /= 2.0 * M_PI;
    for (double& v : i) v -= mean;

    double p_in = 0.0, p_out = 0.0;
    for (std::size_t s = 0; s < nseg; ++s) {
        const double mid = 0.5 * (edges[s] + edges[s + 1]);
        const double vp = three_level(mid, op.vin, m.delta_p);
        const double vs = three_level(mid - m.phi, op.vout_prime, m.delta_s);
        const double iavg = 0.5 * (i[s] + i[s + 1]);
        p_in += vp * iavg * (edges[s + 1] - edges[s]);
        p_out += vs * iavg * (edges[s + 1] - edges[s]);
    }
    p_in /= 2.0 * M_PI;
    p_out /= 2.0 * M_PI;
    c.require(std::abs(p_in - p_out) <= 1e-9 * std::max(1.0, std::abs(p_in)),
              "lossless reference power mismatch");
    return p_in;
}

bool criterion2(Context&) {
    Checker c;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> angle(0.0, M_PI / 2.0);
    std::uniform_real_distribution<double> uvin(100.0, 200.0);
    std::uniform_real_distribution<double> uvo(80.0, 210.0);
    std::uniform_real_distribution<double> ul(2e-6, 20e-6);
    const double fsw = 100e3;

    std::map<IlmMode, int> seen;
    for (int trial = 0; trial < 1000; ++trial) {
        const ModulationPoint m{angle(rng), angle(rng), angle(rng)};
        const OperatingPoint op{uvin(rng), uvo(rng), 0.0};
        const double l = ul(rng);
        const IlmPower res = ilm_power(op, m, l, fsw);
        ++seen[res.mode];
        const double ref = piecewise_power(op, m, l, fsw, c);
        const double p_base = op.vin * op.vin / (2.0 * M_PI * fsw * l);
        const double scale = std::max(std::abs(ref), 1e-6 * p_base);
        c.require(std::abs(res.p_watts - ref) <= 1e-9 * scale,
                  fmt("trial %d: closed form %.12e vs integration %.12e", trial,
                      res.p_watts, ref));
    }
    c.require(seen.size() == 5, fmt("only %zu of 5 modes exercised", seen.size()));

    // Continuity across every reachable mode boundary.
    std::uniform_real_distribution<double> inner(0.05, M_PI / 2.0 - 0.05);
    const OperatingPoint op{160.0, 140.0, 0.0};
    const double l = 11e-6, eps = 1e-12;
    // Probes straddle the boundary by 2e-12 rad, so even a perfectly
    // continuous closed form differs by slope * 2e-12; measure against the
    // natural power base of the operating point.
    const double p_base = op.vin * op.vin / (2.0 * M_PI * fsw * l);
    auto check_pair = [&](const ModulationPoint& lo, const ModulationPoint& hi) {
        const IlmPower a = ilm_power(op, lo, l, fsw);
        const IlmPower b = ilm_power(op, hi, l, fsw);
        c.require(a.mode != b.mode, "boundary probe fell inside one mode");
        const double scale = std::max({std::abs(a.p_watts), std::abs(b.p_watts), p_base});
        c.require(std::abs(a.p_watts - b.p_watts) <= 1e-9 * scale,
                  fmt("discontinuity %.3e at boundary", a.p_watts - b.p_watts));
    };
    for (int trial = 0; trial < 200; ++trial) {
        const double dp = inner(rng), ds = inner(rng);
        const double u = dp + ds;
        if (u < M_PI / 2.0 - 1e-3)
            check_pair({dp, ds, u - eps}, {dp, ds, u + eps});
        else if (M_PI - u < M_PI / 2.0 - 1e-3 && M_PI - u > 1e-3)
            check_pair({dp, ds, M_PI - u - eps}, {dp, ds, M_PI - u + eps});
        const double d = std::abs(dp - ds);
        if (d > 1e-3) check_pair({dp, ds, d - eps}, {dp, ds, d + eps});
    }
    return c.ok;
}

// ---------------------------------------------------------------------------
// 3. Charge-loss limiting cases.

bool criterion3(Context& ctx) {
    Checker c;
    const OperatingPoint op{160.0, 140.0, 0.0};

    // Constant capacitance: each event dissipates exactly C*dV^2 (two
    // transitions per leg per period).
    CircuitParams pc = ctx.params;
    const double cconst = 1.2e-9;
    pc.coss_primary = CossCurve::constant(cconst, 400.0);
    for (double dv : {0.7, 3.9, 47.0, 112.3, 160.0}) {
        std::array<SwitchingInstant, 4> inst{};
        for (int i = 0; i < 4; ++i) inst[i].leg = kAllLegs[i];
        inst[0].v_on = dv;
        const CossLoss loss = coss_switching_loss(inst, pc, op);
        const double e_event = loss.per_leg[0] / (2.0 * pc.fsw);
        const double want = cconst * dv * dv;
        // The charge/energy bookkeeping cancels terms of full-link-swing
        // magnitude, so its rounding floor sits at the ulp of C*Vlink^2.
        const double tol = 1e-12 * cconst * op.vin * op.vin;
        c.require(std::abs(e_event - want) <= std::max(1e-12 * want, tol),
                  fmt("constant-C event energy %.17e vs C*dV^2 %.17e at dV=%g",
                      e_event, want, dv));
    }

    // Hard-switching limit on the tabulated nonlinear curves: the full
    // stored-charge energy Qoss(V)*V per device transition.
    const CircuitParams p = ctx.params;
    std::array<SwitchingInstant, 4> inst{};
    for (int i = 0; i < 4; ++i) inst[i].leg = kAllLegs[i];
    inst[0].v_on = op.vin;
    inst[2].v_on = op.vout_prime;  // full referred swing on a secondary leg
    const CossLoss loss = coss_switching_loss(inst, p, op);

    const double want_p = 2.0 * p.coss_primary.charge(op.vin) * op.vin * p.fsw;
    c.require(std::abs(loss.per_leg[0] - want_p) <= 1e-12 * want_p,
              fmt("primary hard-switching %.17e vs Q*V limit %.17e", loss.per_leg[0],
                  want_p));
    c.require(loss.classification[0] == ZvsClass::Hard, "primary leg not flagged hard");

    const double vs_phys = op.vout_prime / p.turns_ratio;
    const double want_s =
        2.0 * p.coss_secondary.charge(vs_phys) * vs_phys * p.fsw;
    c.require(std::abs(loss.per_leg[2] - want_s) <= 1e-12 * want_s,
              fmt("secondary hard-switching %.17e vs Q*V limit %.17e", loss.per_leg[2],
                  want_s));
    c.require(loss.classification[1] == ZvsClass::Full, "untouched leg not full soft");
    return c.ok;
}

// ---------------------------------------------------------------------------
// 4. Optimizer: power constraint, dominance over the single-phase-shift
//    baseline, and bytewise-deterministic sweeps.

bool criterion4(Context& ctx) {
    Checker c;
    OptimizerSettings s;
    s.n_starts = 4;
    s.max_iters = 40;
    s.solve = fast_solve();
    s.seed = 31;

    for (double vout : {120.0, 140.0, 160.0})
        for (double ps : {500.0, 1100.0, 1700.0}) {
            const OperatingPoint op{160.0, vout, ps};
            const OptResult r = optimize_tps(ctx.params, op, s);
            c.require(r.ok, fmt("optimizer not ok at Vout=%g Ps=%g: %s", vout, ps,
                                r.status.c_str()));
            c.require(std::abs(r.ps_out - ps) <= 0.005 * ctx.params.rated_power,
                      fmt("power miss %.3f W at Vout=%g Ps=%g", r.ps_out - ps, vout,
                          ps));

            // Baseline: square-wave bridges, phase shift alone carrying the
            // power target.
            const auto phi =
                solve_phi_for_power(ctx.params, op, 0.0, 0.0, s.solve, 2.0);
            c.require(phi.has_value(), fmt("baseline infeasible at Vout=%g Ps=%g",
                                           vout, ps));
            if (phi) {
                const PointEval sps =
                    evaluate_modulation(ctx.params, op, {0.0, 0.0, *phi}, s.solve);
                c.require(r.cost <= sps.losses.p_total + 1e-9,
                          fmt("cost %.4f above baseline %.4f at Vout=%g Ps=%g",
                              r.cost, sps.losses.p_total, vout, ps));
            }
        }

    // Seeded determinism: two identical sweep runs must serialize to the
    // same bytes.
    GridSpec g;
    g.lp = {4e-6, 6e-6};
    g.ls_prime = {2.65e-6};
    g.rl_p = {0.03, 0.06};
    g.rl_s = {0.01};
    g.vout = {140.0};
    g.ps = {600.0, 1400.0};
    OptimizerSettings gs = sweep_settings();
    gs.max_iters = 15;
    const fs::path dir = fs::temp_directory_path() / "dab_acceptance";
    fs::create_directories(dir);
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    };
    write_sweep_csv((dir / "a.csv").string(),
                    sweep_optimal_dataset(ctx.params, g, gs));
    write_sweep_csv((dir / "b.csv").string(),
                    sweep_optimal_dataset(ctx.params, g, gs));
    c.require(slurp(dir / "a.csv") == slurp(dir / "b.csv"),
              "repeated sweep runs differ bytewise");
    fs::remove_all(dir);
    return c.ok;
}

// ---------------------------------------------------------------------------
// 5. Duty-surface fitting: exact recovery, residual variance on a real
//    sweep, and the degree-4 vs degree-2 efficiency ordering.

bool criterion5(Context& ctx) {
    Checker c;

    // Exact recovery of a synthetic degree-4 surface.
    {
        const auto basis = poly4_basis(4);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uc(-0.02, 0.02);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::array<std::vector<double>, 2> coeff;
        for (auto& cv : coeff) {
            cv.resize(basis.size());
            for (double& v : cv) v = uc(rng);
            cv[0] = 0.4;  // keep values inside [0, pi/2]
        }
        const std::array<double, 4> lo{400.0, 120.0, 7e-6, 0.04};
        const std::array<double, 4> hi{1800.0, 160.0, 13e-6, 0.12};
        auto synth = [&](int which, const std::array<double, 4>& v) {
            double acc = 0.0;
            for (std::size_t t = 0; t < basis.size(); ++t) {
                double term = coeff[which][t];
                for (int i = 0; i < 4; ++i) {
                    const double u = (v[i] - lo[i]) / (hi[i] - lo[i]);
                    for (int e = 0; e < basis[t][i]; ++e) term *= u;
                }
                acc += term;
            }
            return acc;
        };
        std::vector<SweepRow> rows(300);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            std::array<double, 4> v;
            for (int i = 0; i < 4; ++i)
                v[i] = j == 0   ? lo[i]
                       : j == 1 ? hi[i]
                                : lo[i] + u01(rng) * (hi[i] - lo[i]);
            rows[j].ps = v[0];
            rows[j].vout = v[1];
            rows[j].lt = v[2];
            rows[j].rt = v[3];
            rows[j].delta_p = synth(0, v);
            rows[j].delta_s = synth(1, v);
            rows[j].feasible = true;
        }
        const PolySurface sp = fit_poly4(rows, "delta_p");
        const PolySurface ss = fit_poly4(rows, "delta_s");
        double worst = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            std::array<double, 4> v;
            for (int i = 0; i < 4; ++i) v[i] = lo[i] + u01(rng) * (hi[i] - lo[i]);
            worst = std::max(
                {worst,
                 std::abs(eval_poly4(sp, v[0], v[1], v[2], v[3]) - synth(0, v)),
                 std::abs(eval_poly4(ss, v[0], v[1], v[2], v[3]) - synth(1, v))});
        }
        c.require(worst <= 1e-8, fmt("synthetic recovery error %.3e", worst));
    }

    // Real sweep: residual variance of the degree-4 surfaces and the
    // efficiency cost of the fitted duties against a degree-2 fit.
    ensure_fit(ctx);
    int feasible = 0;
    for (const SweepRow& r : ctx.sweep) feasible += r.feasible;
    c.require(feasible >= 500, fmt("only %d feasible sweep rows", feasible));
    c.require(ctx.sp4.error_variance <= 0.05,
              fmt("delta_p error variance %.4f", ctx.sp4.error_variance));
    c.require(ctx.ss4.error_variance <= 0.05,
              fmt("delta_s error variance %.4f", ctx.ss4.error_variance));

    const PolySurface sp2 = fit_poly4(ctx.sweep, "delta_p", 2);
    const PolySurface ss2 = fit_poly4(ctx.sweep, "delta_s", 2);
    const FitQuality q4 =
        fit_quality(ctx.sp4, ctx.ss4, ctx.sweep, ctx.params, fast_solve());
    const FitQuality q2 = fit_quality(sp2, ss2, ctx.sweep, ctx.params, fast_solve());
    std::printf(
        "    %d feasible rows; variance dp=%.4f ds=%.4f; eta penalty deg4=%.3e "
        "deg2=%.3e\n",
        feasible, ctx.sp4.error_variance, ctx.ss4.error_variance,
        q4.efficiency_penalty, q2.efficiency_penalty);
    c.require(q4.efficiency_penalty < q2.efficiency_penalty,
              fmt("degree-4 penalty %.3e not below degree-2 penalty %.3e",
                  q4.efficiency_penalty, q2.efficiency_penalty));
    return c.ok;
}

// ---------------------------------------------------------------------------
// 6. Estimator network: gradient correctness and accuracy targets, with the
//    physics-weighted loss strictly beating the pure data-driven baseline.

double batch_objective(const MlpModel& m, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& y) {
    double acc = 0.0;
    for (int j = 0; j < x.cols(); ++j)
        acc += (mlp_forward(m, x.col(j)) - y.col(j)).squaredNorm();
    acc /= x.cols();
    for (const auto& w : m.w) acc += 0.5 * m.l2 * w.squaredNorm();
    return acc;
}

bool criterion6(Context& ctx) {
    Checker c;

    // Backpropagation vs central differences on every layer.
    {
        MlpModel m = MlpModel::init(8, 64, 2, 3);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::MatrixXd x(8, 8), y(2, 8);
        for (int j = 0; j < 8; ++j) {
            for (int i = 0; i < 8; ++i) x(i, j) = u(rng);
            for (int i = 0; i < 2; ++i) y(i, j) = u(rng);
        }
        const LayerGrads g = data_gradients(m, x, y);
        const double h = 1e-6;
        int bad = 0, checked = 0;
        auto fd_check = [&](double grad, double* slot) {
            const double orig = *slot;
            *slot = orig + h;
            const double fp = batch_objective(m, x, y);
            *slot = orig - h;
            const double fm = batch_objective(m, x, y);
            *slot = orig;
            const double fd = (fp - fm) / (2.0 * h);
            // Central differences carry ~eps*|f|/h of roundoff (~1e-10 here),
            // so the relative test needs an absolute floor above that noise.
            if (std::abs(grad - fd) >
                1e-5 * (1.0 + std::max(std::abs(grad), std::abs(fd))))
                ++bad;
            ++checked;
        };
        for (int l = 0; l < m.layers(); ++l) {
            for (int r = 0; r < m.w[l].rows(); ++r)
                for (int cc = 0; cc < m.w[l].cols(); ++cc)
                    fd_check(g.w[l](r, cc), &m.w[l](r, cc));
            for (int r = 0; r < m.b[l].size(); ++r)
                fd_check(g.b[l](r), &m.b[l](r));
        }
        c.require(bad == 0, fmt("%d of %d gradient entries off", bad, checked));
        std::printf("    gradient check: %d parameters verified\n", checked);
    }

    ensure_dataset(ctx);

    TrainConfig cfg;
    cfg.epochs = 230;
    cfg.seed = 5;
    // Noise-free synthetic data: dropout only raises the error floor.
    cfg.dropout = 0.0;
    cfg.lambda = 0.8;
    std::printf("    [training physics-weighted model...]\n");
    const TrainResult phys = train(ctx.ds, ctx.params, cfg);
    cfg.lambda = 0.0;
    std::printf("    [training data-only baseline...]\n");
    const TrainResult base = train(ctx.ds, ctx.params, cfg);

    const EvalResult ep = evaluate(phys.model, ctx.ds);
    const EvalResult eb = evaluate(base.model, ctx.ds);
    std::printf("    test MAE: physics Lt %.2f%% Rt %.2f%%, data-only Lt %.2f%% Rt "
                "%.2f%%\n",
                ep.mae_lt_pct, ep.mae_rt_pct, eb.mae_lt_pct, eb.mae_rt_pct);
    c.require(ep.mae_lt_pct <= 5.0, fmt("Lt MAE %.2f%% above 5%%", ep.mae_lt_pct));
    c.require(ep.mae_rt_pct <= 6.0, fmt("Rt MAE %.2f%% above 6%%", ep.mae_rt_pct));
    c.require(ep.mae_lt_pct < eb.mae_lt_pct,
              fmt("physics Lt MAE %.2f%% not below baseline %.2f%%", ep.mae_lt_pct,
                  eb.mae_lt_pct));
    c.require(ep.mae_rt_pct < eb.mae_rt_pct,
              fmt("physics Rt MAE %.2f%% not below baseline %.2f%%", ep.mae_rt_pct,
                  eb.mae_rt_pct));
    return c.ok;
}

// ---------------------------------------------------------------------------
// 7. Telemetry codec.

bool criterion7(Context&) {
    Checker c;
    for (int code = 0; code <= 0xFFFF; ++code) {
        const std::vector<std::uint8_t> bytes{
            static_cast<std::uint8_t>(code >> 8),
            static_cast<std::uint8_t>(code & 0xff)};
        const auto vals = spi_decode(bytes);
        const auto re = spi_encode({{"x", vals[0]}});
        if (re[0] != bytes[0] || re[1] != bytes[1]) {
            c.require(false, fmt("round trip broke at code 0x%04X", code));
            break;
        }
    }
    const auto bytes = spi_encode({{"Vds", 160.45}});
    c.require(bytes.size() == 2 && bytes[0] == 0x3E && bytes[1] == 0xAD,
              "160.45 did not encode to 3E AD");
    const auto vals = spi_decode({0x3E, 0xAD});
    c.require(vals.size() == 1 && vals[0] == 16045 / 100.0,
              "3E AD did not decode to 160.45");
    return c.ok;
}

// ---------------------------------------------------------------------------
// 8. Closed-loop adaptation after an inductance step.

bool criterion8(Context& ctx) {
    Checker c;
    ensure_fit(ctx);

    Scenario sc;
    sc.duration = 0.16;
    sc.estimation_period = 0.05;  // estimations at 0.05, 0.10, 0.15
    sc.vout_target = 100.0;       // physical secondary volts
    sc.load_power = 1400.0;
    sc.estimator = "oracle";
    sc.events.push_back({0.06, "lt_scale", 0.7});

    const LoopResult r = run_scenario(ctx.params, ctx.sp4, ctx.ss4, sc);
    c.require(!r.series.empty(), "empty simulation series");

    // Stale window: plant already stepped, controller still holding the
    // nominal-parameter duties. Adapted window: after the 0.10 s estimation.
    auto window_stats = [&](double t0, double t1, double& p_mean, double& rms_mean) {
        double ps = 0.0, rs = 0.0;
        int n = 0;
        for (const LoopSample& s : r.series)
            if (s.t >= t0 && s.t <= t1) {
                ps += s.p_total;
                rs += s.ip_rms;
                ++n;
            }
        c.require(n > 0, "empty evaluation window");
        p_mean = ps / std::max(n, 1);
        rms_mean = rs / std::max(n, 1);
    };
    double p_stale = 0.0, rms_stale = 0.0, p_adapt = 0.0, rms_adapt = 0.0;
    window_stats(0.075, 0.0995, p_stale, rms_stale);
    window_stats(0.115, 0.1595, p_adapt, rms_adapt);
    const double rms_drop = (rms_stale - rms_adapt) / rms_stale;
    std::printf("    loss %.2f -> %.2f W, inductor RMS %.3f -> %.3f A (%.1f%% drop)\n",
                p_stale, p_adapt, rms_stale, rms_adapt, 100.0 * rms_drop);
    c.require(p_adapt < p_stale,
              fmt("total loss did not decrease (%.3f vs %.3f W)", p_adapt, p_stale));
    c.require(rms_drop >= 0.05, fmt("inductor RMS drop %.2f%% below 5%%",
                                    100.0 * rms_drop));

    // Regulation everywhere outside startup and short event/update transients.
    auto in_transient = [&](double t) {
        if (t < 0.01) return true;                      // startup
        if (t >= 0.06 && t < 0.07) return true;         // plant step
        for (double te : {0.05, 0.10, 0.15})            // estimation updates
            if (t >= te && t < te + 0.005) return true;
        return false;
    };
    double worst_reg = 0.0;
    for (const LoopSample& s : r.series) {
        if (in_transient(s.t)) continue;
        worst_reg = std::max(worst_reg, std::abs(s.vout - sc.vout_target) / 100.0);
    }
    std::printf("    worst settled regulation error %.4f%%\n", 100.0 * worst_reg);
    c.require(worst_reg < 0.005, fmt("regulation error %.3f%%", 100.0 * worst_reg));

    // Belief actually tracked the step through the telemetry link.
    const LumpedParams nom = lumped_params(ctx.params);
    const LoopSample& tail = r.series.back();
    c.require(std::abs(tail.believed_lt - 0.7 * nom.lt) <= 2e-3 * nom.lt,
              "estimated inductance did not follow the step");
    return c.ok;
}

// ---------------------------------------------------------------------------
// 9. Re-optimization gain map.

bool criterion9(Context& ctx) {
    Checker c;
    OptimizerSettings s;
    s.n_starts = 6;
    s.max_iters = 40;
    s.solve = fast_solve();
    s.seed = 4242;

    const LumpedParams nom = lumped_params(ctx.params);

    // Nominal plant: re-optimizing changes nothing, the gain is identically 0.
    const auto base = adaptive_gain_map(ctx.params, nom.lt, nom.rt, {140.0},
                                        {600.0, 1200.0, 1800.0}, s);
    for (const GainCell& cell : base) {
        c.require(cell.feasible, fmt("nominal cell Ps=%g infeasible", cell.ps));
        c.require(cell.delta_eta == 0.0,
                  fmt("nominal gain %.3e != 0 at Ps=%g", cell.delta_eta, cell.ps));
    }

    // 30% inductance reduction: no cell may lose efficiency beyond the
    // optimizer's own tolerance, and the largest gain sits at light-to-mid
    // load.
    const std::vector<double> ps_axis{200.0, 500.0, 800.0, 1100.0,
                                      1400.0, 1700.0, 2000.0};
    const auto red =
        adaptive_gain_map(ctx.params, 0.7 * nom.lt, nom.rt, {140.0}, ps_axis, s);
    double best = -1.0, best_ps = 0.0;
    for (const GainCell& cell : red) {
        c.require(cell.feasible, fmt("reduced-Lt cell Ps=%g infeasible", cell.ps));
        c.require(cell.delta_eta >= -2e-4,
                  fmt("gain %.3e below tolerance at Ps=%g", cell.delta_eta, cell.ps));
        std::printf("    Ps=%6.0f W: delta_eta=%+.4e\n", cell.ps, cell.delta_eta);
        if (cell.delta_eta > best) {
            best = cell.delta_eta;
            best_ps = cell.ps;
        }
    }
    c.require(best > 0.0, "no cell gains from re-optimization");
    c.require(best_ps <= 1100.0,
              fmt("max gain at Ps=%g W, not in the light-to-mid-load region",
                  best_ps));
    return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    Context ctx;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cache" && i + 1 < argc)
            ctx.cache = argv[++i];
        else
            only.insert(std::atoi(a.c_str()));
    }

    struct Criterion {
        int id;
        const char* name;
        bool (*fn)(Context&);
    };
    const std::vector<Criterion> criteria{
        {1, "frequency-domain model vs time-domain reference", criterion1},
        {2, "ideal-model closed forms", criterion2},
        {3, "charge-loss limiting cases", criterion3},
        {4, "optimizer constraint, baseline dominance, determinism", criterion4},
        {5, "duty-surface fitting", criterion5},
        {6, "parameter estimator training", criterion6},
        {7, "telemetry codec", criterion7},
        {8, "closed-loop adaptation", criterion8},
        {9, "re-optimization gain map", criterion9},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        if (!only.empty() && !only.count(cr.id)) continue;
        bool ok = false;
        try {
            ok = cr.fn(ctx);
        } catch (const std::exception& e) {
            std::printf("    error: %s\n", e.what());
        }
        std::printf("criterion %d (%s): %s\n", cr.id, cr.name, ok ? "PASS" : "FAIL");
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
