#include "dab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#ifdef DAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace dab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = M_PI / 2.0;

double select_cost(const LossBreakdown& b, CostSelector sel) {
    switch (sel) {
        case CostSelector::TotalLoss: return b.p_total;
        case CostSelector::Conduction: return b.p_cond;
        case CostSelector::Switching: return b.p_sw_vi + b.p_sw_coss;
    }
    return b.p_total;
}

double ps_out_at(const CircuitParams& params, const OperatingPoint& op,
                 const ModulationPoint& m, const SolveSettings& ss) {
    const SteadyStateSolution sol = solve_steady_state(params, op, m, ss);
    const LossBreakdown b = loss_breakdown(params, op, sol);
    return std::abs(sol.ps_ac) - b.p_core - b.p_sw_secondary;
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index + 1; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

}  // namespace

PointEval evaluate_modulation(const CircuitParams& params, const OperatingPoint& op,
                              const ModulationPoint& m, const SolveSettings& ss) {
    PointEval e;
    e.sol = solve_steady_state(params, op, m, ss);
    e.losses = loss_breakdown(params, op, e.sol);
    e.balance = power_balance(e.sol, e.losses);
    return e;
}

std::optional<double> solve_phi_for_power(const CircuitParams& params,
                                          const OperatingPoint& op, double delta_p,
                                          double delta_s, const SolveSettings& ss,
                                          double power_tol_w) {
    auto g = [&](double phi) {
        return ps_out_at(params, op, {delta_p, delta_s, phi}, ss) - op.ps_out_target;
    };
    double a = 0.0, b = kHalfPi;
    double ga = g(a), gb = g(b);
    if (std::abs(ga) <= power_tol_w) return a;
    if (std::abs(gb) <= power_tol_w) return b;
    if (ga > 0.0 || gb < 0.0) return std::nullopt;

    // False position with bisection fallback; the power curve is smooth and
    // monotone over the bracket.
    for (int it = 0; it < 80; ++it) {
        double mid = (a * gb - b * ga) / (gb - ga);
        if (!(mid > a && mid < b)) mid = 0.5 * (a + b);
        // Keep the secant point away from a stagnating endpoint.
        const double margin = 1e-3 * (b - a);
        mid = std::clamp(mid, a + margin, b - margin);
        const double gm = g(mid);
        if (std::abs(gm) <= power_tol_w) return mid;
        if (gm < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
            gb = gm;
        }
        if (b - a < 1e-12) break;
    }
    return std::nullopt;
}

OptResult optimize_tps(const CircuitParams& params, const OperatingPoint& op,
                       const OptimizerSettings& settings) {
    OptResult out;
    const double target = op.ps_out_target;

    // Feasibility envelope: full phase shift with square-wave duties.
    const double ps_max = ps_out_at(params, op, {0.0, 0.0, kHalfPi}, settings.solve);
    if (ps_max + settings.power_eps_w < target) {
        std::ostringstream os;
        os << "power target " << target << " W exceeds the reachable maximum "
           << ps_max << " W at this operating point";
        throw std::runtime_error(os.str());
    }

    struct Cand {
        double cost = kInf;
        ModulationPoint m;
        bool ok = false;
    };
    auto eval_duties = [&](double dp, double ds) -> Cand {
        Cand c;
        const auto phi = solve_phi_for_power(params, op, dp, ds, settings.solve,
                                             0.2 * settings.power_eps_w);
        if (!phi) return c;
        c.m = {dp, ds, *phi};
        try {
            const SteadyStateSolution sol =
                solve_steady_state(params, op, c.m, settings.solve);
            const LossBreakdown b = loss_breakdown(params, op, sol);
            c.cost = select_cost(b, settings.cost);
            c.ok = true;
        } catch (const std::exception&) {
            c.cost = kInf;
        }
        return c;
    };

    std::uint64_t rng = settings.seed;
    const double off2 = splitmix64(rng) * 0x1p-64;
    const double off3 = splitmix64(rng) * 0x1p-64;

    Cand best;
    for (int s = 0; s < settings.n_starts; ++s) {
        // Start 0 sits at the always-feasible square-wave corner so the
        // returned point can never lose to the plain phase-shift baseline;
        // the rest are low-discrepancy, seed-shifted, kept away from the
        // duty corner where the power target becomes unreachable.
        double dp = s == 0 ? 0.0 : std::fmod(halton(s, 2) + off2, 1.0) * 0.85 * kHalfPi;
        double ds = s == 0 ? 0.0 : std::fmod(halton(s, 3) + off3, 1.0) * 0.85 * kHalfPi;
        StartTrace tr;
        tr.start_dp = dp;
        tr.start_ds = ds;

        Cand cur = eval_duties(dp, ds);
        if (!cur.ok) {
            // Walk toward the always-feasible origin until the power target
            // becomes reachable.
            for (int k = 0; k < 6 && !cur.ok; ++k) {
                dp *= 0.5;
                ds *= 0.5;
                cur = eval_duties(dp, ds);
            }
        }
        if (cur.ok) {
            const double h = settings.grad_step;
            double step = 0.08;
            for (int it = 0; it < settings.max_iters; ++it) {
                auto partial = [&](int coord) {
                    const double x = coord == 0 ? dp : ds;
                    const double xp = std::min(x + h, kHalfPi);
                    const double xm = std::max(x - h, 0.0);
                    const Cand cp = coord == 0 ? eval_duties(xp, ds) : eval_duties(dp, xp);
                    const Cand cm = coord == 0 ? eval_duties(xm, ds) : eval_duties(dp, xm);
                    if (cp.ok && cm.ok) return (cp.cost - cm.cost) / (xp - xm);
                    if (cp.ok) return (cp.cost - cur.cost) / (xp - x);
                    if (cm.ok) return (cur.cost - cm.cost) / (x - xm);
                    return 0.0;
                };
                const double g0 = partial(0);
                const double g1 = partial(1);
                const double gn = std::hypot(g0, g1);
                if (gn < 1e-12) break;

                bool improved = false;
                double t = step;
                for (int bt = 0; bt < 14; ++bt) {
                    const double ndp = std::clamp(dp - t * g0 / gn, 0.0, kHalfPi);
                    const double nds = std::clamp(ds - t * g1 / gn, 0.0, kHalfPi);
                    const Cand nc = eval_duties(ndp, nds);
                    if (nc.ok && nc.cost < cur.cost - 1e-12) {
                        dp = ndp;
                        ds = nds;
                        const double gain = cur.cost - nc.cost;
                        cur = nc;
                        improved = gain > settings.cost_tol;
                        step = std::min(1.5 * t, 0.08);
                        break;
                    }
                    t *= 0.5;
                }
                if (!improved) break;
            }
        }

        tr.feasible = cur.ok;
        tr.result = cur.m;
        tr.cost = cur.cost;
        out.trace.push_back(tr);
        if (cur.ok && cur.cost < best.cost) best = cur;
    }

    if (!best.ok)
        throw std::runtime_error("no start satisfied the power constraint");

    out.x = best.m;
    out.cost = best.cost;
    const PointEval e = evaluate_modulation(params, op, out.x, settings.solve);
    out.ps_out = e.balance.ps_out;
    out.p_total = e.losses.p_total;
    out.efficiency = e.balance.efficiency;
    out.ok = std::abs(out.ps_out - target) <= settings.power_eps_w;
    out.status = out.ok ? "ok" : "power constraint violated at optimum";
    return out;
}

std::vector<double> GridSpec::linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

std::size_t GridSpec::cells() const {
    return lp.size() * ls_prime.size() * rl_p.size() * rl_s.size() * vout.size() *
           ps.size();
}

std::vector<SweepRow> sweep_optimal_dataset(const CircuitParams& base,
                                            const GridSpec& grid,
                                            const OptimizerSettings& settings,
                                            bool parallel) {
    if (grid.cells() == 0) throw std::invalid_argument("empty sweep grid");
    const std::size_t n = grid.cells();
    std::vector<SweepRow> rows(n);

    const auto dims = std::array<std::size_t, 6>{
        grid.lp.size(),  grid.ls_prime.size(), grid.rl_p.size(),
        grid.rl_s.size(), grid.vout.size(),     grid.ps.size()};

    auto run_cell = [&](std::size_t idx) {
        std::size_t rem = idx;
        std::array<std::size_t, 6> c{};
        for (int d = 5; d >= 0; --d) {
            c[d] = rem % dims[d];
            rem /= dims[d];
        }
        SweepRow& row = rows[idx];
        row.lp = grid.lp[c[0]];
        row.ls_prime = grid.ls_prime[c[1]];
        row.rl_p = grid.rl_p[c[2]];
        row.rl_s = grid.rl_s[c[3]];
        row.vout = grid.vout[c[4]];
        row.ps = grid.ps[c[5]];

        CircuitParams p = base;
        p.lp = row.lp;
        p.ls_prime = row.ls_prime;
        p.rp.fundamental = row.rl_p;
        p.rs.fundamental = row.rl_s;
        const LumpedParams lump = lumped_params(p);
        row.lt = lump.lt;
        row.rt = lump.rt;

        OptimizerSettings s = settings;
        s.seed = settings.seed + 0x9e3779b9ull * idx;
        try {
            const OptResult r =
                optimize_tps(p, {base.vin_nominal, row.vout, row.ps}, s);
            row.delta_p = r.x.delta_p;
            row.delta_s = r.x.delta_s;
            row.phi = r.x.phi;
            row.p_total = r.p_total;
            row.efficiency = r.efficiency;
            row.feasible = r.ok;
        } catch (const std::exception&) {
            row.feasible = false;
        }
    };

    if (parallel) {
#ifdef DAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long i = 0; i < (long long)n; ++i) run_cell((std::size_t)i);
    } else {
        for (std::size_t i = 0; i < n; ++i) run_cell(i);
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "Lp,Ls_prime,Rl_p,Rl_s,Vout,Ps,delta_p,delta_s,phi,P_total,efficiency,"
         "Lt,Rt,feasible\n";
    char buf[512];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%.9e,%.9e,%.9e,%.9e,%.9e,%.9e,%.12e,%.12e,%.12e,%.9e,%.9e,"
                      "%.9e,%.9e,%d\n",
                      r.lp, r.ls_prime, r.rl_p, r.rl_s, r.vout, r.ps, r.delta_p,
                      r.delta_s, r.phi, r.p_total, r.efficiency, r.lt, r.rt,
                      r.feasible ? 1 : 0);
        f << buf;
    }
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
    std::vector<SweepRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        SweepRow r;
        int feas = 0;
        if (std::sscanf(line.c_str(),
                        "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d",
                        &r.lp, &r.ls_prime, &r.rl_p, &r.rl_s, &r.vout, &r.ps,
                        &r.delta_p, &r.delta_s, &r.phi, &r.p_total, &r.efficiency,
                        &r.lt, &r.rt, &feas) != 14)
            throw std::runtime_error(path + ": malformed row: " + line);
        r.feasible = feas != 0;
        rows.push_back(r);
    }
    return rows;
}

std::vector<ZvsCell> zvs_map(const CircuitParams& params,
                             const std::vector<double>& vout_axis,
                             const std::vector<double>& ps_axis,
                             const OptimizerSettings& settings, bool parallel) {
    const std::size_t n = vout_axis.size() * ps_axis.size();
    std::vector<ZvsCell> cells(n);
    auto run_cell = [&](std::size_t idx) {
        ZvsCell& cell = cells[idx];
        cell.vout = vout_axis[idx / ps_axis.size()];
        cell.ps = ps_axis[idx % ps_axis.size()];
        OptimizerSettings s = settings;
        s.seed = settings.seed + 0x9e3779b9ull * idx;
        try {
            const OptResult r =
                optimize_tps(params, {params.vin_nominal, cell.vout, cell.ps}, s);
            cell.x = r.x;
            const PointEval e = evaluate_modulation(
                params, {params.vin_nominal, cell.vout, cell.ps}, r.x, s.solve);
            cell.legs = e.losses.zvs;
            cell.full_zvs_legs = 0;
            for (ZvsClass z : cell.legs)
                if (z == ZvsClass::Full) ++cell.full_zvs_legs;
        } catch (const std::exception&) {
            cell.full_zvs_legs = -1;
        }
    };
    if (parallel) {
#ifdef DAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long i = 0; i < (long long)n; ++i) run_cell((std::size_t)i);
    } else {
        for (std::size_t i = 0; i < n; ++i) run_cell(i);
    }
    return cells;
}

CircuitParams scale_to_lumped(const CircuitParams& nominal, double lt, double rt) {
    const LumpedParams nom = lumped_params(nominal);
    if (!(lt > 0.0) || !(rt > 0.0))
        throw std::invalid_argument("lumped targets must be positive");
    CircuitParams p = nominal;
    const double sl = lt / nom.lt;
    p.lp *= sl;
    p.ls_prime *= sl;
    if (p.lumped_includes_leakage) {
        p.llp *= sl;
        p.lls *= sl;
    }
    const double sr = rt / nom.rt;
    p.rp.fundamental *= sr;
    for (auto& [k, v] : p.rp.overrides) v *= sr;
    p.rs.fundamental *= sr;
    for (auto& [k, v] : p.rs.overrides) v *= sr;
    return p;
}

std::vector<GainCell> adaptive_gain_map(const CircuitParams& nominal,
                                        double lt_actual, double rt_actual,
                                        const std::vector<double>& vout_axis,
                                        const std::vector<double>& ps_axis,
                                        const OptimizerSettings& settings,
                                        bool parallel) {
    const CircuitParams actual = scale_to_lumped(nominal, lt_actual, rt_actual);
    const std::size_t n = vout_axis.size() * ps_axis.size();
    std::vector<GainCell> cells(n);

    auto run_cell = [&](std::size_t idx) {
        GainCell& cell = cells[idx];
        cell.vout = vout_axis[idx / ps_axis.size()];
        cell.ps = ps_axis[idx % ps_axis.size()];
        const OperatingPoint op{nominal.vin_nominal, cell.vout, cell.ps};
        OptimizerSettings s = settings;
        s.seed = settings.seed + 0x9e3779b9ull * idx;
        try {
            // Duties the controller would use believing the nominal
            // parameters, and the ones re-optimized for the actual plant.
            const OptResult stale = optimize_tps(nominal, op, s);
            const OptResult adapted = optimize_tps(actual, op, s);

            // Tight power tolerance here: both duty pairs must deliver the
            // same power or the efficiency difference is dominated by the
            // root-find slack rather than by the duties.
            auto eta_on_actual = [&](const ModulationPoint& duties) {
                const auto phi = solve_phi_for_power(actual, op, duties.delta_p,
                                                     duties.delta_s, s.solve,
                                                     0.02 * s.power_eps_w);
                if (!phi) throw std::runtime_error("power target unreachable");
                const PointEval e = evaluate_modulation(
                    actual, op, {duties.delta_p, duties.delta_s, *phi}, s.solve);
                return e.balance.efficiency;
            };
            cell.eta_stale = eta_on_actual(stale.x);
            cell.eta_adapted = eta_on_actual(adapted.x);
            cell.delta_eta = cell.eta_adapted - cell.eta_stale;
            cell.feasible = true;
        } catch (const std::exception&) {
            cell.feasible = false;
        }
    };
    if (parallel) {
#ifdef DAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long i = 0; i < (long long)n; ++i) run_cell((std::size_t)i);
    } else {
        for (std::size_t i = 0; i < n; ++i) run_cell(i);
    }
    return cells;
}

}  // namespace dab
