#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dab/config.hpp"
#include "dab/losses.hpp"
#include "dab/nifdm.hpp"

using namespace dab;

namespace {
double wrap(double th) {
    th = std::fmod(th, 2.0 * M_PI);
    return th < 0.0 ? th + 2.0 * M_PI : th;
}
}  // namespace

TEST_CASE("terminal conduction loss equals the branch-wise ohmic sum") {
    const CircuitParams p = nominal_params();
    const OperatingPoint op{160.0, 140.0, 0.0};
    const ModulationPoint m{0.32, 0.19, 0.59};
    const SteadyStateSolution sol = solve_steady_state(p, op, m);
    const BranchCurrents cur{sol.ip, sol.is};
    const double branch = branch_conduction_sum(cur, sol.net);
    CHECK(conduction_loss(sol) == doctest::Approx(branch).epsilon(1e-6));
}

TEST_CASE("switching instants follow the gate pattern") {
    const CircuitParams p = nominal_params();
    const OperatingPoint op{160.0, 140.0, 0.0};
    const ModulationPoint m{0.32, 0.19, 0.59};
    const SteadyStateSolution sol = solve_steady_state(p, op, m);
    const auto inst = switching_instants(p, sol);
    const double tw = p.omega_s() * p.td;

    CHECK(inst[0].leg == Leg::P1);
    CHECK(inst[0].theta_on == doctest::Approx(wrap(m.delta_p + tw)));
    CHECK(inst[0].theta_off == doctest::Approx(wrap(M_PI + m.delta_p)));
    CHECK(inst[1].theta_on == doctest::Approx(wrap(M_PI - m.delta_p + tw)));
    CHECK(inst[2].theta_on == doctest::Approx(wrap(m.phi + m.delta_s + tw)));
    CHECK(inst[3].theta_off == doctest::Approx(wrap(2.0 * M_PI + m.phi - m.delta_s)));

    for (int i = 0; i < 4; ++i) {
        const SwitchingInstant& s = inst[i];
        const HarmonicSpectrum& cur = is_primary(s.leg) ? sol.ip : sol.is;
        CHECK(s.i_on == doctest::Approx(std::abs(cur.value(s.theta_on))));
        CHECK(s.i_off == doctest::Approx(std::abs(cur.value(s.theta_off))));
        CHECK(s.v_on == doctest::Approx(sol.leg_delta_v[i]));
        CHECK(s.v_off == doctest::Approx(is_primary(s.leg) ? op.vin : op.vout_prime));
    }
}

TEST_CASE("v-i overlap loss hand calculation") {
    std::array<SwitchingInstant, 4> inst{};
    inst[0].v_off = 160.0;
    inst[0].i_off = 5.0;
    std::array<double, 4> t_on{};
    std::array<double, 4> t_off{};
    t_off[0] = 1e-8;
    // Two devices per leg, each dissipating V*I*t_off once per period.
    CHECK(vi_overlap_loss(inst, t_on, t_off, 1e5) ==
          doctest::Approx(2.0 * 160.0 * 5.0 * 1e5 * 1e-8));

    // Turn-on term uses the residual voltage.
    inst[0] = {};
    inst[0].v_on = 30.0;
    inst[0].i_on = 2.0;
    t_off[0] = 0.0;
    t_on[0] = 5e-9;
    CHECK(vi_overlap_loss(inst, t_on, t_off, 1e5) ==
          doctest::Approx(2.0 * 30.0 * 2.0 * 1e5 * 5e-9));
}

TEST_CASE("charge loss reduces to C*dV^2 for a constant capacitance") {
    CircuitParams p = nominal_params();
    const double c = 1.2e-9, v_link = 160.0;
    p.coss_primary = CossCurve::constant(c, 400.0);
    const OperatingPoint op{v_link, 140.0, 0.0};

    std::array<SwitchingInstant, 4> inst{};
    for (int i = 0; i < 4; ++i) inst[i].leg = kAllLegs[i];
    const double dv = 47.0;
    inst[0].v_on = dv;
    const CossLoss loss = coss_switching_loss(inst, p, op);
    CHECK(loss.per_leg[0] ==
          doctest::Approx(2.0 * c * dv * dv * p.fsw).epsilon(1e-12));
}

TEST_CASE("hard-switched leg dissipates the full Qoss*V energy") {
    const CircuitParams p = nominal_params();  // nonlinear device curves
    const double v_link = 160.0;
    const OperatingPoint op{v_link, 140.0, 0.0};
    std::array<SwitchingInstant, 4> inst{};
    for (int i = 0; i < 4; ++i) inst[i].leg = kAllLegs[i];
    inst[0].v_on = v_link;
    const CossLoss loss = coss_switching_loss(inst, p, op);
    const double e_hard = p.coss_primary.charge(v_link) * v_link;
    CHECK(loss.per_leg[0] == doctest::Approx(2.0 * e_hard * p.fsw).epsilon(1e-12));
    CHECK(loss.classification[0] == ZvsClass::Hard);
    CHECK(loss.classification[1] == ZvsClass::Full);  // v_on = 0

    // Secondary legs see the physical (unreferred) link voltage.
    inst[2].v_on = op.vout_prime;  // full referred swing
    const CossLoss loss2 = coss_switching_loss(inst, p, op);
    const double vs_phys = op.vout_prime / p.turns_ratio;
    CHECK(loss2.per_leg[2] ==
          doctest::Approx(2.0 * p.coss_secondary.charge(vs_phys) * vs_phys * p.fsw)
              .epsilon(1e-12));
}

TEST_CASE("zvs classification thresholds") {
    const CircuitParams p = nominal_params();
    const OperatingPoint op{160.0, 140.0, 0.0};
    std::array<SwitchingInstant, 4> inst{};
    for (int i = 0; i < 4; ++i) inst[i].leg = kAllLegs[i];
    inst[0].v_on = 0.005 * 160.0;
    inst[1].v_on = 0.5 * 160.0;
    const CossLoss loss = coss_switching_loss(inst, p, op);
    CHECK(loss.classification[0] == ZvsClass::Full);
    CHECK(loss.classification[1] == ZvsClass::Partial);
    CHECK(std::string(zvs_name(ZvsClass::Partial)) == "partial");
}

TEST_CASE("core loss reproduces the Steinmetz fit on a known flux swing") {
    // Single sinusoidal current harmonic through the primary inductor with
    // flux swing tuned to Bm = 0.1 T.
    CircuitParams p = nominal_params();
    p.fsw = 100e3;
    p.lp = 1e-5;
    p.cores = {{Winding::PrimaryInductor, 1.0, 1e-4, 10.0, 25.0, 0.47}};

    SteadyStateSolution sol;
    sol.k_max = 1;
    sol.omega_s = p.omega_s();
    sol.ip = HarmonicSpectrum(1);
    sol.ip.coeff[0] = 1.0;  // A => Bm = |I| Lp / (N Ae) = 0.1 T

    const CoreLoss cl = core_loss(p, sol);
    REQUIRE(cl.bm.size() == 1);
    CHECK(cl.bm[0] == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(cl.watts == doctest::Approx(0.8737).epsilon(2e-3));
    CHECK(!cl.saturation_warning);

    SUBCASE("temperature factor scales the loss") {
        CircuitParams hot = p;
        hot.cores[0].t_core_c = 100.0;
        const CoreLoss ch = core_loss(hot, sol);
        CHECK(ch.watts / cl.watts == doctest::Approx(0.994 / 1.491625).epsilon(1e-9));
    }

    SUBCASE("saturation warning") {
        CircuitParams sat = p;
        sat.cores[0].b_sat = 0.05;
        CHECK(core_loss(sat, sol).saturation_warning);
    }
}

TEST_CASE("loss breakdown and terminal bookkeeping close exactly") {
    const CircuitParams p = nominal_params();
    const OperatingPoint op{160.0, 140.0, 0.0};
    const ModulationPoint m{0.32, 0.19, 0.59};
    const SteadyStateSolution sol = solve_steady_state(p, op, m);
    const LossBreakdown b = loss_breakdown(p, op, sol);

    CHECK(b.p_cond > 0.0);
    CHECK(b.p_sw_vi >= 0.0);
    CHECK(b.p_sw_coss >= 0.0);
    CHECK(b.p_core > 0.0);
    CHECK(b.p_total ==
          doctest::Approx(b.p_cond + b.p_sw_vi + b.p_sw_coss + b.p_core));
    CHECK(b.p_sw_primary + b.p_sw_secondary ==
          doctest::Approx(b.p_sw_vi + b.p_sw_coss).epsilon(1e-12));

    const PowerBalance pb = power_balance(sol, b);
    CHECK(pb.pp_in - pb.ps_out == doctest::Approx(b.p_total).epsilon(1e-12));
    CHECK(pb.efficiency > 0.9);
    CHECK(pb.efficiency < 1.0);
}

TEST_CASE("power balance rejects inconsistent accounting") {
    SteadyStateSolution sol;
    sol.pp_ac = 100.0;
    sol.ps_ac = -200.0;  // more output than input
    LossBreakdown b;
    CHECK_THROWS_AS(power_balance(sol, b), std::runtime_error);

    sol.pp_ac = -10.0;
    sol.ps_ac = -5.0;
    CHECK_THROWS_AS(power_balance(sol, b), std::runtime_error);
}

TEST_CASE("conduction loss grows with series resistance") {
    CircuitParams lo = nominal_params();
    CircuitParams hi = lo;
    hi.rp.fundamental *= 3.0;
    hi.rs.fundamental *= 3.0;
    const OperatingPoint op{160.0, 140.0, 0.0};
    const ModulationPoint m{0.32, 0.19, 0.59};
    const double c_lo = conduction_loss(solve_steady_state(lo, op, m));
    const double c_hi = conduction_loss(solve_steady_state(hi, op, m));
    CHECK(c_hi > 1.5 * c_lo);
}
