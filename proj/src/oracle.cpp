#include "dab/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>

#include "bridge_wave.hpp"

namespace dab {

namespace {

// State vector: [vA, vM, vB, i_p, i_lp, i_m, i_ls, i_s]. i_s flows from node
// B into the secondary source, so the bridge-out current is -i_s.
constexpr int kN = 8;

struct Descriptor {
    Eigen::Matrix<double, kN, kN> E = Eigen::Matrix<double, kN, kN>::Zero();
    Eigen::Matrix<double, kN, kN> A = Eigen::Matrix<double, kN, kN>::Zero();
    Eigen::Matrix<double, kN, 2> B = Eigen::Matrix<double, kN, 2>::Zero();
};

Descriptor build_descriptor(const CircuitParams& p) {
    const double n2 = p.n2();
    const double rp = p.rp.at(1), rlp = p.rlp.at(1);
    const double rs = n2 * p.rs.at(1), rls = n2 * p.rls.at(1);
    const double ls = n2 * p.ls_prime, lls = n2 * p.lls;
    const double cis = p.cis / n2;

    Descriptor d;
    // KCL at node A.
    d.E(0, 0) = p.cip + p.cps;
    d.E(0, 2) = -p.cps;
    d.A(0, 3) = 1.0;
    d.A(0, 4) = -1.0;
    // KCL at node M (pure inductor node; algebraic).
    d.A(1, 4) = 1.0;
    d.A(1, 5) = -1.0;
    d.A(1, 6) = -1.0;
    // KCL at node B.
    d.E(2, 0) = p.cps;
    d.E(2, 2) = -(p.cps + cis);
    d.A(2, 7) = 1.0;
    d.A(2, 6) = -1.0;
    // Series branches.
    d.E(3, 3) = p.lp;
    d.A(3, 3) = -rp;
    d.A(3, 0) = -1.0;
    d.B(3, 0) = 1.0;
    d.E(4, 4) = p.llp;
    d.A(4, 4) = -rlp;
    d.A(4, 0) = 1.0;
    d.A(4, 1) = -1.0;
    d.E(5, 5) = p.lm;
    d.A(5, 1) = 1.0;
    d.E(6, 6) = lls;
    d.A(6, 6) = -rls;
    d.A(6, 1) = 1.0;
    d.A(6, 2) = -1.0;
    d.E(7, 7) = ls;
    d.A(7, 7) = -rs;
    d.A(7, 2) = 1.0;
    d.B(7, 1) = -1.0;
    return d;
}

using SourceFn = std::function<double(double)>;  // theta -> volts

struct PssPass {
    Eigen::Matrix<double, kN, 1> x0;
    double residual = 0.0;
};

// One trapezoidal pass over the period; when record != nullptr stores the
// N state samples (columns) starting at x0.
PssPass periodic_solve(const Descriptor& d, const SourceFn& src_vp,
                       const SourceFn& src_vs, double period, int steps,
                       Eigen::MatrixXd* record) {
    const double h = period / steps;
    const Eigen::Matrix<double, kN, kN> m_lhs = d.E - 0.5 * h * d.A;
    const Eigen::Matrix<double, kN, kN> m_rhs = d.E + 0.5 * h * d.A;
    Eigen::PartialPivLU<Eigen::Matrix<double, kN, kN>> lu(m_lhs);

    auto input = [&](int n) {
        const double theta = 2.0 * M_PI * n / steps;
        return Eigen::Vector2d(src_vp(theta), src_vs(theta));
    };

    // Propagate the homogeneous basis and the particular solution together.
    Eigen::Matrix<double, kN, kN + 1> state;
    state.leftCols<kN>() = Eigen::Matrix<double, kN, kN>::Identity();
    state.col(kN).setZero();
    Eigen::Vector2d u_prev = input(0);
    for (int n = 0; n < steps; ++n) {
        const Eigen::Vector2d u_next = input(n + 1);
        Eigen::Matrix<double, kN, kN + 1> rhs = m_rhs * state;
        rhs.col(kN) += 0.5 * h * d.B * (u_prev + u_next);
        state = lu.solve(rhs);
        u_prev = u_next;
    }
    const Eigen::Matrix<double, kN, kN> phi = state.leftCols<kN>();
    const Eigen::Matrix<double, kN, 1> part = state.col(kN);

    // (I - Phi) x0 = c, augmented with the algebraic rows of the descriptor
    // so the start state satisfies the constraints exactly (trapezoidal
    // stepping then preserves them).
    std::vector<int> alg;
    for (int r = 0; r < kN; ++r)
        if (d.E.row(r).isZero(0.0)) alg.push_back(r);
    const int na = static_cast<int>(alg.size());
    Eigen::MatrixXd lhs(kN + na, kN);
    Eigen::VectorXd rhs_v(kN + na);
    lhs.topRows(kN) = Eigen::Matrix<double, kN, kN>::Identity() - phi;
    rhs_v.head(kN) = part;
    const double w = 1e6;
    for (int i = 0; i < na; ++i) {
        lhs.row(kN + i) = w * d.A.row(alg[i]);
        rhs_v(kN + i) = 0.0;  // algebraic rows carry no source term here
    }

    PssPass out;
    out.x0 = lhs.completeOrthogonalDecomposition().solve(rhs_v);
    out.residual = (phi * out.x0 + part - out.x0).norm();

    if (record) {
        record->resize(kN, steps);
        Eigen::Matrix<double, kN, 1> x = out.x0;
        u_prev = input(0);
        for (int n = 0; n < steps; ++n) {
            record->col(n) = x;
            const Eigen::Vector2d u_next = input(n + 1);
            x = lu.solve((m_rhs * x + 0.5 * h * d.B * (u_prev + u_next)).eval());
            u_prev = u_next;
        }
    }
    return out;
}

double ideal_bridge(double theta, double v, double delta) {
    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) theta += 2.0 * M_PI;
    if (theta > delta && theta < M_PI - delta) return v;
    if (theta > M_PI + delta && theta < 2.0 * M_PI - delta) return -v;
    return 0.0;
}

// Periodic linear interpolation over uniformly sampled values.
double sample_periodic(const Eigen::VectorXd& vals, double theta) {
    const int n = static_cast<int>(vals.size());
    double pos = theta / (2.0 * M_PI) * n;
    pos = std::fmod(pos, (double)n);
    if (pos < 0.0) pos += n;
    const int i = static_cast<int>(pos);
    const double frac = pos - i;
    return vals[i] + frac * (vals[(i + 1) % n] - vals[i]);
}

}  // namespace

OracleResult solve_time_domain(const CircuitParams& params, const OperatingPoint& op,
                               const ModulationPoint& m,
                               const OracleSettings& settings) {
    if (!m.in_bounds())
        throw std::domain_error("modulation point outside [0, pi/2]^3");
    if (settings.steps_per_period < 64 || settings.steps_per_period % 2 != 0)
        throw std::domain_error("steps_per_period must be even and >= 64");

    const Descriptor d = build_descriptor(params);
    const double period = 1.0 / params.fsw;
    const int steps = settings.steps_per_period;

    SourceFn src_vp = [&](double th) { return ideal_bridge(th, op.vin, m.delta_p); };
    SourceFn src_vs = [&](double th) {
        return ideal_bridge(th - m.phi, op.vout_prime, m.delta_s);
    };

    Eigen::MatrixXd rec;
    PssPass pass = periodic_solve(d, src_vp, src_vs, period, steps, &rec);

    const int refine =
        params.td > 0.0 ? settings.source_iterations : 0;
    for (int it = 0; it < refine; ++it) {
        const Eigen::VectorXd ip_w = rec.row(3).transpose();
        const Eigen::VectorXd is_w = (-rec.row(7)).transpose();
        Eigen::VectorXd vp_w(steps), vs_w(steps);
        for (int n = 0; n < steps; ++n) {
            const double th = 2.0 * M_PI * n / steps;
            vp_w[n] = src_vp(th);
            vs_w[n] = src_vs(th);
        }

        const detail::CommutationModel cmp =
            detail::primary_commutation_model(params, op.vin);
        const detail::CommutationModel cms =
            detail::secondary_commutation_model(params, op.vout_prime);
        auto wave_p = std::make_shared<detail::BridgeWave>(detail::build_bridge_wave(
            cmp, m.delta_p, 0.0, Leg::P1, Leg::P2,
            [&](double th) { return sample_periodic(ip_w, th); },
            [&](double th) { return sample_periodic(vs_w, th); },
            settings.window_samples));
        auto wave_s = std::make_shared<detail::BridgeWave>(detail::build_bridge_wave(
            cms, m.delta_s, m.phi, Leg::S1, Leg::S2,
            [&](double th) { return sample_periodic(is_w, th); },
            [&](double th) { return sample_periodic(vp_w, th); },
            settings.window_samples));
        src_vp = [wave_p](double th) { return wave_p->value(th); };
        src_vs = [wave_s](double th) { return wave_s->value(th); };

        pass = periodic_solve(d, src_vp, src_vs, period, steps, &rec);
    }

    OracleResult r;
    r.residual = pass.residual;
    r.t.resize(steps);
    r.vp.resize(steps);
    r.vs.resize(steps);
    r.ip.resize(steps);
    r.is.resize(steps);
    r.vm.resize(steps);
    double sp = 0.0, ss = 0.0, qp = 0.0, qs = 0.0;
    for (int n = 0; n < steps; ++n) {
        const double th = 2.0 * M_PI * n / steps;
        r.t[n] = n * period / steps;
        r.vp[n] = src_vp(th);
        r.vs[n] = src_vs(th);
        r.ip[n] = rec(3, n);
        r.is[n] = -rec(7, n);
        r.vm[n] = rec(1, n);
        sp += r.vp[n] * r.ip[n];
        ss += r.vs[n] * r.is[n];
        qp += r.ip[n] * r.ip[n];
        qs += r.is[n] * r.is[n];
    }
    r.pp_ac = sp / steps;
    r.ps_ac = ss / steps;
    r.ip_rms = std::sqrt(qp / steps);
    r.is_rms = std::sqrt(qs / steps);
    return r;
}

}  // namespace dab
