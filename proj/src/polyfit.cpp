#include "dab/polyfit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dab {

namespace {

std::array<double, 4> row_inputs(const SweepRow& r) {
    return {r.ps, r.vout, r.lt, r.rt};
}

double scaled(double x, double lo, double hi) {
    return (x - lo) / (hi - lo);
}

double monomial(const std::array<int, 4>& e, const std::array<double, 4>& x) {
    double v = 1.0;
    for (int d = 0; d < 4; ++d)
        for (int k = 0; k < e[d]; ++k) v *= x[d];
    return v;
}

std::string term_name(const std::array<int, 4>& e) {
    static const char* names[4] = {"Ps", "Vout", "Lt", "Rt"};
    std::ostringstream os;
    bool any = false;
    for (int d = 0; d < 4; ++d) {
        if (e[d] == 0) continue;
        if (any) os << "*";
        os << names[d];
        if (e[d] > 1) os << "^" << e[d];
        any = true;
    }
    return any ? os.str() : "1";
}

}  // namespace

std::vector<std::array<int, 4>> poly4_basis(int degree) {
    std::vector<std::array<int, 4>> basis;
    for (int total = 0; total <= degree; ++total)
        for (int i = total; i >= 0; --i)
            for (int j = total - i; j >= 0; --j)
                for (int k = total - i - j; k >= 0; --k)
                    basis.push_back({i, j, k, total - i - j - k});
    return basis;
}

PolySurface fit_poly4(const std::vector<SweepRow>& rows, const std::string& target,
                      int degree) {
    const bool want_dp = target == "delta_p";
    if (!want_dp && target != "delta_s")
        throw std::invalid_argument("fit target must be delta_p or delta_s");

    std::vector<const SweepRow*> use;
    for (const SweepRow& r : rows)
        if (r.feasible) use.push_back(&r);
    const auto basis = poly4_basis(degree);
    const int t = static_cast<int>(basis.size());
    const int n = static_cast<int>(use.size());
    if (n < t)
        throw std::invalid_argument("need at least as many feasible rows as basis terms");

    PolySurface s;
    s.target = target;
    s.in_lo.fill(std::numeric_limits<double>::infinity());
    s.in_hi.fill(-std::numeric_limits<double>::infinity());
    for (const SweepRow* r : use) {
        const auto x = row_inputs(*r);
        for (int d = 0; d < 4; ++d) {
            s.in_lo[d] = std::min(s.in_lo[d], x[d]);
            s.in_hi[d] = std::max(s.in_hi[d], x[d]);
        }
    }
    for (int d = 0; d < 4; ++d)
        if (!(s.in_hi[d] > s.in_lo[d])) s.in_hi[d] = s.in_lo[d] + 1.0;

    Eigen::MatrixXd a(n, t);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        auto x = row_inputs(*use[i]);
        for (int d = 0; d < 4; ++d) x[d] = scaled(x[d], s.in_lo[d], s.in_hi[d]);
        for (int c = 0; c < t; ++c) a(i, c) = monomial(basis[c], x);
        y(i) = want_dp ? use[i]->delta_p : use[i]->delta_s;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = 1e-10 * svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > cutoff) ++rank;
    if (rank < t) {
        std::ostringstream os;
        os << "design matrix rank " << rank << " < " << t
           << "; deficient directions:";
        for (int i = rank; i < t && i < rank + 4; ++i) {
            Eigen::Index worst;
            svd.matrixV().col(i).cwiseAbs().maxCoeff(&worst);
            os << " " << term_name(basis[worst]);
        }
        throw std::runtime_error(os.str());
    }
    svd.setThreshold(1e-10);
    const Eigen::VectorXd coeff = svd.solve(y);

    s.terms.resize(t);
    for (int c = 0; c < t; ++c) {
        s.terms[c].expo = basis[c];
        s.terms[c].coeff = coeff(c);
    }

    const Eigen::VectorXd res = a * coeff - y;
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    s.error_variance = ss_tot > 1e-30 ? res.squaredNorm() / ss_tot : 0.0;
    s.max_abs_error = res.cwiseAbs().maxCoeff();
    return s;
}

double eval_poly4(const PolySurface& s, double ps_out, double vout, double lt,
                  double rt, bool* flagged_out_of_range) {
    const std::array<double, 4> raw{ps_out, vout, lt, rt};
    std::array<double, 4> x{};
    bool flag = false;
    for (int d = 0; d < 4; ++d) {
        x[d] = scaled(raw[d], s.in_lo[d], s.in_hi[d]);
        if (x[d] < -0.1 || x[d] > 1.1) flag = true;
    }
    if (flagged_out_of_range) *flagged_out_of_range = flag;
    double v = 0.0;
    for (const auto& term : s.terms) v += term.coeff * monomial(term.expo, x);
    return std::clamp(v, 0.0, M_PI / 2.0);
}

FitQuality fit_quality(const PolySurface& sp, const PolySurface& ss,
                       const std::vector<SweepRow>& rows,
                       const CircuitParams& base, const SolveSettings& solve) {
    FitQuality q;
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    int n = 0;
    for (const SweepRow& r : rows)
        if (r.feasible) {
            mean += r.delta_p + r.delta_s;
            n += 2;
        }
    if (n == 0) throw std::invalid_argument("no feasible rows");
    mean /= n;

    double penalty = 0.0;
    int penalty_n = 0;
    for (const SweepRow& r : rows) {
        if (!r.feasible) continue;
        const double dp_fit = eval_poly4(sp, r.ps, r.vout, r.lt, r.rt);
        const double ds_fit = eval_poly4(ss, r.ps, r.vout, r.lt, r.rt);
        ss_res += (dp_fit - r.delta_p) * (dp_fit - r.delta_p) +
                  (ds_fit - r.delta_s) * (ds_fit - r.delta_s);
        ss_tot += (r.delta_p - mean) * (r.delta_p - mean) +
                  (r.delta_s - mean) * (r.delta_s - mean);
        q.max_abs_error = std::max({q.max_abs_error, std::abs(dp_fit - r.delta_p),
                                    std::abs(ds_fit - r.delta_s)});

        CircuitParams p = base;
        p.lp = r.lp;
        p.ls_prime = r.ls_prime;
        p.rp.fundamental = r.rl_p;
        p.rs.fundamental = r.rl_s;
        const OperatingPoint op{base.vin_nominal, r.vout, r.ps};
        try {
            auto eta_at = [&](double dp, double ds) {
                const auto phi = solve_phi_for_power(p, op, dp, ds, solve);
                if (!phi) throw std::runtime_error("unreachable");
                return evaluate_modulation(p, op, {dp, ds, *phi}, solve)
                    .balance.efficiency;
            };
            penalty += eta_at(r.delta_p, r.delta_s) - eta_at(dp_fit, ds_fit);
            ++penalty_n;
        } catch (const std::exception&) {
            // Row dropped from the penalty average, not from the residuals.
        }
    }
    q.error_variance = ss_tot > 1e-30 ? ss_res / ss_tot : 0.0;
    q.efficiency_penalty = penalty_n > 0 ? penalty / penalty_n : 0.0;
    return q;
}

void save_surface(const std::string& path, const PolySurface& s) {
    nlohmann::json j;
    j["format"] = "duty-surface";
    j["version"] = 1;
    j["target"] = s.target;
    j["inputs"] = {"Ps_out", "Vout_prime", "Lt", "Rt"};
    j["in_lo"] = s.in_lo;
    j["in_hi"] = s.in_hi;
    j["error_variance"] = s.error_variance;
    j["max_abs_error"] = s.max_abs_error;
    for (const auto& t : s.terms)
        j["terms"].push_back({{"e", t.expo}, {"c", t.coeff}});
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

PolySurface load_surface(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    f >> j;
    if (j.value("format", "") != "duty-surface")
        throw std::runtime_error(path + ": not a duty-surface file");
    PolySurface s;
    s.target = j.at("target");
    s.in_lo = j.at("in_lo");
    s.in_hi = j.at("in_hi");
    s.error_variance = j.value("error_variance", 0.0);
    s.max_abs_error = j.value("max_abs_error", 0.0);
    for (const auto& t : j.at("terms")) {
        PolySurface::Term term;
        term.expo = t.at("e");
        term.coeff = t.at("c");
        s.terms.push_back(term);
    }
    return s;
}

}  // namespace dab
