#include "dab/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#ifdef DAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace dab {

namespace {

std::array<double, 10> raw_row(const Sample& s) {
    return {s.vin, s.vout, s.iin, s.iout, s.ploss, s.delta_p, s.delta_s, s.phi,
            s.lt, s.rt};
}

double norm01(double y, double lo, double hi) { return (y - lo) / (hi - lo); }

}  // namespace

std::array<double, 10> Dataset::normalized_row(int i) const {
    auto r = raw_row(samples[i]);
    for (int c = 0; c < 10; ++c) r[c] = norm01(r[c], col_lo[c], col_hi[c]);
    return r;
}

double Dataset::denorm_label(int label, double y) const {
    const int c = 8 + label;
    return col_lo[c] + y * (col_hi[c] - col_lo[c]);
}

Dataset generate_synthetic_dataset(const CircuitParams& base, int n,
                                   const GenRanges& ranges, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("sample count must be positive");
    Dataset ds;
    ds.samples.resize(n);
    std::vector<bool> ok(n, false);

    auto gen_one = [&](int i) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (i + 1));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int attempt = 0; attempt < ranges.max_retries; ++attempt) {
            const double lt = ranges.lt_lo + u(rng) * (ranges.lt_hi - ranges.lt_lo);
            const double rt = ranges.rt_lo + u(rng) * (ranges.rt_hi - ranges.rt_lo);
            const CircuitParams p = scale_to_lumped(base, lt, rt);
            const double vout =
                ranges.vout_lo + u(rng) * (ranges.vout_hi - ranges.vout_lo);
            const double ps = ranges.ps_lo + u(rng) * (ranges.ps_hi - ranges.ps_lo);
            const OperatingPoint op{base.vin_nominal, vout, ps};
            const bool use_opt = u(rng) < ranges.optimal_fraction;
            const double dp = u(rng) * ranges.duty_hi;
            const double dsd = u(rng) * ranges.duty_hi;

            try {
                ModulationPoint m;
                if (use_opt) {
                    OptimizerSettings os;
                    os.seed = seed ^ (std::uint64_t)i;
                    os.n_starts = 3;
                    os.solve = ranges.solve;
                    m = optimize_tps(p, op, os).x;
                } else {
                    const auto phi = solve_phi_for_power(p, op, dp, dsd, ranges.solve);
                    if (!phi) continue;
                    m = {dp, dsd, *phi};
                }
                const PointEval e = evaluate_modulation(p, op, m, ranges.solve);
                const LumpedParams lump = lumped_params(p);
                Sample& s = ds.samples[i];
                s.vin = op.vin;
                s.vout = vout / p.turns_ratio;
                s.iin = e.balance.pp_in / s.vin;
                s.iout = e.balance.ps_out / s.vout;
                s.ploss = e.balance.pp_in - e.balance.ps_out;
                s.delta_p = m.delta_p;
                s.delta_s = m.delta_s;
                s.phi = m.phi;
                s.lt = lump.lt;
                s.rt = lump.rt;
                s.measured = false;
                ok[i] = true;
                return;
            } catch (const std::exception&) {
                continue;
            }
        }
    };

#ifdef DAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i) gen_one(i);

    for (int i = 0; i < n; ++i)
        if (!ok[i])
            throw std::runtime_error("sample generation exhausted retries; "
                                     "check the requested ranges");
    return ds;
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "Vin,Vout,Iin,Iout,Ploss,delta_p,delta_s,phi,Lt,Rt,measured\n";
    char buf[512];
    for (const Sample& s : ds.samples) {
        std::snprintf(buf, sizeof buf,
                      "%.9e,%.9e,%.9e,%.9e,%.9e,%.12e,%.12e,%.12e,%.12e,%.12e,%d\n",
                      s.vin, s.vout, s.iin, s.iout, s.ploss, s.delta_p, s.delta_s,
                      s.phi, s.lt, s.rt, s.measured ? 1 : 0);
        f << buf;
    }
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
    Dataset ds;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        Sample s;
        int meas = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d",
                        &s.vin, &s.vout, &s.iin, &s.iout, &s.ploss, &s.delta_p,
                        &s.delta_s, &s.phi, &s.lt, &s.rt, &meas) != 11)
            throw std::runtime_error(path + ": malformed row: " + line);
        s.measured = meas != 0;
        ds.samples.push_back(s);
    }
    return ds;
}

Eigen::MatrixXd prepare_dataset(Dataset& ds, std::uint64_t seed) {
    const int n = static_cast<int>(ds.samples.size());
    if (n < 10) throw std::invalid_argument("dataset too small to split");

    for (int c = 0; c < 10; ++c) {
        ds.col_lo[c] = std::numeric_limits<double>::infinity();
        ds.col_hi[c] = -std::numeric_limits<double>::infinity();
    }
    for (const Sample& s : ds.samples) {
        const auto r = raw_row(s);
        for (int c = 0; c < 10; ++c) {
            ds.col_lo[c] = std::min(ds.col_lo[c], r[c]);
            ds.col_hi[c] = std::max(ds.col_hi[c], r[c]);
        }
    }
    static const char* col_names[10] = {"Vin", "Vout", "Iin", "Iout", "Ploss",
                                        "delta_p", "delta_s", "phi", "Lt", "Rt"};
    for (int c = 0; c < 10; ++c) {
        if (ds.col_hi[c] > ds.col_lo[c]) continue;
        // Labels must vary to be learnable; inputs held constant by design
        // (e.g. a fixed Vin) normalize to zero with a unit span.
        if (c >= 8)
            throw std::runtime_error(std::string("degenerate column ") +
                                     col_names[c] + ": min equals max");
        ds.col_hi[c] = ds.col_lo[c] + 1.0;
    }

    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const int n_train = static_cast<int>(std::lround(0.7 * n));
    const int n_val = static_cast<int>(std::lround(0.2 * n));
    ds.train_idx.assign(idx.begin(), idx.begin() + n_train);
    ds.val_idx.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    ds.test_idx.assign(idx.begin() + n_train + n_val, idx.end());
    ds.prepared = true;

    // Pearson correlations over the raw columns.
    Eigen::MatrixXd cols(n, 10);
    for (int i = 0; i < n; ++i) {
        const auto r = raw_row(ds.samples[i]);
        for (int c = 0; c < 10; ++c) cols(i, c) = r[c];
    }
    const Eigen::RowVectorXd mean = cols.colwise().mean();
    cols.rowwise() -= mean;
    const Eigen::VectorXd sd = cols.colwise().norm();
    Eigen::MatrixXd corr(10, 10);
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
            if (a == b) {
                corr(a, b) = 1.0;
            } else if (sd(a) == 0.0 || sd(b) == 0.0) {
                corr(a, b) = 0.0;  // constant column: correlation undefined
            } else {
                corr(a, b) = cols.col(a).dot(cols.col(b)) / (sd(a) * sd(b));
            }
        }
    return corr;
}

MlpModel MlpModel::init(int inputs, int hidden, int outputs, std::uint64_t seed) {
    MlpModel m;
    std::mt19937_64 rng(seed);
    auto layer = [&](int rows, int cols) {
        std::normal_distribution<double> g(0.0, std::sqrt(2.0 / cols));
        Eigen::MatrixXd w(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = g(rng);
        return w;
    };
    m.w = {layer(hidden, inputs), layer(hidden, hidden), layer(outputs, hidden)};
    m.b = {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden),
           Eigen::VectorXd::Zero(outputs)};
    return m;
}

Eigen::Vector2d mlp_forward(const MlpModel& m, const Eigen::VectorXd& x) {
    Eigen::VectorXd a = (m.w[0] * x + m.b[0]).cwiseMax(0.0);
    a = (m.w[1] * a + m.b[1]).cwiseMax(0.0);
    return m.w[2] * a + m.b[2];
}

double custom_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels,
                   const Eigen::MatrixXd& physics_powers,
                   const Eigen::MatrixXd& measured_powers, double lambda,
                   double rated_power) {
    const double b = static_cast<double>(pred.cols());
    const double data = (pred - labels).array().square().sum() / b;
    const double phys =
        ((physics_powers - measured_powers) / rated_power).array().square().sum() / b;
    return data + lambda * phys;
}

namespace {

struct BatchCache {
    Eigen::MatrixXd x, a1, a2, out;
    Eigen::MatrixXd m1, m2;  // dropout masks (already inverse-scaled)
};

void forward_batch(const MlpModel& m, BatchCache& c, bool training,
                   std::mt19937_64* rng) {
    c.a1 = ((m.w[0] * c.x).colwise() + m.b[0]).cwiseMax(0.0);
    if (training && m.dropout > 0.0) {
        std::bernoulli_distribution keep(1.0 - m.dropout);
        c.m1.resize(c.a1.rows(), c.a1.cols());
        for (int j = 0; j < c.m1.cols(); ++j)
            for (int i = 0; i < c.m1.rows(); ++i)
                c.m1(i, j) = keep(*rng) ? 1.0 / (1.0 - m.dropout) : 0.0;
        c.a1.array() *= c.m1.array();
    }
    c.a2 = ((m.w[1] * c.a1).colwise() + m.b[1]).cwiseMax(0.0);
    if (training && m.dropout > 0.0) {
        std::bernoulli_distribution keep(1.0 - m.dropout);
        c.m2.resize(c.a2.rows(), c.a2.cols());
        for (int j = 0; j < c.m2.cols(); ++j)
            for (int i = 0; i < c.m2.rows(); ++i)
                c.m2(i, j) = keep(*rng) ? 1.0 / (1.0 - m.dropout) : 0.0;
        c.a2.array() *= c.m2.array();
    }
    c.out = (m.w[2] * c.a2).colwise() + m.b[2];
}

struct Grads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

// Backpropagates dL/d(out) through the cached batch; adds the L2 term.
Grads backward_batch(const MlpModel& m, const BatchCache& c,
                     const Eigen::MatrixXd& dout) {
    Grads g;
    g.w.resize(3);
    g.b.resize(3);
    g.w[2] = dout * c.a2.transpose() + m.l2 * m.w[2];
    g.b[2] = dout.rowwise().sum();

    Eigen::MatrixXd d2 = m.w[2].transpose() * dout;
    if (c.m2.size() > 0) d2.array() *= c.m2.array();
    d2 = (c.a2.array() > 0.0).cast<double>() * d2.array();
    g.w[1] = d2 * c.a1.transpose() + m.l2 * m.w[1];
    g.b[1] = d2.rowwise().sum();

    Eigen::MatrixXd d1 = m.w[1].transpose() * d2;
    if (c.m1.size() > 0) d1.array() *= c.m1.array();
    d1 = (c.a1.array() > 0.0).cast<double>() * d1.array();
    g.w[0] = d1 * c.x.transpose() + m.l2 * m.w[0];
    g.b[0] = d1.rowwise().sum();
    return g;
}

struct Adam {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    long long t = 0;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    explicit Adam(const MlpModel& m) {
        for (int l = 0; l < 3; ++l) {
            mw.push_back(Eigen::MatrixXd::Zero(m.w[l].rows(), m.w[l].cols()));
            vw.push_back(Eigen::MatrixXd::Zero(m.w[l].rows(), m.w[l].cols()));
            mb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
            vb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
        }
    }
    void step(MlpModel& m, const Grads& g, double lr) {
        ++t;
        const double c1 = 1.0 - std::pow(b1, (double)t);
        const double c2 = 1.0 - std::pow(b2, (double)t);
        for (int l = 0; l < 3; ++l) {
            mw[l] = b1 * mw[l] + (1.0 - b1) * g.w[l];
            vw[l] = b2 * vw[l] + (1.0 - b2) * g.w[l].array().square().matrix();
            m.w[l].array() -= lr * (mw[l].array() / c1) /
                              ((vw[l].array() / c2).sqrt() + eps);
            mb[l] = b1 * mb[l] + (1.0 - b1) * g.b[l];
            vb[l] = b2 * vb[l] + (1.0 - b2) * g.b[l].array().square().matrix();
            m.b[l].array() -= lr * (mb[l].array() / c1) /
                              ((vb[l].array() / c2).sqrt() + eps);
        }
    }
};

// Terminal powers of the circuit model at one sample's operating point with
// the given lumped parameters. Returns false when the solve is inadmissible.
bool physics_powers(const CircuitParams& base, const Sample& s, double lt, double rt,
                    const SolveSettings& ss, double& pp_in, double& ps_out) {
    try {
        const CircuitParams p = scale_to_lumped(base, lt, rt);
        const OperatingPoint op{s.vin, s.vout * base.turns_ratio, 0.0};
        const ModulationPoint m{s.delta_p, s.delta_s, s.phi};
        const SteadyStateSolution sol = solve_steady_state(p, op, m, ss);
        const LossBreakdown b = loss_breakdown(p, op, sol);
        pp_in = sol.pp_ac + b.p_sw_primary;
        ps_out = std::abs(sol.ps_ac) - b.p_core - b.p_sw_secondary;
        return std::isfinite(pp_in) && std::isfinite(ps_out);
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

LayerGrads data_gradients(const MlpModel& m, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y) {
    if (x.cols() != y.cols())
        throw std::invalid_argument("input and label batch sizes differ");
    BatchCache c;
    c.x = x;
    forward_batch(m, c, false, nullptr);
    const Eigen::MatrixXd dout = 2.0 * (c.out - y) / x.cols();
    const Grads g = backward_batch(m, c, dout);
    return {g.w, g.b};
}

TrainResult train(const Dataset& ds, const CircuitParams& base, const TrainConfig& cfg) {
    if (!ds.prepared) throw std::invalid_argument("dataset is not prepared");
    TrainResult out;
    out.model = MlpModel::init(Sample::kInputs, 64, Sample::kLabels, cfg.seed);
    MlpModel& model = out.model;
    model.dropout = cfg.dropout;
    model.l2 = cfg.l2;
    Adam adam(model);
    std::mt19937_64 rng(cfg.seed ^ 0xdab);

    const double lt_span = ds.col_hi[8] - ds.col_lo[8];
    const double rt_span = ds.col_hi[9] - ds.col_lo[9];
    const double lt_min = std::max(0.25 * ds.col_lo[8], 1e-7);
    const double lt_max = 2.0 * ds.col_hi[8];
    const double rt_min = std::max(0.25 * ds.col_lo[9], 1e-5);
    const double rt_max = 2.0 * ds.col_hi[9];
    const double rated = base.rated_power;

    std::vector<int> order = ds.train_idx;
    MlpModel best = model;
    double best_val = std::numeric_limits<double>::infinity();

    auto data_mse = [&](const std::vector<int>& idx) {
        double acc = 0.0;
        for (int i : idx) {
            const auto r = ds.normalized_row(i);
            Eigen::VectorXd x(8);
            for (int c = 0; c < 8; ++c) x(c) = r[c];
            const Eigen::Vector2d p = mlp_forward(model, x);
            acc += (p(0) - r[8]) * (p(0) - r[8]) + (p(1) - r[9]) * (p(1) - r[9]);
        }
        return acc / idx.size();
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double t = cfg.epochs > 1 ? double(epoch) / (cfg.epochs - 1) : 0.0;
        const double lr = cfg.lr_final + 0.5 * (cfg.learning_rate - cfg.lr_final) *
                                             (1.0 + std::cos(M_PI * t));
        std::shuffle(order.begin(), order.end(), rng);
        double ep_data = 0.0, ep_phys = 0.0;
        int n_batches = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const int bsz =
                static_cast<int>(std::min<std::size_t>(cfg.batch, order.size() - start));
            BatchCache c;
            c.x.resize(8, bsz);
            Eigen::MatrixXd y(2, bsz);
            for (int j = 0; j < bsz; ++j) {
                const auto r = ds.normalized_row(order[start + j]);
                for (int cc = 0; cc < 8; ++cc) c.x(cc, j) = r[cc];
                y(0, j) = r[8];
                y(1, j) = r[9];
            }
            forward_batch(model, c, true, &rng);

            Eigen::MatrixXd dout = 2.0 * (c.out - y) / bsz;
            const double data_loss = (c.out - y).array().square().sum() / bsz;
            double phys_loss = 0.0;

            if (cfg.lambda > 0.0) {
                // Physics term: powers from the circuit model at the
                // denormalized predictions, gradients by central differences
                // chained through the normalization.
                Eigen::MatrixXd dphys = Eigen::MatrixXd::Zero(2, bsz);
                std::vector<double> elem_loss(bsz, 0.0);
                auto phys_elem = [&](int j) {
                    const Sample& s = ds.samples[order[start + j]];
                    const double lt =
                        std::clamp(ds.denorm_label(0, c.out(0, j)), lt_min, lt_max);
                    const double rt =
                        std::clamp(ds.denorm_label(1, c.out(1, j)), rt_min, rt_max);
                    const double pp_meas = s.vin * s.iin;
                    const double ps_meas = s.vout * s.iout;
                    double pp, ps;
                    if (!physics_powers(base, s, lt, rt, cfg.physics_solve, pp, ps))
                        return;
                    const double ep = (pp - pp_meas) / rated;
                    const double es = (ps - ps_meas) / rated;
                    elem_loss[j] = ep * ep + es * es;

                    const double hl = cfg.physics_rel_step * lt;
                    const double hr = cfg.physics_rel_step * rt;
                    double pp_p, ps_p, pp_m, ps_m;
                    if (physics_powers(base, s, lt + hl, rt, cfg.physics_solve, pp_p, ps_p) &&
                        physics_powers(base, s, lt - hl, rt, cfg.physics_solve, pp_m, ps_m)) {
                        const double dpp = (pp_p - pp_m) / (2.0 * hl);
                        const double dps = (ps_p - ps_m) / (2.0 * hl);
                        dphys(0, j) = 2.0 * (ep * dpp + es * dps) / rated * lt_span;
                    }
                    if (physics_powers(base, s, lt, rt + hr, cfg.physics_solve, pp_p, ps_p) &&
                        physics_powers(base, s, lt, rt - hr, cfg.physics_solve, pp_m, ps_m)) {
                        const double dpp = (pp_p - pp_m) / (2.0 * hr);
                        const double dps = (ps_p - ps_m) / (2.0 * hr);
                        dphys(1, j) = 2.0 * (ep * dpp + es * dps) / rated * rt_span;
                    }
                };
                if (cfg.parallel_physics) {
#ifdef DAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
                    for (int j = 0; j < bsz; ++j) phys_elem(j);
                } else {
                    for (int j = 0; j < bsz; ++j) phys_elem(j);
                }
                for (int j = 0; j < bsz; ++j) phys_loss += elem_loss[j];
                phys_loss /= bsz;
                dout += cfg.lambda / bsz * dphys;
            }

            const Grads g = backward_batch(model, c, dout);
            adam.step(model, g, lr);

            ep_data += data_loss;
            ep_phys += phys_loss;
            ++n_batches;
            if (!std::isfinite(data_loss))
                throw std::runtime_error("training diverged: non-finite loss");
        }

        out.history.data_loss.push_back(ep_data / n_batches);
        out.history.physics_loss.push_back(ep_phys / n_batches);
        out.history.train_loss.push_back((ep_data + cfg.lambda * ep_phys) / n_batches);
        const double val = data_mse(ds.val_idx);
        out.history.val_loss.push_back(val);
        if (val < best_val) {
            best_val = val;
            best = model;
            out.history.best_epoch = epoch;
        }
    }
    out.model = best;
    return out;
}

EvalResult evaluate(const MlpModel& m, const Dataset& ds) {
    if (!ds.prepared) throw std::invalid_argument("dataset is not prepared");
    EvalResult r;
    for (int i : ds.test_idx) {
        const auto row = ds.normalized_row(i);
        Eigen::VectorXd x(8);
        for (int c = 0; c < 8; ++c) x(c) = row[c];
        const Eigen::Vector2d p = mlp_forward(m, x);
        const double lt = ds.denorm_label(0, p(0));
        const double rt = ds.denorm_label(1, p(1));
        r.mae_lt_pct += std::abs(lt - ds.samples[i].lt) / ds.samples[i].lt;
        r.mae_rt_pct += std::abs(rt - ds.samples[i].rt) / ds.samples[i].rt;
    }
    r.mae_lt_pct *= 100.0 / ds.test_idx.size();
    r.mae_rt_pct *= 100.0 / ds.test_idx.size();
    return r;
}

LumpedParams estimate(const MlpModel& m, const Dataset& norms, const Sample& s) {
    const auto in = s.inputs();
    Eigen::VectorXd x(8);
    for (int c = 0; c < 8; ++c)
        x(c) = norm01(in[c], norms.col_lo[c], norms.col_hi[c]);
    const Eigen::Vector2d p = mlp_forward(m, x);
    return {norms.denorm_label(0, p(0)), norms.denorm_label(1, p(1))};
}

void save_model(const std::string& path, const MlpModel& m, const Dataset& norms) {
    nlohmann::json j;
    j["format"] = "lumped-estimator";
    j["version"] = 1;
    j["dropout"] = m.dropout;
    j["l2"] = m.l2;
    j["col_lo"] = norms.col_lo;
    j["col_hi"] = norms.col_hi;
    for (int l = 0; l < m.layers(); ++l) {
        nlohmann::json layer;
        layer["rows"] = m.w[l].rows();
        layer["cols"] = m.w[l].cols();
        std::vector<double> w(m.w[l].size());
        for (int r = 0; r < m.w[l].rows(); ++r)
            for (int c = 0; c < m.w[l].cols(); ++c)
                w[r * m.w[l].cols() + c] = m.w[l](r, c);
        layer["w"] = w;
        layer["b"] = std::vector<double>(m.b[l].data(), m.b[l].data() + m.b[l].size());
        j["layers"].push_back(layer);
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << j.dump() << "\n";
}

MlpModel load_model(const std::string& path, Dataset* norms) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    f >> j;
    if (j.value("format", "") != "lumped-estimator")
        throw std::runtime_error(path + ": not a lumped-estimator file");
    MlpModel m;
    m.dropout = j.value("dropout", 0.1);
    m.l2 = j.value("l2", 0.01);
    for (const auto& layer : j.at("layers")) {
        const int rows = layer.at("rows"), cols = layer.at("cols");
        const std::vector<double> w = layer.at("w");
        const std::vector<double> b = layer.at("b");
        Eigen::MatrixXd wm(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) wm(r, c) = w[r * cols + c];
        m.w.push_back(wm);
        m.b.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
    }
    if (norms) {
        norms->col_lo = j.at("col_lo");
        norms->col_hi = j.at("col_hi");
        norms->prepared = true;
    }
    return m;
}

}  // namespace dab
