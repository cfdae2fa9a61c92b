#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dab/optimizer.hpp"

namespace dab {

/// Lumped-parameter estimation: synthetic data generation from the circuit
/// model, a small fully-connected network, and training with a loss that
/// combines label error with a physics-consistency term (terminal powers
/// recomputed through the circuit model at the predicted parameters).

/// One observation. Voltages/currents are physical terminal quantities;
/// the eight inputs feed the network in this declaration order.
struct Sample {
    double vin = 0.0;      // V
    double vout = 0.0;     // V (physical secondary side)
    double iin = 0.0;      // A
    double iout = 0.0;     // A
    double ploss = 0.0;    // W, Vin*Iin - Vout*Iout
    double delta_p = 0.0;  // rad
    double delta_s = 0.0;
    double phi = 0.0;
    double lt = 0.0;       // H, label
    double rt = 0.0;       // ohm, label
    bool measured = false; // provenance: model-generated vs hardware

    static constexpr int kInputs = 8;
    static constexpr int kLabels = 2;
    std::array<double, kInputs> inputs() const {
        return {vin, vout, iin, iout, ploss, delta_p, delta_s, phi};
    }
};

struct Dataset {
    std::vector<Sample> samples;
    // Normalization ranges over all 10 columns (8 inputs then Lt, Rt),
    // computed on the full set.
    std::array<double, 10> col_lo{}, col_hi{};
    std::vector<int> train_idx, val_idx, test_idx;
    bool prepared = false;

    std::array<double, 10> normalized_row(int i) const;
    double denorm_label(int label, double y) const;  // label 0 = Lt, 1 = Rt
};

struct GenRanges {
    // Lumped draw ranges; each sample scales the base circuit to the drawn
    // (Lt, Rt), keeping the nominal element ratios. Only the lumped values
    // govern the terminal behavior, so drawing the split independently would
    // only inject irreducible label noise.
    double lt_lo = 7e-6, lt_hi = 14e-6;             // H, primary-referred
    double rt_lo = 0.04, rt_hi = 0.12;              // ohm, primary-referred
    double vout_lo = 126.0, vout_hi = 182.0;        // V, primary-referred
    // Light-load points carry almost no conduction-loss signal, so Rt recovery
    // degrades sharply if the power draw extends much below ~1 kW.
    double ps_lo = 1200.0, ps_hi = 2000.0;          // W
    double optimal_fraction = 0.0;  // share of rows using optimized duties
    double duty_hi = 0.25 * M_PI;   // upper bound of the random duty draws
    int max_retries = 50;
    // Must match TrainConfig::physics_solve: the physics loss compares its
    // own solves against these synthetic measurements, and any fidelity gap
    // between the two shows up as a bias on the recovered parameters.
    SolveSettings solve{11, 1, 1e-3, 24};
};

/// Deterministic for a fixed seed. Draws circuit parameters and operating
/// points from the ranges, picks a random admissible modulation meeting the
/// drawn power (or a loss-optimal one for the configured fraction), solves
/// the circuit model, and records terminal dc quantities plus lumped labels.
Dataset generate_synthetic_dataset(const CircuitParams& base, int n,
                                   const GenRanges& ranges, std::uint64_t seed);

void write_dataset_csv(const std::string& path, const Dataset& ds);
Dataset read_dataset_csv(const std::string& path);

/// Normalization ranges, seeded 70/20/10 split, and the Pearson correlation
/// matrix over the 10 columns (inputs + labels).
Eigen::MatrixXd prepare_dataset(Dataset& ds, std::uint64_t seed);

struct MlpModel {
    // input -> 64 -> 64 -> 2, rectifier on hidden layers, identity output.
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    double dropout = 0.1;  // training only
    double l2 = 0.01;

    static MlpModel init(int inputs, int hidden, int outputs, std::uint64_t seed);
    int layers() const { return static_cast<int>(w.size()); }
};

/// Inference pass (no dropout).
Eigen::Vector2d mlp_forward(const MlpModel& m, const Eigen::VectorXd& x);

struct TrainConfig {
    double learning_rate = 0.001;
    double lr_final = 1e-5;  // cosine-annealed floor over the epoch budget
    int batch = 64;
    int epochs = 230;
    double lambda = 0.8;          // physics-loss weight
    std::uint64_t seed = 1;
    double dropout = 0.1;         // hidden-layer dropout during training
    double l2 = 1e-4;             // weight decay
    double physics_rel_step = 1e-4;  // central-difference step on (Lt, Rt)
    SolveSettings physics_solve{11, 1, 1e-3, 24};
    bool parallel_physics = true;
};

struct TrainHistory {
    std::vector<double> train_loss, val_loss;
    std::vector<double> data_loss, physics_loss;  // train split components
    int best_epoch = -1;
};

struct TrainResult {
    MlpModel model;  // best-validation snapshot
    TrainHistory history;
};

/// Adaptive-moment gradient descent on the combined loss. Data gradients by
/// backpropagation; physics gradients by chaining central finite differences
/// of the model powers through the denormalized (Lt, Rt) predictions.
/// Throws std::runtime_error on divergence (non-finite loss).
TrainResult train(const Dataset& ds, const CircuitParams& base, const TrainConfig& cfg);

struct LayerGrads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

/// Backpropagation gradients (no dropout) of the batch objective
/// mean_j |out_j - y_j|^2 + (l2/2) * sum |W|^2 over columns of x/y.
/// Exposed for gradient verification and diagnostics.
LayerGrads data_gradients(const MlpModel& m, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y);

/// Combined batch loss for inspection/testing: data MSE on normalized labels
/// plus lambda times the power-mismatch MSE (powers normalized to rated).
double custom_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels,
                   const Eigen::MatrixXd& physics_powers,
                   const Eigen::MatrixXd& measured_powers, double lambda,
                   double rated_power);

struct EvalResult {
    double mae_lt_pct = 0.0;
    double mae_rt_pct = 0.0;
};

/// Mean absolute relative error on the test split, after denormalization.
EvalResult evaluate(const MlpModel& m, const Dataset& ds);

/// Estimate (Lt, Rt) for one raw sample through a trained model.
LumpedParams estimate(const MlpModel& m, const Dataset& norms, const Sample& s);

void save_model(const std::string& path, const MlpModel& m, const Dataset& norms);
MlpModel load_model(const std::string& path, Dataset* norms = nullptr);

}  // namespace dab
