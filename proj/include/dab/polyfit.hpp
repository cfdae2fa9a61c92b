#pragma once

#include <array>
#include <string>
#include <vector>

#include "dab/optimizer.hpp"

namespace dab {

/// Fourth-order polynomial surfaces of the optimal duties over
/// (Ps_out, V'out, Lt, Rt). Inputs are affinely scaled to [0, 1] before the
/// monomials are formed; the scaling ranges travel with the surface.

struct PolySurface {
    static constexpr int kVars = 4;
    static constexpr int kDegree = 4;
    static constexpr int kTerms = 70;  // multisets of degree <= 4 in 4 variables

    struct Term {
        std::array<int, kVars> expo{};
        double coeff = 0.0;
    };
    std::vector<Term> terms;                      // fixed basis order, kTerms entries
    std::array<double, kVars> in_lo{}, in_hi{};   // scaling ranges (Ps, Vout, Lt, Rt)
    std::string target;                           // "delta_p" or "delta_s"

    // Fit diagnostics on the training rows.
    double error_variance = 0.0;  // residual variance / target variance
    double max_abs_error = 0.0;   // rad
};

/// Basis exponent tuples in a fixed deterministic order.
std::vector<std::array<int, 4>> poly4_basis(int degree = PolySurface::kDegree);

/// Least squares through a rank-revealing factorization (relative singular
/// value cutoff 1e-10); throws std::runtime_error naming deficient
/// directions when the design matrix loses rank.
PolySurface fit_poly4(const std::vector<SweepRow>& rows, const std::string& target,
                      int degree = PolySurface::kDegree);

/// Polynomial value clamped to [0, pi/2]. `flagged_out_of_range`, when given,
/// is set if any input falls outside the fitted range by more than 10%.
double eval_poly4(const PolySurface& s, double ps_out, double vout, double lt,
                  double rt, bool* flagged_out_of_range = nullptr);

struct FitQuality {
    double error_variance = 0.0;       // fraction of target variance unexplained
    double max_abs_error = 0.0;        // rad
    double efficiency_penalty = 0.0;   // mean eta(optimal) - eta(fitted duties)
};

/// Residual statistics plus the model-evaluated efficiency cost of using the
/// fitted duty pair instead of each row's optimal one (phi re-solved for the
/// row's power target in both cases).
FitQuality fit_quality(const PolySurface& sp, const PolySurface& ss,
                       const std::vector<SweepRow>& rows,
                       const CircuitParams& base, const SolveSettings& solve = {});

void save_surface(const std::string& path, const PolySurface& s);
PolySurface load_surface(const std::string& path);

}  // namespace dab
