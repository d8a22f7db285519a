#ifndef GICSEL_SOLVER_HPP
#define GICSEL_SOLVER_HPP

#include <string>
#include <vector>

#include "gicsel/dataset.hpp"
#include "gicsel/loss.hpp"

namespace gicsel {

struct SolverConfig {
    int max_iterations = 10000;  // full coordinate sweeps / Newton steps
    double tolerance = 1e-7;     // relative coefficient-change stop rule
    double kkt_tol = 1e-6;       // optimality certificate threshold
};

/// One penalized (or restricted unpenalized) fit. Coefficients are always
/// full length p; the intercept is kept separate and never penalized.
struct PenalizedFit {
    double lambda = 0.0;
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    double objective = 0.0; // empirical risk + lambda * l1(coefficients)
    bool converged = false;
    int iterations = 0;
    std::string flag; // "" or "separation"

    PredictorSet support() const;
};

struct PathResult {
    std::vector<PenalizedFit> fits; // strictly decreasing lambda
    LossSpec loss;
};

/// Minimizes (1/n) sum rho(b0 + x_i.b, y_i) + lambda*||b||_1 by cyclic
/// coordinate descent on a quadratic majorization. Convergence is certified
/// by the KKT residual, not by the algorithm.
PenalizedFit fit_lasso(const Dataset& d, const LossSpec& spec, double lambda,
                       const SolverConfig& cfg, const PenalizedFit* warm_start = nullptr);

/// Smallest lambda at which the null model (optimal intercept, zero
/// coefficients) is stationary.
double lambda_max(const Dataset& d, const LossSpec& spec);

/// Log-equispaced grid from lmax down to ratio*lmax, length m (m >= 2).
std::vector<double> lambda_grid(double lmax, int m, double ratio);

/// Fits the lambda grid in decreasing order with warm starts. Fits whose
/// support exceeds n observations are dropped. A grid of length one is the
/// degenerate grid {lambda_max}.
PathResult fit_path(const Dataset& d, const LossSpec& spec, int m, double ratio,
                    const SolverConfig& cfg);

/// Unpenalized minimizer over the intercept plus the coordinates in w;
/// everything else pinned at zero. Perfect separation under logistic loss is
/// flagged rather than thrown.
PenalizedFit refit(const Dataset& d, const LossSpec& spec, const PredictorSet& w,
                   const SolverConfig& cfg, const PenalizedFit* warm_start = nullptr);

/// KKT residual of a penalized fit: max over coordinates of the subgradient
/// violation, plus the intercept gradient. <= kkt_tol certifies optimality.
double verify_kkt(const Dataset& d, const LossSpec& spec, const PenalizedFit& fit);

/// Minimizer of (1/n) sum rho(c, y_i) over the scalar c.
/// Throws "degenerate response" for logistic loss with single-class y.
double intercept_only_minimizer(const LossSpec& spec, const Eigen::VectorXd& y);

} // namespace gicsel

#endif
