#ifndef GICSEL_POPULATION_HPP
#define GICSEL_POPULATION_HPP

#include <vector>

#include "gicsel/dataset.hpp"
#include "gicsel/loss.hpp"

namespace gicsel {

/// Gauss-Hermite rule rewritten for standard-normal expectations:
/// E f(Z) ~= sum_i weights[i] * f(nodes[i]), weights summing to one.
class GaussHermite {
public:
    explicit GaussHermite(int order);
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    int order() const { return static_cast<int>(nodes_.size()); }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

enum class SimModel { m1, m2 };

/// Population distribution of the simulated designs: AR(1) Gaussian
/// predictors and P(Y=1|x) = sigmoid(t^3) with t the sum of the first
/// min(2,p) coordinates (for the polynomial design, of the two base
/// coordinates). Evaluates the population risk and its minimizers exactly
/// via low-dimensional quadrature.
class PopulationModel {
public:
    // m1 requires p == 9 (all columns are then functions of the two base
    // Gaussian coordinates); m2 accepts any p >= 1.
    PopulationModel(SimModel model, int p, double rho, LossSpec loss, int quad_order = 60);

    int p() const { return p_; }
    const LossSpec& loss() const { return loss_; }

    double risk(double intercept, const Eigen::VectorXd& coefs) const;
    double risk_no_intercept(const Eigen::VectorXd& coefs) const { return risk(0.0, coefs); }

    /// Newton minimization of the population risk restricted to `support`
    /// (plus an intercept when requested). Returns (intercept, full-length
    /// coefficient vector). Throws numeric_error if the quadrature gradient
    /// at the reported minimizer exceeds 1e-8.
    std::pair<double, Eigen::VectorXd> minimize(const PredictorSet& support,
                                                bool with_intercept) const;

    /// Hessian of the population risk at b (p x p). For m2 the point must be
    /// proportional to (1,1,0,...,0) or have an exactly representable joint
    /// law with t; general points are handled through conditioning on
    /// (t, b.x).
    Eigen::MatrixXd hessian(const Eigen::VectorXd& b) const;

    /// Covariance matrix of the predictors (AR(1) for m2; moment-exact for m1).
    Eigen::MatrixXd predictor_covariance() const;

private:
    SimModel model_;
    int p_;
    double rho_;
    LossSpec loss_;
    GaussHermite gh_;

    double risk_m1(double b0, const Eigen::VectorXd& b) const;
    double risk_m2(double b0, const Eigen::VectorXd& b) const;
};

} // namespace gicsel

#endif
