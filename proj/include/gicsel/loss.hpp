#ifndef GICSEL_LOSS_HPP
#define GICSEL_LOSS_HPP

#include <optional>
#include <string>

#include "gicsel/dataset.hpp"

namespace gicsel {

enum class LossKind { logistic, quadratic, huber };

/// Loss rho(s, y) on the linear predictor s and binary response y,
/// together with its Lipschitz metadata.
struct LossSpec {
    LossKind kind = LossKind::logistic;
    double delta = 0.1; // huber only

    static LossSpec logistic() { return {LossKind::logistic, 0.0}; }
    static LossSpec quadratic() { return {LossKind::quadratic, 0.0}; }
    static LossSpec huber(double delta = 0.1);

    // Global Lipschitz constant of s -> rho(s,y); nullopt means unbounded.
    std::optional<double> lipschitz() const;
    // Upper bound on d^2 rho / ds^2, used by majorization solvers.
    double curvature_bound() const;

    std::string name() const;
};

LossSpec loss_from_name(const std::string& name, double huber_delta = 0.1);

double loss_value(const LossSpec& spec, double s, double y);
double loss_derivative(const LossSpec& spec, double s, double y);

/// (1/n) sum_i rho(intercept + coefs.x_i, y_i).
double empirical_risk(const LossSpec& spec, const Dataset& d, double intercept,
                      const Eigen::VectorXd& coefs);

/// Same, on an arbitrary matrix/response pair (cross-validation folds, theory checks).
double empirical_risk_on(const LossSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         double intercept, const Eigen::VectorXd& coefs);

} // namespace gicsel

#endif
