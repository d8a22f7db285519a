#include "gicsel/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "gicsel/errors.hpp"

namespace gicsel {

LossSpec LossSpec::huber(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("huber delta must be positive");
    return {LossKind::huber, delta};
}

std::optional<double> LossSpec::lipschitz() const {
    switch (kind) {
    case LossKind::logistic: return 1.0;
    case LossKind::huber: return delta;
    case LossKind::quadratic: return std::nullopt;
    }
    return std::nullopt;
}

double LossSpec::curvature_bound() const {
    switch (kind) {
    case LossKind::logistic: return 0.25;
    case LossKind::quadratic: return 1.0;
    case LossKind::huber: return 1.0;
    }
    return 1.0;
}

std::string LossSpec::name() const {
    switch (kind) {
    case LossKind::logistic: return "logistic";
    case LossKind::quadratic: return "quadratic";
    case LossKind::huber: return "huber";
    }
    return "?";
}

LossSpec loss_from_name(const std::string& name, double huber_delta) {
    if (name == "logistic") return LossSpec::logistic();
    if (name == "quadratic") return LossSpec::quadratic();
    if (name == "huber") return LossSpec::huber(huber_delta);
    throw std::invalid_argument("unknown loss: " + name);
}

namespace {

inline void check_inputs(double s, double y) {
    if (std::isnan(s)) throw std::invalid_argument("NaN linear predictor");
    if (!(y == 0.0 || y == 1.0)) throw std::invalid_argument("response must be 0 or 1");
}

// log(1 + exp(m)) with the linear asymptote for large m; the dropped term
// exp(-30) is below every tolerance in use.
inline double log1pexp(double m) {
    if (m > 30.0) return m;
    return std::log1p(std::exp(m));
}

} // namespace

double loss_value(const LossSpec& spec, double s, double y) {
    check_inputs(s, y);
    switch (spec.kind) {
    case LossKind::logistic:
        return log1pexp(-s * (2.0 * y - 1.0));
    case LossKind::quadratic: {
        const double r = y - s;
        return 0.5 * r * r;
    }
    case LossKind::huber: {
        const double t = std::abs(y - s);
        if (t <= spec.delta) return 0.5 * t * t;
        return spec.delta * t - 0.5 * spec.delta * spec.delta;
    }
    }
    throw std::logic_error("unreachable");
}

double loss_derivative(const LossSpec& spec, double s, double y) {
    check_inputs(s, y);
    switch (spec.kind) {
    case LossKind::logistic: {
        const double u = s * (2.0 * y - 1.0);
        if (u > 30.0) return -(2.0 * y - 1.0) * std::exp(-u);
        return -(2.0 * y - 1.0) / (1.0 + std::exp(u));
    }
    case LossKind::quadratic:
        return s - y;
    case LossKind::huber: {
        const double t = y - s;
        if (t > spec.delta) return -spec.delta;
        if (t < -spec.delta) return spec.delta;
        return -t;
    }
    }
    throw std::logic_error("unreachable");
}

double empirical_risk_on(const LossSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         double intercept, const Eigen::VectorXd& coefs) {
    if (coefs.size() != x.cols()) throw std::invalid_argument("coefficient length mismatch");
    if (y.size() != x.rows()) throw std::invalid_argument("response length mismatch");
    Eigen::VectorXd s = (x * coefs).array() + intercept;
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) total += loss_value(spec, s[i], y[i]);
    return total / static_cast<double>(y.size());
}

double empirical_risk(const LossSpec& spec, const Dataset& d, double intercept,
                      const Eigen::VectorXd& coefs) {
    return empirical_risk_on(spec, d.x(), d.y(), intercept, coefs);
}

} // namespace gicsel
