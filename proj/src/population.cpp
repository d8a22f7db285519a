#include "gicsel/population.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gicsel/errors.hpp"

namespace gicsel {

namespace {

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

// q(t) rho''(s,1) + (1-q(t)) rho''(s,0) and friends, with q(t) = sigmoid(t^3)
inline double response_prob(double t) { return sigmoid(t * t * t); }

// second derivative in s; exists a.e. for huber
double loss_second_derivative(const LossSpec& spec, double s, double y) {
    switch (spec.kind) {
    case LossKind::logistic: {
        const double u = std::abs(s);
        if (u > 36.0) return std::exp(-u);
        const double e = std::exp(-u);
        const double sig = 1.0 / (1.0 + e);
        return sig * (1.0 - sig);
    }
    case LossKind::quadratic:
        return 1.0;
    case LossKind::huber:
        return std::abs(y - s) <= spec.delta ? 1.0 : 0.0;
    }
    throw std::logic_error("unreachable");
}

inline double mixed_loss(const LossSpec& loss, double t, double s) {
    const double q = response_prob(t);
    return q * loss_value(loss, s, 1.0) + (1.0 - q) * loss_value(loss, s, 0.0);
}

inline double mixed_derivative(const LossSpec& loss, double t, double s) {
    const double q = response_prob(t);
    return q * loss_derivative(loss, s, 1.0) + (1.0 - q) * loss_derivative(loss, s, 0.0);
}

inline double mixed_second(const LossSpec& loss, double t, double s) {
    const double q = response_prob(t);
    return q * loss_second_derivative(loss, s, 1.0) +
           (1.0 - q) * loss_second_derivative(loss, s, 0.0);
}

// The nine polynomial-design features as functions of the base pair.
void m1_features(double z1, double z2, Eigen::Ref<Eigen::VectorXd> x) {
    x[0] = z1;
    x[1] = z2;
    x[2] = z1 * z1;
    x[3] = z2 * z2;
    x[4] = z1 * z2;
    x[5] = z1 * z1 * z2;
    x[6] = z1 * z2 * z2;
    x[7] = z1 * z1 * z1;
    x[8] = z2 * z2 * z2;
}

Eigen::MatrixXd ar1_covariance(int p, double rho) {
    Eigen::MatrixXd sigma(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
    return sigma;
}

} // namespace

GaussHermite::GaussHermite(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be positive");
    // Golub-Welsch on the Hermite Jacobi matrix; nodes/weights rewritten for
    // expectations against the standard normal density.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double off = std::sqrt(static_cast<double>(k) / 2.0);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) throw numeric_error("Hermite eigendecomposition failed");
    nodes_.resize(static_cast<std::size_t>(order));
    weights_.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        nodes_[static_cast<std::size_t>(i)] = std::sqrt(2.0) * eig.eigenvalues()[i];
        const double v0 = eig.eigenvectors()(0, i);
        weights_[static_cast<std::size_t>(i)] = v0 * v0;
    }
}

PopulationModel::PopulationModel(SimModel model, int p, double rho, LossSpec loss, int quad_order)
    : model_(model), p_(p), rho_(rho), loss_(loss), gh_(quad_order) {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("|rho| must be < 1");
    if (model_ == SimModel::m1 && p_ != 9)
        throw std::invalid_argument("population model for the polynomial design requires p == 9");
    if (model_ == SimModel::m2 && p_ < 1) throw std::invalid_argument("p must be >= 1");
}

double PopulationModel::risk_m1(double b0, const Eigen::VectorXd& b) const {
    const int order = gh_.order();
    const double rc = std::sqrt(1.0 - rho_ * rho_);
    Eigen::VectorXd x(9);
    double total = 0.0;
    for (int i = 0; i < order; ++i) {
        const double u1 = gh_.nodes()[static_cast<std::size_t>(i)];
        const double w1 = gh_.weights()[static_cast<std::size_t>(i)];
        for (int j = 0; j < order; ++j) {
            const double u2 = gh_.nodes()[static_cast<std::size_t>(j)];
            const double w = w1 * gh_.weights()[static_cast<std::size_t>(j)];
            const double z1 = u1;
            const double z2 = rho_ * u1 + rc * u2;
            m1_features(z1, z2, x);
            total += w * mixed_loss(loss_, z1 + z2, b0 + b.dot(x));
        }
    }
    return total;
}

double PopulationModel::risk_m2(double b0, const Eigen::VectorXd& b) const {
    // The integrand depends on x only through t = x_1 (+ x_2) and v = b.x,
    // which are jointly Gaussian; two quadrature dimensions always suffice.
    const Eigen::MatrixXd sigma = ar1_covariance(p_, rho_);
    Eigen::VectorXd e12 = Eigen::VectorXd::Zero(p_);
    e12[0] = 1.0;
    if (p_ >= 2) e12[1] = 1.0;
    const double var_t = e12.dot(sigma * e12);
    const double cov_tv = b.dot(sigma * e12);
    const double var_v = b.dot(sigma * b);
    const double sd_t = std::sqrt(var_t);
    const double alpha = cov_tv / var_t;
    const double tau2 = std::max(0.0, var_v - cov_tv * cov_tv / var_t);
    const double tau = std::sqrt(tau2);

    const int order = gh_.order();
    double total = 0.0;
    if (tau < 1e-9 * (1.0 + std::sqrt(var_v))) {
        for (int i = 0; i < order; ++i) {
            const double t = sd_t * gh_.nodes()[static_cast<std::size_t>(i)];
            total += gh_.weights()[static_cast<std::size_t>(i)] *
                     mixed_loss(loss_, t, b0 + alpha * t);
        }
        return total;
    }
    for (int i = 0; i < order; ++i) {
        const double t = sd_t * gh_.nodes()[static_cast<std::size_t>(i)];
        const double w1 = gh_.weights()[static_cast<std::size_t>(i)];
        for (int j = 0; j < order; ++j) {
            const double v = alpha * t + tau * gh_.nodes()[static_cast<std::size_t>(j)];
            total += w1 * gh_.weights()[static_cast<std::size_t>(j)] *
                     mixed_loss(loss_, t, b0 + v);
        }
    }
    return total;
}

double PopulationModel::risk(double intercept, const Eigen::VectorXd& coefs) const {
    if (coefs.size() != p_) throw std::invalid_argument("coefficient length mismatch");
    return model_ == SimModel::m1 ? risk_m1(intercept, coefs) : risk_m2(intercept, coefs);
}

std::pair<double, Eigen::VectorXd> PopulationModel::minimize(const PredictorSet& support,
                                                             bool with_intercept) const {
    const int max_feature = model_ == SimModel::m1 ? 9 : std::min(p_, 2);
    for (int j : support.indices())
        if (j > max_feature)
            throw std::invalid_argument(
                "population minimization is restricted to features of the base pair");

    // Tabulate the feature vector, the response index t and the quadrature
    // weight at every node of the two-dimensional rule.
    const int order = gh_.order();
    const int k = support.size() + (with_intercept ? 1 : 0);
    const double rc = std::sqrt(1.0 - rho_ * rho_);
    std::vector<Eigen::VectorXd> feats;
    std::vector<double> ts, ws;
    feats.reserve(2 * static_cast<std::size_t>(order) * static_cast<std::size_t>(order));
    Eigen::VectorXd all(9);
    // the base pair is exchangeable; using both orientations of each node at
    // half weight keeps the quadrature objective exactly swap-symmetric
    auto add_node = [&](double z1, double z2, double w) {
        Eigen::VectorXd f(k);
        int pos = 0;
        if (with_intercept) f[pos++] = 1.0;
        if (model_ == SimModel::m1) {
            m1_features(z1, z2, all);
            for (int idx : support.indices()) f[pos++] = all[idx - 1];
            ts.push_back(z1 + z2);
        } else {
            for (int idx : support.indices()) f[pos++] = (idx == 1 ? z1 : z2);
            ts.push_back(p_ >= 2 ? z1 + z2 : z1);
        }
        feats.push_back(std::move(f));
        ws.push_back(w);
    };
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
            const double z1 = gh_.nodes()[static_cast<std::size_t>(i)];
            const double z2 = rho_ * z1 + rc * gh_.nodes()[static_cast<std::size_t>(j)];
            const double w = gh_.weights()[static_cast<std::size_t>(i)] *
                             gh_.weights()[static_cast<std::size_t>(j)];
            if (p_ == 1 && model_ == SimModel::m2) {
                add_node(z1, z2, w);
            } else {
                add_node(z1, z2, 0.5 * w);
                add_node(z2, z1, 0.5 * w);
            }
        }
    }

    // Split every node into two weighted pseudo-observations (targets 0 and
    // 1); the objective becomes a weighted empirical risk and the restricted
    // solvers apply verbatim.
    const std::size_t nodes = feats.size();
    Eigen::MatrixXd f(2 * nodes, k);
    Eigen::VectorXd target(2 * nodes), weight(2 * nodes);
    for (std::size_t q = 0; q < nodes; ++q) {
        const double prob = 1.0 / (1.0 + std::exp(-std::clamp(ts[q] * ts[q] * ts[q], -700.0, 700.0)));
        f.row(static_cast<Eigen::Index>(2 * q)) = feats[q];
        f.row(static_cast<Eigen::Index>(2 * q + 1)) = feats[q];
        target[static_cast<Eigen::Index>(2 * q)] = 1.0;
        target[static_cast<Eigen::Index>(2 * q + 1)] = 0.0;
        weight[static_cast<Eigen::Index>(2 * q)] = ws[q] * prob;
        weight[static_cast<Eigen::Index>(2 * q + 1)] = ws[q] * (1.0 - prob);
    }

    auto gradient = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd s = f * theta;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            g += weight[i] * loss_derivative(loss_, s[i], target[i]) * f.row(i).transpose();
        return g;
    };
    auto objective = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd s = f * theta;
        double total = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            total += weight[i] * loss_value(loss_, s[i], target[i]);
        return total;
    };

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
    double grad_norm = std::numeric_limits<double>::infinity();
    if (loss_.kind == LossKind::quadratic) {
        const Eigen::MatrixXd h = f.transpose() * weight.asDiagonal() * f;
        theta = h.ldlt().solve(f.transpose() * (weight.array() * target.array()).matrix());
        grad_norm = gradient(theta).lpNorm<Eigen::Infinity>();
    } else if (loss_.kind == LossKind::logistic) {
        for (int it = 0; it < 200; ++it) {
            Eigen::VectorXd g = gradient(theta);
            grad_norm = g.lpNorm<Eigen::Infinity>();
            if (grad_norm <= 1e-12) break;
            Eigen::VectorXd s = f * theta;
            Eigen::ArrayXd mu = 1.0 / (1.0 + (-s.array()).exp());
            Eigen::ArrayXd w = weight.array() * (mu * (1.0 - mu)).max(1e-12);
            Eigen::MatrixXd h = f.transpose() * w.matrix().asDiagonal() * f;
            Eigen::VectorXd step = h.ldlt().solve(-g);
            if (!step.allFinite()) throw numeric_error("population Newton step failed");
            const double f0 = objective(theta);
            const double slope = g.dot(step);
            double t = 1.0;
            Eigen::VectorXd candidate = theta + step;
            for (int ls = 0; ls < 60 && objective(candidate) > f0 + 1e-4 * t * slope; ++ls) {
                t *= 0.5;
                candidate = theta + t * step;
            }
            theta = candidate;
        }
    } else { // huber: majorize-minimize with slope/residual weights
        for (int it = 0; it < 5000; ++it) {
            grad_norm = gradient(theta).lpNorm<Eigen::Infinity>();
            if (grad_norm <= 1e-12) break;
            Eigen::VectorXd r = target - f * theta;
            Eigen::ArrayXd w(weight.size());
            for (Eigen::Index i = 0; i < r.size(); ++i) {
                const double ar = std::abs(r[i]);
                w[i] = weight[i] * (ar <= loss_.delta ? 1.0 : loss_.delta / ar);
            }
            Eigen::MatrixXd h = f.transpose() * w.matrix().asDiagonal() * f;
            h.diagonal().array() += 1e-14 * (1.0 + h.diagonal().maxCoeff());
            Eigen::VectorXd next =
                h.ldlt().solve(f.transpose() * (w * target.array()).matrix());
            if (!next.allFinite()) throw numeric_error("population reweighting step failed");
            if ((next - theta).lpNorm<Eigen::Infinity>() < 1e-16) {
                theta = next;
                grad_norm = gradient(theta).lpNorm<Eigen::Infinity>();
                break;
            }
            theta = next;
        }
    }
    if (grad_norm > 1e-8)
        throw numeric_error("population risk minimization did not converge (gradient " +
                            std::to_string(grad_norm) + ")");

    Eigen::VectorXd full = Eigen::VectorXd::Zero(p_);
    int pos = with_intercept ? 1 : 0;
    for (int idx : support.indices()) full[idx - 1] = theta[pos++];
    return {with_intercept ? theta[0] : 0.0, std::move(full)};
}

Eigen::MatrixXd PopulationModel::hessian(const Eigen::VectorXd& b) const {
    if (b.size() != p_) throw std::invalid_argument("coefficient length mismatch");
    const int order = gh_.order();

    if (model_ == SimModel::m1) {
        const double rc = std::sqrt(1.0 - rho_ * rho_);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(9, 9);
        Eigen::VectorXd x(9);
        for (int i = 0; i < order; ++i) {
            for (int j = 0; j < order; ++j) {
                const double z1 = gh_.nodes()[static_cast<std::size_t>(i)];
                const double z2 = rho_ * z1 + rc * gh_.nodes()[static_cast<std::size_t>(j)];
                m1_features(z1, z2, x);
                const double w = gh_.weights()[static_cast<std::size_t>(i)] *
                                 gh_.weights()[static_cast<std::size_t>(j)];
                h += w * mixed_second(loss_, z1 + z2, b.dot(x)) * x * x.transpose();
            }
        }
        return h;
    }

    // E[h(t,v) x x^T] by conditioning x on the Gaussian pair (t, v).
    const Eigen::MatrixXd sigma = ar1_covariance(p_, rho_);
    Eigen::VectorXd e12 = Eigen::VectorXd::Zero(p_);
    e12[0] = 1.0;
    if (p_ >= 2) e12[1] = 1.0;
    const Eigen::VectorXd sig_xt = sigma * e12;
    const Eigen::VectorXd sig_xv = sigma * b;
    const double var_t = e12.dot(sig_xt);
    const double cov_tv = b.dot(sig_xt);
    const double var_v = b.dot(sig_xv);
    const double sd_t = std::sqrt(var_t);
    const double alpha = cov_tv / var_t;
    const double tau2 = std::max(0.0, var_v - cov_tv * cov_tv / var_t);
    const double tau = std::sqrt(tau2);

    if (tau < 1e-9 * (1.0 + std::sqrt(var_v))) {
        // v is a deterministic multiple of t: condition on t alone.
        double m0 = 0.0, m2 = 0.0; // E[h], E[h t^2]
        for (int i = 0; i < order; ++i) {
            const double t = sd_t * gh_.nodes()[static_cast<std::size_t>(i)];
            const double w = gh_.weights()[static_cast<std::size_t>(i)];
            const double hval = mixed_second(loss_, t, alpha * t);
            m0 += w * hval;
            m2 += w * hval * t * t;
        }
        const Eigen::VectorXd a = sig_xt / var_t;
        const Eigen::MatrixXd cond = sigma - sig_xt * sig_xt.transpose() / var_t;
        return m2 * a * a.transpose() + m0 * cond;
    }

    Eigen::Matrix2d c2;
    c2 << var_t, cov_tv, cov_tv, var_v;
    Eigen::MatrixXd cross(p_, 2);
    cross.col(0) = sig_xt;
    cross.col(1) = sig_xv;
    const Eigen::MatrixXd a = cross * c2.inverse(); // p x 2
    const Eigen::MatrixXd cond = sigma - a * cross.transpose();

    double m0 = 0.0;
    Eigen::Matrix2d mc = Eigen::Matrix2d::Zero(); // E[h * (t,v)(t,v)^T]
    for (int i = 0; i < order; ++i) {
        const double t = sd_t * gh_.nodes()[static_cast<std::size_t>(i)];
        const double w1 = gh_.weights()[static_cast<std::size_t>(i)];
        for (int j = 0; j < order; ++j) {
            const double v = alpha * t + tau * gh_.nodes()[static_cast<std::size_t>(j)];
            const double w = w1 * gh_.weights()[static_cast<std::size_t>(j)];
            const double hval = mixed_second(loss_, t, v);
            m0 += w * hval;
            mc(0, 0) += w * hval * t * t;
            mc(0, 1) += w * hval * t * v;
            mc(1, 1) += w * hval * v * v;
        }
    }
    mc(1, 0) = mc(0, 1);
    return a * mc * a.transpose() + m0 * cond;
}

Eigen::MatrixXd PopulationModel::predictor_covariance() const {
    if (model_ == SimModel::m2) return ar1_covariance(p_, rho_);
    // Polynomial design: centered second moments by quadrature.
    const int order = gh_.order();
    const double rc = std::sqrt(1.0 - rho_ * rho_);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(9);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(9, 9);
    Eigen::VectorXd x(9);
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
            const double z1 = gh_.nodes()[static_cast<std::size_t>(i)];
            const double z2 = rho_ * z1 + rc * gh_.nodes()[static_cast<std::size_t>(j)];
            m1_features(z1, z2, x);
            const double w = gh_.weights()[static_cast<std::size_t>(i)] *
                             gh_.weights()[static_cast<std::size_t>(j)];
            mean += w * x;
            second += w * x * x.transpose();
        }
    }
    return second - mean * mean.transpose();
}

} // namespace gicsel
