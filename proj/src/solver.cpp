#include "gicsel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gicsel/errors.hpp"

namespace gicsel {

namespace {

inline double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

inline bool degenerate_response(const Eigen::VectorXd& y) {
    const double s = y.sum();
    return s == 0.0 || s == static_cast<double>(y.size());
}

// rho'(s_i, y_i) for all rows, vectorized per loss.
void derivative_vector(const LossSpec& spec, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                       Eigen::VectorXd& out) {
    switch (spec.kind) {
    case LossKind::logistic:
        out = (1.0 / (1.0 + (-s.array()).exp())) - y.array();
        break;
    case LossKind::quadratic:
        out = s - y;
        break;
    case LossKind::huber:
        out = (s - y).array().min(spec.delta).max(-spec.delta);
        break;
    }
}

struct CdState {
    double b0 = 0.0;
    Eigen::VectorXd b;
    Eigen::VectorXd s;     // b0 + x*b
    Eigen::VectorXd deriv; // rho'(s, y)
    bool deriv_fresh = false;
};

class CdProblem {
public:
    CdProblem(const Dataset& d, const LossSpec& spec, double lambda, const SolverConfig& cfg,
              const std::vector<int>& cols)
        : d_(d), spec_(spec), lambda_(lambda), cfg_(cfg), cols_(cols),
          n_(static_cast<double>(d.n())), curvature_(spec.curvature_bound()) {
        sqnorm_.assign(static_cast<std::size_t>(d.p()), 0.0);
        for (int c : cols_) sqnorm_[static_cast<std::size_t>(c)] = d_.x().col(c).squaredNorm();
    }

    PenalizedFit run(const PenalizedFit* warm) {
        CdState st;
        st.b = Eigen::VectorXd::Zero(d_.p());
        if (warm && warm->coefficients.size() == d_.p()) {
            st.b0 = warm->intercept;
            for (int c : cols_) st.b[c] = warm->coefficients[c];
        } else {
            st.b0 = safe_intercept_start();
        }
        st.s = (d_.x() * st.b).array() + st.b0;
        st.deriv.resize(d_.n());
        st.deriv_fresh = false;

        bool converged = false;
        int iters = 0;
        double kkt = std::numeric_limits<double>::infinity();
        while (iters < cfg_.max_iterations) {
            const double change = sweep(st, nullptr);
            ++iters;
            if (change < cfg_.tolerance * scale(st)) {
                kkt = kkt_residual(st);
                if (kkt <= cfg_.kkt_tol) {
                    converged = true;
                    break;
                }
                continue; // keep sweeping until the certificate holds
            }
            std::vector<int> active;
            for (int c : cols_)
                if (st.b[c] != 0.0) active.push_back(c);
            while (iters < cfg_.max_iterations) {
                const double inner = sweep(st, &active);
                ++iters;
                if (inner < cfg_.tolerance * scale(st)) break;
            }
        }

        // drop coefficients that are zero up to rounding; they only appear
        // when |gradient| sits within an ulp of lambda
        const double null_threshold = 1e-12 * std::max(1.0, st.b.lpNorm<Eigen::Infinity>());
        for (Eigen::Index j = 0; j < st.b.size(); ++j)
            if (st.b[j] != 0.0 && std::abs(st.b[j]) < null_threshold) st.b[j] = 0.0;

        PenalizedFit fit;
        fit.lambda = lambda_;
        fit.intercept = st.b0;
        fit.coefficients = st.b;
        fit.converged = converged;
        fit.iterations = iters;
        fit.objective = empirical_risk(spec_, d_, st.b0, st.b) + lambda_ * st.b.lpNorm<1>();
        return fit;
    }

private:
    double safe_intercept_start() const {
        if (spec_.kind == LossKind::logistic && degenerate_response(d_.y())) {
            const double m = (d_.y().sum() + 0.5) / (n_ + 1.0);
            return std::log(m / (1.0 - m));
        }
        return intercept_only_minimizer(spec_, d_.y());
    }

    double scale(const CdState& st) const { return std::max(1.0, st.b.lpNorm<Eigen::Infinity>()); }

    void refresh(CdState& st) const {
        if (!st.deriv_fresh) {
            derivative_vector(spec_, st.s, d_.y(), st.deriv);
            st.deriv_fresh = true;
        }
    }

    // One pass over the intercept and the given coordinates (all when null).
    double sweep(CdState& st, const std::vector<int>* subset) {
        double max_change = 0.0;
        refresh(st);
        {
            const double g0 = st.deriv.mean();
            const double delta = -g0 / curvature_;
            if (delta != 0.0) {
                st.b0 += delta;
                st.s.array() += delta;
                st.deriv_fresh = false;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        const std::vector<int>& order = subset ? *subset : cols_;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const int c = order[k];
            const double hj = curvature_ * sqnorm_[static_cast<std::size_t>(c)] / n_;
            if (hj <= 0.0) continue; // all-zero column
            refresh(st);
            const double g = d_.x().col(c).dot(st.deriv) / n_;
            const double z = hj * st.b[c] - g;
            const double bnew = soft_threshold(z, lambda_) / hj;
            const double delta = bnew - st.b[c];
            if (delta != 0.0) {
                st.b[c] = bnew;
                st.s += delta * d_.x().col(c);
                st.deriv_fresh = false;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        return max_change;
    }

    double kkt_residual(CdState& st) {
        refresh(st);
        double res = std::abs(st.deriv.mean());
        for (int c : cols_) {
            const double g = d_.x().col(c).dot(st.deriv) / n_;
            if (st.b[c] != 0.0)
                res = std::max(res, std::abs(g + lambda_ * (st.b[c] > 0.0 ? 1.0 : -1.0)));
            else
                res = std::max(res, std::max(0.0, std::abs(g) - lambda_));
        }
        return res;
    }

    const Dataset& d_;
    const LossSpec& spec_;
    double lambda_;
    const SolverConfig& cfg_;
    std::vector<int> cols_; // 0-based columns being optimized
    double n_;
    double curvature_;
    std::vector<double> sqnorm_;
};

void check_solver_config(const SolverConfig& cfg) {
    if (cfg.max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
    if (!(cfg.tolerance > 0.0 && cfg.tolerance < 1.0))
        throw std::invalid_argument("tolerance must lie in (0,1)");
    if (!(cfg.kkt_tol > 0.0 && cfg.kkt_tol < 1.0))
        throw std::invalid_argument("kkt_tol must lie in (0,1)");
}

std::vector<int> all_columns(const Dataset& d) {
    std::vector<int> cols(static_cast<std::size_t>(d.p()));
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
}

} // namespace

PredictorSet PenalizedFit::support() const {
    std::vector<int> idx;
    for (Eigen::Index j = 0; j < coefficients.size(); ++j)
        if (coefficients[j] != 0.0) idx.push_back(static_cast<int>(j) + 1);
    return PredictorSet(std::move(idx));
}

double intercept_only_minimizer(const LossSpec& spec, const Eigen::VectorXd& y) {
    const double n = static_cast<double>(y.size());
    const double ybar = y.sum() / n;
    switch (spec.kind) {
    case LossKind::logistic:
        if (ybar <= 0.0 || ybar >= 1.0) throw data_error("degenerate response");
        return std::log(ybar / (1.0 - ybar));
    case LossKind::quadratic:
        return ybar;
    case LossKind::huber: {
        // derivative (1/n) sum rho'(c, y_i) is nondecreasing in c; bisect.
        double lo = -1.0, hi = 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            double deriv = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i)
                deriv += loss_derivative(spec, mid, y[i]);
            if (deriv > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    }
    }
    throw std::logic_error("unreachable");
}

PenalizedFit fit_lasso(const Dataset& d, const LossSpec& spec, double lambda,
                       const SolverConfig& cfg, const PenalizedFit* warm_start) {
    check_solver_config(cfg);
    if (!d.standardized()) throw std::invalid_argument("fit_lasso requires a standardized dataset");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    if (spec.kind == LossKind::logistic && degenerate_response(d.y())) {
        PenalizedFit fit;
        fit.lambda = lambda;
        const double m = (d.y().sum() + 0.5) / (static_cast<double>(d.n()) + 1.0);
        fit.intercept = std::log(m / (1.0 - m));
        fit.coefficients = Eigen::VectorXd::Zero(d.p());
        fit.converged = false;
        fit.flag = "degenerate";
        fit.objective = empirical_risk(spec, d, fit.intercept, fit.coefficients);
        return fit;
    }
    CdProblem problem(d, spec, lambda, cfg, all_columns(d));
    return problem.run(warm_start);
}

double lambda_max(const Dataset& d, const LossSpec& spec) {
    if (!d.standardized())
        throw std::invalid_argument("lambda_max requires a standardized dataset");
    const double b0 = intercept_only_minimizer(spec, d.y());
    Eigen::VectorXd s = Eigen::VectorXd::Constant(d.n(), b0);
    Eigen::VectorXd deriv;
    derivative_vector(spec, s, d.y(), deriv);
    const double lmax =
        (d.x().transpose() * deriv).lpNorm<Eigen::Infinity>() / static_cast<double>(d.n());
    if (!(lmax > 0.0) || !std::isfinite(lmax)) throw data_error("degenerate response");
    return lmax;
}

std::vector<double> lambda_grid(double lmax, int m, double ratio) {
    if (m < 2) throw std::invalid_argument("lambda grid needs m >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must lie in (0,1)");
    if (!(lmax > 0.0)) throw std::invalid_argument("lmax must be positive");
    std::vector<double> grid(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        grid[static_cast<std::size_t>(i)] =
            lmax * std::pow(ratio, static_cast<double>(i) / static_cast<double>(m - 1));
    return grid;
}

PathResult fit_path(const Dataset& d, const LossSpec& spec, int m, double ratio,
                    const SolverConfig& cfg) {
    if (m < 1) throw std::invalid_argument("path needs m >= 1");
    const double lmax = lambda_max(d, spec);
    const std::vector<double> grid =
        (m == 1) ? std::vector<double>{lmax} : lambda_grid(lmax, m, ratio);
    PathResult path;
    path.loss = spec;
    PenalizedFit previous;
    bool have_previous = false;
    for (double lambda : grid) {
        PenalizedFit fit = fit_lasso(d, spec, lambda, cfg, have_previous ? &previous : nullptr);
        previous = fit;
        have_previous = true;
        if (fit.support().size() <= static_cast<int>(d.n())) path.fits.push_back(std::move(fit));
    }
    return path;
}

namespace {

Eigen::MatrixXd design_with_intercept(const Dataset& d, const std::vector<int>& cols) {
    Eigen::MatrixXd a(d.n(), static_cast<Eigen::Index>(cols.size()) + 1);
    a.col(0).setOnes();
    for (std::size_t k = 0; k < cols.size(); ++k) a.col(static_cast<Eigen::Index>(k) + 1) = d.x().col(cols[k]);
    return a;
}

double restricted_grad_norm(const LossSpec& spec, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    Eigen::VectorXd s = a * beta;
    Eigen::VectorXd deriv;
    derivative_vector(spec, s, y, deriv);
    return (a.transpose() * deriv).lpNorm<Eigen::Infinity>() / static_cast<double>(y.size());
}

double restricted_risk(const LossSpec& spec, const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta) {
    Eigen::VectorXd s = a * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) total += loss_value(spec, s[i], y[i]);
    return total / static_cast<double>(y.size());
}

constexpr double kSeparationNorm = 1e4;

// Damped Newton for the logistic restricted fit.
bool newton_logistic(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const SolverConfig& cfg,
                     Eigen::VectorXd& beta, int& iterations, bool& separated) {
    const double n = static_cast<double>(y.size());
    const LossSpec spec = LossSpec::logistic();
    const int cap = std::min(500, cfg.max_iterations);
    for (int it = 0; it < cap; ++it) {
        Eigen::VectorXd s = a * beta;
        Eigen::ArrayXd mu = 1.0 / (1.0 + (-s.array()).exp());
        Eigen::VectorXd grad = a.transpose() * (mu.matrix() - y) / n;
        ++iterations;
        if (grad.lpNorm<Eigen::Infinity>() <= cfg.kkt_tol) return true;
        Eigen::ArrayXd w = (mu * (1.0 - mu)).max(1e-10);
        Eigen::MatrixXd h = a.transpose() * w.matrix().asDiagonal() * a / n;
        Eigen::VectorXd step = h.ldlt().solve(-grad);
        if (!step.allFinite()) {
            h.diagonal().array() += 1e-10 * (1.0 + h.diagonal().maxCoeff());
            step = h.ldlt().solve(-grad);
            if (!step.allFinite()) return false;
        }
        const double slope = grad.dot(step);
        const double risk0 = restricted_risk(spec, a, y, beta);
        double t = 1.0;
        Eigen::VectorXd candidate;
        for (int ls = 0; ls < 40; ++ls) {
            candidate = beta + t * step;
            if (restricted_risk(spec, a, y, candidate) <= risk0 + 1e-4 * t * slope) break;
            t *= 0.5;
        }
        beta = candidate;
        if (beta.norm() > kSeparationNorm) {
            separated = true;
            return false;
        }
    }
    return false;
}

// Iteratively reweighted least squares for the Huber restricted fit.
bool irls_huber(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double delta,
                const SolverConfig& cfg, Eigen::VectorXd& beta, int& iterations) {
    const LossSpec spec = LossSpec::huber(delta);
    const int cap = std::min(1000, cfg.max_iterations);
    for (int it = 0; it < cap; ++it) {
        ++iterations;
        if (restricted_grad_norm(spec, a, y, beta) <= cfg.kkt_tol) return true;
        Eigen::VectorXd r = y - a * beta;
        Eigen::ArrayXd w(r.size());
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            const double ar = std::abs(r[i]);
            w[i] = ar <= delta ? 1.0 : delta / ar;
        }
        Eigen::MatrixXd h = a.transpose() * w.matrix().asDiagonal() * a;
        h.diagonal().array() += 1e-12 * (1.0 + h.diagonal().maxCoeff());
        Eigen::VectorXd next = h.ldlt().solve(a.transpose() * (w * y.array()).matrix());
        if (!next.allFinite()) return false;
        if ((next - beta).lpNorm<Eigen::Infinity>() < 1e-15 && it > 0) {
            beta = next;
            return restricted_grad_norm(spec, a, y, beta) <= cfg.kkt_tol;
        }
        beta = next;
    }
    return restricted_grad_norm(spec, a, y, beta) <= cfg.kkt_tol;
}

} // namespace

PenalizedFit refit(const Dataset& d, const LossSpec& spec, const PredictorSet& w,
                   const SolverConfig& cfg, const PenalizedFit* warm_start) {
    check_solver_config(cfg);
    if (!d.standardized()) throw std::invalid_argument("refit requires a standardized dataset");
    if (w.size() + 1 > static_cast<int>(d.n()))
        throw std::invalid_argument("refit needs |w| + 1 <= n");
    if (!w.empty() && w.indices().back() > static_cast<int>(d.p()))
        throw std::invalid_argument("predictor index exceeds p");

    PenalizedFit fit;
    fit.lambda = 0.0;
    fit.coefficients = Eigen::VectorXd::Zero(d.p());

    if (w.empty()) {
        if (spec.kind == LossKind::logistic && degenerate_response(d.y())) {
            const double m = (d.y().sum() + 0.5) / (static_cast<double>(d.n()) + 1.0);
            fit.intercept = std::log(m / (1.0 - m));
            fit.converged = false;
            fit.flag = "separation";
        } else {
            fit.intercept = intercept_only_minimizer(spec, d.y());
            fit.converged = true;
        }
        fit.objective = empirical_risk(spec, d, fit.intercept, fit.coefficients);
        return fit;
    }

    std::vector<int> cols;
    cols.reserve(static_cast<std::size_t>(w.size()));
    for (int j : w.indices()) cols.push_back(j - 1);
    Eigen::MatrixXd a = design_with_intercept(d, cols);
    const Eigen::Index k = a.cols();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    if (warm_start && warm_start->coefficients.size() == d.p()) {
        beta[0] = warm_start->intercept;
        for (std::size_t i = 0; i < cols.size(); ++i)
            beta[static_cast<Eigen::Index>(i) + 1] = warm_start->coefficients[cols[i]];
    } else if (spec.kind == LossKind::logistic) {
        const double m = (d.y().sum() + 0.5) / (static_cast<double>(d.n()) + 1.0);
        beta[0] = std::log(m / (1.0 - m));
    }

    bool ok = false;
    bool separated = false;
    int iterations = 0;
    switch (spec.kind) {
    case LossKind::quadratic: {
        Eigen::MatrixXd h = a.transpose() * a;
        Eigen::VectorXd rhs = a.transpose() * d.y();
        beta = h.ldlt().solve(rhs);
        if (!beta.allFinite() ||
            restricted_grad_norm(spec, a, d.y(), beta) > cfg.kkt_tol) {
            beta = a.colPivHouseholderQr().solve(d.y());
        }
        iterations = 1;
        ok = beta.allFinite() && restricted_grad_norm(spec, a, d.y(), beta) <= cfg.kkt_tol;
        break;
    }
    case LossKind::logistic:
        ok = newton_logistic(a, d.y(), cfg, beta, iterations, separated);
        break;
    case LossKind::huber:
        ok = irls_huber(a, d.y(), spec.delta, cfg, beta, iterations);
        break;
    }

    if (!ok && !separated) {
        // robust fallback: coordinate descent at lambda = 0 on the free coordinates
        PenalizedFit warm;
        warm.intercept = beta.allFinite() ? beta[0] : 0.0;
        warm.coefficients = Eigen::VectorXd::Zero(d.p());
        if (beta.allFinite())
            for (std::size_t i = 0; i < cols.size(); ++i)
                warm.coefficients[cols[i]] = beta[static_cast<Eigen::Index>(i) + 1];
        CdProblem problem(d, spec, 0.0, cfg, cols);
        PenalizedFit cd = problem.run(&warm);
        beta[0] = cd.intercept;
        for (std::size_t i = 0; i < cols.size(); ++i)
            beta[static_cast<Eigen::Index>(i) + 1] = cd.coefficients[cols[i]];
        iterations += cd.iterations;
        ok = cd.converged;
        if (spec.kind == LossKind::logistic && beta.norm() > kSeparationNorm) {
            separated = true;
            ok = false;
        }
    }

    fit.intercept = beta[0];
    for (std::size_t i = 0; i < cols.size(); ++i)
        fit.coefficients[cols[i]] = beta[static_cast<Eigen::Index>(i) + 1];
    fit.converged = ok;
    fit.iterations = iterations;
    if (separated) fit.flag = "separation";
    fit.objective = empirical_risk(spec, d, fit.intercept, fit.coefficients);
    return fit;
}

double verify_kkt(const Dataset& d, const LossSpec& spec, const PenalizedFit& fit) {
    if (fit.coefficients.size() != d.p())
        throw std::invalid_argument("coefficient length mismatch");
    Eigen::VectorXd s = (d.x() * fit.coefficients).array() + fit.intercept;
    Eigen::VectorXd deriv;
    derivative_vector(spec, s, d.y(), deriv);
    const double n = static_cast<double>(d.n());
    Eigen::VectorXd g = d.x().transpose() * deriv / n;
    double res = std::abs(deriv.mean());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        const double bj = fit.coefficients[j];
        if (bj != 0.0)
            res = std::max(res, std::abs(g[j] + fit.lambda * (bj > 0.0 ? 1.0 : -1.0)));
        else
            res = std::max(res, std::max(0.0, std::abs(g[j]) - fit.lambda));
    }
    return res;
}

} // namespace gicsel
