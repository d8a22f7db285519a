#include <doctest.h>

#include <cmath>
#include <random>

#include "gicsel/errors.hpp"
#include "gicsel/sim.hpp"
#include "gicsel/solver.hpp"

using namespace gicsel;

namespace {

// Columns orthogonal to each other and to the intercept, each with norm
// sqrt(n); flagged standardized so the solver accepts it.
Dataset orthogonal_design(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd base(n, p + 1);
    base.col(0).setOnes();
    for (int j = 1; j <= p; ++j)
        for (int i = 0; i < n; ++i) base(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(base);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p + 1);
    Eigen::MatrixXd x = q.rightCols(p) * std::sqrt(static_cast<double>(n));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = (i % 2 == 0) ? 1.0 : 0.0;
    return Dataset::with_stats(std::move(x), std::move(y), true, Eigen::VectorXd::Zero(p),
                               Eigen::VectorXd::Ones(p));
}

Dataset random_standardized(int n, int p, std::uint64_t seed, double signal = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = gauss(rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double s = signal * (x(i, 0) - 0.5 * x(i, std::min(1, p - 1)));
        y[i] = unif(rng) < 1.0 / (1.0 + std::exp(-s)) ? 1.0 : 0.0;
    }
    return standardize(Dataset(std::move(x), std::move(y)));
}

} // namespace

TEST_CASE("lambda grid is log-equispaced") {
    CHECK(lambda_grid(1.0, 2, 0.1) == std::vector<double>{1.0, 0.1});
    const auto g3 = lambda_grid(1.0, 3, 0.01);
    CHECK(g3[0] == doctest::Approx(1.0));
    CHECK(g3[1] == doctest::Approx(0.1));
    CHECK(g3[2] == doctest::Approx(0.01));
    const auto g20 = lambda_grid(2.5, 20, 0.01);
    for (std::size_t i = 2; i < g20.size(); ++i)
        CHECK(g20[i] / g20[i - 1] == doctest::Approx(g20[1] / g20[0]).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_grid(1.0, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(lambda_grid(1.0, 5, 1.5), std::invalid_argument);
}

TEST_CASE("lambda_max makes the null model stationary") {
    Dataset d = random_standardized(120, 8, 3);
    for (const LossSpec& spec :
         {LossSpec::logistic(), LossSpec::quadratic(), LossSpec::huber(0.1)}) {
        const double lmax = lambda_max(d, spec);
        CHECK(lmax > 0.0);
        SolverConfig cfg;
        const PenalizedFit fit = fit_lasso(d, spec, lmax * 1.01, cfg);
        CHECK(fit.converged);
        CHECK(fit.support().empty());
        CHECK(verify_kkt(d, spec, fit) <= 1e-10);
        if (spec.kind == LossKind::logistic) {
            const double ybar = d.y().mean();
            CHECK(fit.intercept == doctest::Approx(std::log(ybar / (1.0 - ybar))).epsilon(1e-8));
        }
    }
}

TEST_CASE("lambda_max under quadratic loss is the max absolute covariance") {
    Dataset d = random_standardized(60, 5, 9);
    const Eigen::VectorXd centered = d.y().array() - d.y().mean();
    double expected = 0.0;
    for (Eigen::Index j = 0; j < d.p(); ++j)
        expected = std::max(expected, std::abs(d.x().col(j).dot(centered)) / d.n());
    CHECK(lambda_max(d, LossSpec::quadratic()) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lambda_max rejects a degenerate response") {
    Eigen::MatrixXd x(6, 2);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 2; ++j) x(i, j) = gauss(rng);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(6);
    Dataset d = standardize(Dataset(x, y));
    CHECK_THROWS_AS(lambda_max(d, LossSpec::logistic()), data_error);
}

TEST_CASE("quadratic fits on an orthogonal design match the soft-threshold form") {
    const int n = 80, p = 6;
    Dataset d = orthogonal_design(n, p, 17);
    const Eigen::VectorXd centered = d.y().array() - d.y().mean();
    SolverConfig cfg;
    for (double lambda : {0.002, 0.01, 0.05}) {
        const PenalizedFit fit = fit_lasso(d, LossSpec::quadratic(), lambda, cfg);
        REQUIRE(fit.converged);
        for (int j = 0; j < p; ++j) {
            const double z = d.x().col(j).dot(centered) / n;
            const double expected = z > lambda ? z - lambda : (z < -lambda ? z + lambda : 0.0);
            CHECK(std::abs(fit.coefficients[j] - expected) < 1e-8);
        }
    }
}

TEST_CASE("logistic fit beats random probes and satisfies the certificate") {
    Dataset d = random_standardized(40, 3, 23);
    SolverConfig cfg;
    const double lambda = 0.05;
    const PenalizedFit fit = fit_lasso(d, LossSpec::logistic(), lambda, cfg);
    REQUIRE(fit.converged);
    CHECK(verify_kkt(d, LossSpec::logistic(), fit) <= 1e-6);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> box(-3.0, 3.0);
    for (int probe = 0; probe < 10000; ++probe) {
        const double b0 = box(rng);
        Eigen::VectorXd b(3);
        for (int j = 0; j < 3; ++j) b[j] = box(rng);
        const double objective =
            empirical_risk(LossSpec::logistic(), d, b0, b) + lambda * b.lpNorm<1>();
        CHECK(fit.objective <= objective + 1e-12);
    }
}

TEST_CASE("fit_lasso requires standardized data") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 2, 2, 1, 3, 3, 4, 7;
    Eigen::VectorXd y(4);
    y << 0, 1, 0, 1;
    Dataset d(x, y);
    SolverConfig cfg;
    CHECK_THROWS_AS(fit_lasso(d, LossSpec::logistic(), 0.1, cfg), std::invalid_argument);
}

TEST_CASE("paths start empty, respect the support cap and decrease the risk") {
    Dataset d = random_standardized(100, 12, 31, 1.5);
    SolverConfig cfg;
    for (const LossSpec& spec : {LossSpec::logistic(), LossSpec::quadratic()}) {
        const PathResult path = fit_path(d, spec, 12, 0.01, cfg);
        REQUIRE_FALSE(path.fits.empty());
        CHECK(path.fits.front().support().empty());
        double previous_lambda = std::numeric_limits<double>::infinity();
        double previous_risk = std::numeric_limits<double>::infinity();
        for (const PenalizedFit& fit : path.fits) {
            CHECK(fit.lambda < previous_lambda);
            CHECK(fit.support().size() <= static_cast<int>(d.n()));
            CHECK(fit.converged);
            CHECK(verify_kkt(d, spec, fit) <= cfg.kkt_tol);
            const double risk = empirical_risk(spec, d, fit.intercept, fit.coefficients);
            CHECK(risk <= previous_risk + 1e-6);
            previous_lambda = fit.lambda;
            previous_risk = risk;
        }
    }
}

TEST_CASE("refit on the empty model is the intercept-only fit") {
    Dataset d = random_standardized(50, 4, 41);
    SolverConfig cfg;
    const PenalizedFit fit = refit(d, LossSpec::logistic(), PredictorSet(), cfg);
    const double ybar = d.y().mean();
    CHECK(fit.converged);
    CHECK(fit.intercept == doctest::Approx(std::log(ybar / (1.0 - ybar))));
    const double entropy = -(ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));
    CHECK(fit.objective == doctest::Approx(entropy));
    CHECK(fit.coefficients.isZero(0.0));
}

TEST_CASE("quadratic refit matches the normal equations") {
    Dataset d = random_standardized(60, 6, 47);
    SolverConfig cfg;
    const PredictorSet w({1, 3, 5});
    const PenalizedFit fit = refit(d, LossSpec::quadratic(), w, cfg);
    REQUIRE(fit.converged);
    Eigen::MatrixXd a(d.n(), 4);
    a.col(0).setOnes();
    a.col(1) = d.x().col(0);
    a.col(2) = d.x().col(2);
    a.col(3) = d.x().col(4);
    Eigen::VectorXd direct = (a.transpose() * a).ldlt().solve(a.transpose() * d.y());
    CHECK(fit.intercept == doctest::Approx(direct[0]).epsilon(1e-8));
    CHECK(fit.coefficients[0] == doctest::Approx(direct[1]).epsilon(1e-8));
    CHECK(fit.coefficients[2] == doctest::Approx(direct[2]).epsilon(1e-8));
    CHECK(fit.coefficients[4] == doctest::Approx(direct[3]).epsilon(1e-8));
    CHECK(fit.coefficients[1] == 0.0);
}

TEST_CASE("refit risk is nonincreasing under set inclusion") {
    SimModelSpec spec;
    spec.model = SimModel::m1;
    spec.n = 500;
    spec.p = 20;
    spec.rho = 0.0;
    spec.seed = 404;
    auto [raw, truth] = generate_m1(spec);
    Dataset d = standardize(raw);
    SolverConfig cfg;
    const PenalizedFit full = refit(d, LossSpec::logistic(), truth.true_support, cfg);
    REQUIRE(full.converged);
    for (int drop : truth.true_support.indices()) {
        const PenalizedFit sub = refit(d, LossSpec::logistic(), truth.true_support.without(drop), cfg);
        REQUIRE(sub.converged);
        CHECK(full.objective <= sub.objective + 1e-9);
    }
}

TEST_CASE("huber refit reaches the gradient certificate") {
    Dataset d = random_standardized(80, 5, 53);
    SolverConfig cfg;
    const PredictorSet w({1, 2});
    const PenalizedFit fit = refit(d, LossSpec::huber(0.1), w, cfg);
    CHECK(fit.converged);
    // gradient over free coordinates
    Eigen::VectorXd s = (d.x() * fit.coefficients).array() + fit.intercept;
    double g0 = 0.0, g1 = 0.0, g2 = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        const double de = loss_derivative(LossSpec::huber(0.1), s[i], d.y()[i]);
        g0 += de;
        g1 += de * d.x()(i, 0);
        g2 += de * d.x()(i, 1);
    }
    CHECK(std::abs(g0 / d.n()) <= cfg.kkt_tol);
    CHECK(std::abs(g1 / d.n()) <= cfg.kkt_tol);
    CHECK(std::abs(g2 / d.n()) <= cfg.kkt_tol);
}

TEST_CASE("perfect separation is flagged, not fatal") {
    // separable with a nearly touching margin, so the ML iteration diverges
    // past the norm guard before the gradient tolerance is met
    Eigen::MatrixXd x(4, 1);
    x << -1.0, -1e-5, 1e-5, 1.0;
    Eigen::VectorXd y(4);
    y << 0, 0, 1, 1;
    Dataset d = standardize(Dataset(x, y));
    SolverConfig cfg;
    const PenalizedFit fit = refit(d, LossSpec::logistic(), PredictorSet({1}), cfg);
    CHECK_FALSE(fit.converged);
    CHECK(fit.flag == "separation");
}

TEST_CASE("refit rejects models larger than the sample") {
    Dataset d = random_standardized(4, 5, 61);
    SolverConfig cfg;
    CHECK_THROWS_AS(refit(d, LossSpec::logistic(), PredictorSet({1, 2, 3, 4}), cfg),
                    std::invalid_argument);
}

TEST_CASE("verify_kkt flags a perturbed solution") {
    Dataset d = random_standardized(60, 4, 71);
    SolverConfig cfg;
    PenalizedFit fit = fit_lasso(d, LossSpec::logistic(), 0.02, cfg);
    REQUIRE(fit.converged);
    REQUIRE(fit.support().size() > 0);
    PenalizedFit bad = fit;
    for (Eigen::Index j = 0; j < bad.coefficients.size(); ++j) {
        if (bad.coefficients[j] != 0.0) {
            bad.coefficients[j] += 0.1;
            break;
        }
    }
    CHECK(verify_kkt(d, LossSpec::logistic(), bad) > cfg.kkt_tol);
}

TEST_CASE("standardization absorbs predictor scaling bit-exactly for powers of two") {
    std::mt19937_64 rng(81);
    std::normal_distribution<double> gauss;
    const int n = 50, p = 4;
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = gauss(rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = (gauss(rng) > 0) ? 1.0 : 0.0;

    Eigen::MatrixXd scaled = x;
    scaled.col(1) *= 4.0;
    Dataset d1 = standardize(Dataset(x, y));
    Dataset d2 = standardize(Dataset(scaled, y));
    SolverConfig cfg;
    const PenalizedFit f1 = fit_lasso(d1, LossSpec::logistic(), 0.05, cfg);
    const PenalizedFit f2 = fit_lasso(d2, LossSpec::logistic(), 0.05, cfg);
    CHECK(f1.intercept == f2.intercept);
    CHECK((f1.coefficients - f2.coefficients).lpNorm<Eigen::Infinity>() == 0.0);
}
