#include "gicsel/sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gicsel {

namespace {

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

Eigen::VectorXd draw_cubic_logistic_response(const Eigen::VectorXd& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd y(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i)
        y[i] = unif(rng) < sigmoid(t[i] * t[i] * t[i]) ? 1.0 : 0.0;
    return y;
}

} // namespace

Eigen::VectorXd GroundTruth::padded_direction(int p) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
    const auto& idx = true_support.indices();
    for (std::size_t i = 0; i < idx.size(); ++i)
        out[idx[i] - 1] = true_direction[static_cast<Eigen::Index>(i)];
    return out;
}

Eigen::MatrixXd sample_ar1_gaussian(int n, int p, double rho, std::uint64_t seed) {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("|rho| must be < 1");
    if (n < 1 || p < 1) throw std::invalid_argument("need n >= 1, p >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double carry = std::sqrt(1.0 - rho * rho);
    Eigen::MatrixXd z(n, p);
    for (int i = 0; i < n; ++i) {
        z(i, 0) = gauss(rng);
        for (int j = 1; j < p; ++j) z(i, j) = rho * z(i, j - 1) + carry * gauss(rng);
    }
    return z;
}

std::pair<Dataset, GroundTruth> generate_m1(const SimModelSpec& spec) {
    if (spec.model != SimModel::m1) throw std::invalid_argument("spec is not for the m1 design");
    if (spec.p < 9) throw std::invalid_argument("m1 requires p >= 9");
    const Eigen::MatrixXd z = sample_ar1_gaussian(spec.n, spec.p, spec.rho, spec.seed);
    Eigen::MatrixXd x(spec.n, spec.p);
    x.col(0) = z.col(0);
    x.col(1) = z.col(1);
    x.col(2) = z.col(0).array().square();
    x.col(3) = z.col(1).array().square();
    x.col(4) = z.col(0).array() * z.col(1).array();
    x.col(5) = z.col(0).array().square() * z.col(1).array();
    x.col(6) = z.col(0).array() * z.col(1).array().square();
    x.col(7) = z.col(0).array().cube();
    x.col(8) = z.col(1).array().cube();
    // columns 10..p reuse the base coordinates starting from the third; the
    // trailing ones of z stay unused, matching the design's literal indexing
    for (int j = 9; j < spec.p; ++j) x.col(j) = z.col(j - 7);

    std::mt19937_64 rng(spec.seed + 0x9e3779b97f4a7c15ULL);
    const Eigen::VectorXd t = z.col(0) + z.col(1);
    Eigen::VectorXd y = draw_cubic_logistic_response(t, rng);

    GroundTruth truth;
    truth.true_support = PredictorSet({6, 7, 8, 9});
    truth.true_direction = Eigen::Vector4d(3.0, 3.0, 1.0, 1.0);
    truth.wellspecified = true;
    return {Dataset(std::move(x), std::move(y)), std::move(truth)};
}

std::pair<Dataset, GroundTruth> generate_m2(const SimModelSpec& spec) {
    if (spec.model != SimModel::m2) throw std::invalid_argument("spec is not for the m2 design");
    if (spec.p < 2) throw std::invalid_argument("m2 requires p >= 2");
    Eigen::MatrixXd x = sample_ar1_gaussian(spec.n, spec.p, spec.rho, spec.seed);
    std::mt19937_64 rng(spec.seed + 0x9e3779b97f4a7c15ULL);
    const Eigen::VectorXd t = x.col(0) + x.col(1);
    Eigen::VectorXd y = draw_cubic_logistic_response(t, rng);

    GroundTruth truth;
    truth.true_support = PredictorSet({1, 2});
    truth.true_direction = Eigen::Vector2d(1.0, 1.0);
    truth.wellspecified = false;
    return {Dataset(std::move(x), std::move(y)), std::move(truth)};
}

std::pair<Dataset, GroundTruth> generate(const SimModelSpec& spec) {
    return spec.model == SimModel::m1 ? generate_m1(spec) : generate_m2(spec);
}

Eigen::Vector2d population_target_m2(double rho, const LossSpec& loss) {
    const PopulationModel population(SimModel::m2, 2, rho, loss);
    const auto [intercept, coefs] = population.minimize(PredictorSet({1, 2}), true);
    (void)intercept;
    return Eigen::Vector2d(coefs[0], coefs[1]);
}

} // namespace gicsel
