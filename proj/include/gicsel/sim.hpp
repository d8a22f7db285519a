#ifndef GICSEL_SIM_HPP
#define GICSEL_SIM_HPP

#include <cstdint>
#include <utility>

#include "gicsel/dataset.hpp"
#include "gicsel/loss.hpp"
#include "gicsel/population.hpp"

namespace gicsel {

struct SimModelSpec {
    SimModel model = SimModel::m2;
    int n = 500;
    int p = 150;
    double rho = 0.0;
    std::uint64_t seed = 0;
};

/// What the generator knows about the data it produced: the support of the
/// population-risk minimizer and its direction restricted to that support.
struct GroundTruth {
    PredictorSet true_support;
    Eigen::VectorXd true_direction; // on the support, in support order
    bool wellspecified = false;

    Eigen::VectorXd padded_direction(int p) const; // zero-padded to length p
};

/// n iid rows from N_p(0, Sigma) with Sigma_ij = rho^|i-j|, generated by the
/// scalar AR(1) recursion (exact, O(np)).
Eigen::MatrixXd sample_ar1_gaussian(int n, int p, double rho, std::uint64_t seed);

/// Polynomial design: columns 1-2 are the base Gaussian coordinates,
/// 3-9 their monomials up to degree three, 10..p further raw coordinates.
/// The response is Bernoulli(sigmoid((x1+x2)^3)); well specified on {6,7,8,9}.
std::pair<Dataset, GroundTruth> generate_m1(const SimModelSpec& spec);

/// Raw Gaussian design with the same response; misspecified, population
/// target supported on {1,2} with equal components.
std::pair<Dataset, GroundTruth> generate_m2(const SimModelSpec& spec);

std::pair<Dataset, GroundTruth> generate(const SimModelSpec& spec);

/// The two nonzero components (b1*, b2*) of the population-risk minimizer of
/// the two-predictor model, by Gauss-Hermite quadrature. Equal by symmetry.
Eigen::Vector2d population_target_m2(double rho, const LossSpec& loss);

} // namespace gicsel

#endif
