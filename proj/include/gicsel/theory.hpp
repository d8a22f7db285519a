#ifndef GICSEL_THEORY_HPP
#define GICSEL_THEORY_HPP

#include <cstdint>
#include <vector>

#include "gicsel/loss.hpp"
#include "gicsel/sim.hpp"
#include "gicsel/solver.hpp"

namespace gicsel {

struct TheoryCheckConfig {
    int mc_samples = 200;     // datasets drawn
    int sup_probes = 128;     // points probed per supremum
    double r = 0.5;           // ball radius
    double t = 0.25;          // tail threshold
    int k_n = 2;              // sparsity cap for the sparse-superset region
    double epsilon_cone = 0.5;
    double s_n = 1.0;         // subgaussianity scale of the predictors
};

/// Region the centered-risk supremum ranges over: the l1 ball around the
/// population minimizer, sparse l2 neighbourhoods on supersets of its
/// support, or l2 neighbourhoods supported on proper subsets of it.
enum class SupRegion { l1_ball, sparse_supersets, support_subsets };

SupRegion sup_region_from_name(const std::string& name); // "s", "s1", "s2"
std::string sup_region_name(SupRegion region);

/// Closed-form upper bound on P(sup-deviation > t), capped at one.
/// Requires a finite Lipschitz constant L (errors for quadratic loss).
double sup_deviation_bound(SupRegion region, double L, double r, double t, double s_n, int n,
                           int p, int k_n, int s_star_size);

/// Lower-bound estimate of the supremum of |W(b) - W_n(b)| over the region,
/// from one generated dataset: maximum over deterministic extreme points and
/// seeded random probes. W is evaluated by quadrature.
double estimate_sup_deviation(const SimModelSpec& sim, const Eigen::VectorXd& beta_star,
                              const LossSpec& spec, const TheoryCheckConfig& cfg,
                              SupRegion region);

struct TailCheck {
    double empirical = 0.0; // fraction of datasets whose estimate exceeded t
    double bound = 0.0;
    double se = 0.0;
    bool pass = false;
};

/// Monte Carlo validation of the tail bound. The sup estimate is itself a
/// lower bound, so a failure here is a genuine violation signal.
TailCheck check_tail_bound(const LossSpec& spec, const SimModelSpec& sim,
                           const TheoryCheckConfig& cfg, SupRegion region);

/// Fraction of replications where every active |coefficient| of the Lasso
/// fit at `lambda` weakly dominates every inactive one.
double check_separation(const LossSpec& spec, const SimModelSpec& sim, double lambda,
                        int replications, const SolverConfig& cfg = SolverConfig{});

/// Upper-bound estimate of the minimal Rayleigh quotient of h over the cone
/// { ||d_off||_1 <= (3+epsilon) ||d_on||_1 }: random cone members refined by
/// projected descent.
double estimate_cone_min_rayleigh(const Eigen::MatrixXd& h, const PredictorSet& support,
                                  double epsilon, int probes, std::uint64_t seed);

struct SubgaussianCheckPoint {
    double t = 0.0;
    double empirical_mgf = 0.0;
    double bound = 0.0;
    double se = 0.0; // relative standard error of the MGF estimate
    bool pass = false;
};

struct SubgaussianCheck {
    bool pass = false;
    std::vector<SubgaussianCheckPoint> points;
};

/// Checks E exp(t*S*T) <= exp(t^2 M^2 sigma^2 / 2) for S ~ N(0, sigma^2) and
/// independent T ~ U[-M, M], with Monte Carlo slack 3 relative SEs.
SubgaussianCheck check_subgaussian_product(double sigma, double m_bound,
                                           const std::vector<double>& t_grid, int mc_samples,
                                           std::uint64_t seed);

} // namespace gicsel

#endif
