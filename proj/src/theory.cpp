#include "gicsel/theory.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gicsel/errors.hpp"

namespace gicsel {

SupRegion sup_region_from_name(const std::string& name) {
    if (name == "s") return SupRegion::l1_ball;
    if (name == "s1") return SupRegion::sparse_supersets;
    if (name == "s2") return SupRegion::support_subsets;
    throw std::invalid_argument("unknown sup region: " + name);
}

std::string sup_region_name(SupRegion region) {
    switch (region) {
    case SupRegion::l1_ball: return "s";
    case SupRegion::sparse_supersets: return "s1";
    case SupRegion::support_subsets: return "s2";
    }
    return "?";
}

double sup_deviation_bound(SupRegion region, double L, double r, double t, double s_n, int n,
                           int p, int k_n, int s_star_size) {
    if (!(L > 0.0 && r > 0.0 && t > 0.0 && s_n > 0.0))
        throw std::invalid_argument("bound parameters must be positive");
    if (n < 1 || p < 1) throw std::invalid_argument("need n >= 1, p >= 1");
    const double logp = std::log(static_cast<double>(std::max(p, 2)));
    const double root_n = std::sqrt(static_cast<double>(n));
    double bound = 0.0;
    switch (region) {
    case SupRegion::l1_ball:
        bound = 8.0 * L * r * s_n * std::sqrt(logp) / (t * root_n);
        break;
    case SupRegion::sparse_supersets:
        if (k_n < 1) throw std::invalid_argument("k_n must be positive");
        bound = 8.0 * L * r * s_n * std::sqrt(static_cast<double>(k_n) * logp) / (t * root_n);
        break;
    case SupRegion::support_subsets:
        if (s_star_size < 1) throw std::invalid_argument("support size must be positive");
        bound = 4.0 * L * r * s_n * std::sqrt(static_cast<double>(s_star_size)) / (t * root_n);
        break;
    }
    return std::min(1.0, bound);
}

namespace {

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

// True support of the population minimizer implied by the design.
PredictorSet design_support(SimModel model) {
    return model == SimModel::m1 ? PredictorSet({6, 7, 8, 9}) : PredictorSet({1, 2});
}

// Dataset draw for the theory checks. Unlike the public generators this also
// covers the one-predictor variant of the raw Gaussian design.
Dataset draw_theory_dataset(const SimModelSpec& sim) {
    if (sim.model == SimModel::m2 && sim.p == 1) {
        Eigen::MatrixXd x = sample_ar1_gaussian(sim.n, 1, sim.rho, sim.seed);
        std::mt19937_64 rng(sim.seed + 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::VectorXd y(sim.n);
        for (int i = 0; i < sim.n; ++i) {
            const double t = x(i, 0);
            y[i] = unif(rng) < sigmoid(t * t * t) ? 1.0 : 0.0;
        }
        return Dataset(std::move(x), std::move(y));
    }
    return generate(sim).first;
}

// Intercept-free empirical risk at b.
double linear_risk(const LossSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& b) {
    return empirical_risk_on(spec, x, y, 0.0, b);
}

std::vector<Eigen::VectorXd> build_probes(SupRegion region, const Eigen::VectorXd& beta_star,
                                          const TheoryCheckConfig& cfg,
                                          const PredictorSet& support, std::uint64_t seed) {
    const int p = static_cast<int>(beta_star.size());
    const double r = cfg.r;
    std::vector<Eigen::VectorXd> probes;
    probes.reserve(static_cast<std::size_t>(cfg.sup_probes));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto push = [&](Eigen::VectorXd b) {
        if (static_cast<int>(probes.size()) < cfg.sup_probes) probes.push_back(std::move(b));
    };

    switch (region) {
    case SupRegion::l1_ball: {
        push(beta_star);
        for (int j = 0; j < p && static_cast<int>(probes.size()) < cfg.sup_probes; ++j) {
            Eigen::VectorXd b = beta_star;
            b[j] += r;
            push(b);
            b[j] -= 2.0 * r;
            push(b);
        }
        while (static_cast<int>(probes.size()) < cfg.sup_probes) {
            // random direction on the l1 sphere, alternately boundary and interior
            Eigen::VectorXd dir(p);
            double norm1 = 0.0;
            for (int j = 0; j < p; ++j) {
                const double e = -std::log(std::max(1e-300, unif(rng)));
                dir[j] = (unif(rng) < 0.5 ? -1.0 : 1.0) * e;
                norm1 += e;
            }
            dir /= norm1;
            const double scale = (probes.size() % 2 == 0) ? 1.0 : unif(rng);
            push(beta_star + (r * scale) * dir);
        }
        break;
    }
    case SupRegion::sparse_supersets: {
        if (cfg.k_n <= support.size() || p <= support.size()) break; // no strict superset fits
        push(beta_star);
        std::vector<int> off;
        for (int j = 1; j <= p; ++j)
            if (!support.contains(j)) off.push_back(j);
        // axis points on the l2 sphere, support coordinates first
        for (int j : support.indices()) {
            Eigen::VectorXd b = beta_star;
            b[j - 1] += r;
            push(b);
            b[j - 1] -= 2.0 * r;
            push(b);
        }
        for (int j : off) {
            if (static_cast<int>(probes.size()) >= cfg.sup_probes) break;
            Eigen::VectorXd b = beta_star;
            b[j - 1] += r;
            push(b);
            b[j - 1] -= 2.0 * r;
            push(b);
        }
        const int extra = std::min(cfg.k_n - support.size(), static_cast<int>(off.size()));
        while (static_cast<int>(probes.size()) < cfg.sup_probes) {
            std::vector<int> pool = off;
            for (int take = 0; take < extra; ++take) {
                std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(take),
                                                                pool.size() - 1);
                std::swap(pool[static_cast<std::size_t>(take)], pool[pick(rng)]);
            }
            Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
            for (int j : support.indices()) delta[j - 1] = gauss(rng);
            for (int tk = 0; tk < extra; ++tk) delta[pool[static_cast<std::size_t>(tk)] - 1] = gauss(rng);
            const double norm = delta.norm();
            if (norm == 0.0) continue;
            const double scale = (probes.size() % 2 == 0) ? 1.0 : unif(rng);
            push(beta_star + (r * scale / norm) * delta);
        }
        break;
    }
    case SupRegion::support_subsets: {
        const auto& s = support.indices();
        const int k = static_cast<int>(s.size());
        // enumerate proper subsets of the support
        std::vector<std::vector<int>> subsets;
        for (int mask = 0; mask < (1 << k) - 1; ++mask) {
            std::vector<int> pi;
            for (int b = 0; b < k; ++b)
                if (mask & (1 << b)) pi.push_back(s[static_cast<std::size_t>(b)]);
            subsets.push_back(std::move(pi));
        }
        std::vector<std::pair<std::vector<int>, double>> feasible; // (subset, residual radius)
        for (const auto& pi : subsets) {
            double fixed2 = 0.0;
            for (int j : s) {
                if (std::find(pi.begin(), pi.end(), j) == pi.end())
                    fixed2 += beta_star[j - 1] * beta_star[j - 1];
            }
            if (fixed2 <= r * r) feasible.emplace_back(pi, std::sqrt(r * r - fixed2));
        }
        if (feasible.empty()) break;
        for (const auto& [pi, radius] : feasible) {
            Eigen::VectorXd corner = Eigen::VectorXd::Zero(p);
            for (int j : pi) corner[j - 1] = beta_star[j - 1];
            push(corner); // the zeroed-out point itself
            for (int j : pi) {
                Eigen::VectorXd b = corner;
                b[j - 1] += radius;
                push(b);
                b[j - 1] -= 2.0 * radius;
                push(b);
            }
        }
        bool any_free = false;
        for (const auto& [pi, radius] : feasible) any_free = any_free || !pi.empty();
        std::size_t which = 0;
        while (any_free && static_cast<int>(probes.size()) < cfg.sup_probes) {
            const auto& [pi, radius] = feasible[which % feasible.size()];
            ++which;
            if (pi.empty()) continue;
            Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
            for (int j : pi) delta[j - 1] = gauss(rng);
            const double norm = delta.norm();
            if (norm == 0.0) continue;
            const double scale = (which % 2 == 0) ? 1.0 : unif(rng);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
            for (int j : pi) b[j - 1] = beta_star[j - 1] + (radius * scale / norm) * delta[j - 1];
            push(b);
        }
        break;
    }
    }
    return probes;
}

} // namespace

double estimate_sup_deviation(const SimModelSpec& sim, const Eigen::VectorXd& beta_star,
                              const LossSpec& spec, const TheoryCheckConfig& cfg,
                              SupRegion region) {
    if (beta_star.size() != sim.p) throw std::invalid_argument("beta_star length mismatch");
    if (cfg.sup_probes < 1) throw std::invalid_argument("need at least one probe");
    if (!(cfg.r >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
    if (cfg.r == 0.0) return 0.0; // only the center is feasible and W(b*) = W_n(b*) = 0

    const PopulationModel population(sim.model, sim.p, sim.rho, spec);
    const PredictorSet support = design_support(sim.model);
    const std::uint64_t probe_seed =
        sim.seed * 0x100000001b3ULL + 0xcbf29ce484222325ULL + static_cast<std::uint64_t>(region);
    const std::vector<Eigen::VectorXd> probes =
        build_probes(region, beta_star, cfg, support, probe_seed);
    if (probes.empty()) return 0.0;

    const Dataset data = draw_theory_dataset(sim);
    const double pop_star = population.risk_no_intercept(beta_star);
    const double emp_star = linear_risk(spec, data.x(), data.y(), beta_star);

    double best = 0.0;
    for (const Eigen::VectorXd& b : probes) {
        const double w = population.risk_no_intercept(b) - pop_star;
        const double wn = linear_risk(spec, data.x(), data.y(), b) - emp_star;
        best = std::max(best, std::abs(w - wn));
    }
    return best;
}

TailCheck check_tail_bound(const LossSpec& spec, const SimModelSpec& sim,
                           const TheoryCheckConfig& cfg, SupRegion region) {
    const auto lipschitz = spec.lipschitz();
    if (!lipschitz) throw std::invalid_argument("bound inapplicable: loss has unbounded slope");
    if (cfg.mc_samples < 1) throw std::invalid_argument("need at least one Monte Carlo sample");
    const PredictorSet support = design_support(sim.model);
    TailCheck result;
    result.bound = sup_deviation_bound(region, *lipschitz, cfg.r, cfg.t, cfg.s_n, sim.n, sim.p,
                                       cfg.k_n, support.size());
    if (result.bound >= 1.0) throw numeric_error("vacuous configuration: bound >= 1");

    Eigen::VectorXd beta_star;
    if (sim.model == SimModel::m1) {
        GroundTruth truth;
        truth.true_support = support;
        truth.true_direction = Eigen::Vector4d(3.0, 3.0, 1.0, 1.0);
        beta_star = truth.padded_direction(sim.p);
    } else {
        const Eigen::Vector2d eta = population_target_m2(sim.rho, spec);
        beta_star = Eigen::VectorXd::Zero(sim.p);
        beta_star[0] = eta[0];
        if (sim.p >= 2) beta_star[1] = eta[1];
    }

    int exceed = 0;
    for (int k = 0; k < cfg.mc_samples; ++k) {
        SimModelSpec draw = sim;
        draw.seed = sim.seed + static_cast<std::uint64_t>(k);
        if (estimate_sup_deviation(draw, beta_star, spec, cfg, region) > cfg.t) ++exceed;
    }
    result.empirical = static_cast<double>(exceed) / cfg.mc_samples;
    result.se = std::sqrt(std::max(0.0, result.empirical * (1.0 - result.empirical)) /
                          cfg.mc_samples);
    result.pass = result.empirical <= result.bound + 2.0 * result.se;
    return result;
}

double check_separation(const LossSpec& spec, const SimModelSpec& sim, double lambda,
                        int replications, const SolverConfig& cfg) {
    if (replications < 1) throw std::invalid_argument("need at least one replication");
    int separated = 0;
    for (int k = 0; k < replications; ++k) {
        SimModelSpec draw = sim;
        draw.seed = sim.seed + static_cast<std::uint64_t>(k);
        auto [data, truth] = generate(draw);
        const Dataset std_data = standardize(data);
        const PenalizedFit fit = fit_lasso(std_data, spec, lambda, cfg);
        double min_active = std::numeric_limits<double>::infinity();
        double max_inactive = 0.0;
        for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
            const double mag = std::abs(fit.coefficients[j]);
            if (truth.true_support.contains(static_cast<int>(j) + 1))
                min_active = std::min(min_active, mag);
            else
                max_inactive = std::max(max_inactive, mag);
        }
        if (min_active >= max_inactive) ++separated;
    }
    return static_cast<double>(separated) / replications;
}

double estimate_cone_min_rayleigh(const Eigen::MatrixXd& h, const PredictorSet& support,
                                  double epsilon, int probes, std::uint64_t seed) {
    const Eigen::Index p = h.rows();
    if (h.cols() != p) throw std::invalid_argument("matrix must be square");
    if ((h - h.transpose()).lpNorm<Eigen::Infinity>() > 1e-10)
        throw std::invalid_argument("matrix must be symmetric");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("matrix must be nonnegative definite");
    }
    if (support.empty()) throw std::invalid_argument("support must be nonempty");
    if (support.indices().back() > static_cast<int>(p))
        throw std::invalid_argument("support index exceeds dimension");
    if (probes < 1) throw std::invalid_argument("need at least one probe");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

    std::vector<bool> on(static_cast<std::size_t>(p), false);
    for (int j : support.indices()) on[static_cast<std::size_t>(j - 1)] = true;
    const double cone_factor = 3.0 + epsilon;

    auto project = [&](Eigen::VectorXd& d) {
        double on1 = 0.0, off1 = 0.0;
        for (Eigen::Index j = 0; j < p; ++j)
            (on[static_cast<std::size_t>(j)] ? on1 : off1) += std::abs(d[j]);
        if (on1 <= 0.0) return false;
        const double cap = cone_factor * on1;
        if (off1 > cap) {
            const double shrink = cap / off1;
            for (Eigen::Index j = 0; j < p; ++j)
                if (!on[static_cast<std::size_t>(j)]) d[j] *= shrink;
        }
        return true;
    };

    auto quotient = [&](const Eigen::VectorXd& d) { return d.dot(h * d) / d.squaredNorm(); };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();

    for (int probe = 0; probe < probes; ++probe) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
        double on_norm2 = 0.0;
        for (int j : support.indices()) {
            d[j - 1] = gauss(rng);
            on_norm2 += d[j - 1] * d[j - 1];
        }
        if (on_norm2 == 0.0) continue;
        const double on_scale = 1.0 / std::sqrt(on_norm2);
        for (int j : support.indices()) d[j - 1] *= on_scale;
        double on1 = 0.0;
        for (int j : support.indices()) on1 += std::abs(d[j - 1]);
        Eigen::VectorXd off = Eigen::VectorXd::Zero(p);
        double off1 = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (on[static_cast<std::size_t>(j)]) continue;
            off[j] = gauss(rng);
            off1 += std::abs(off[j]);
        }
        if (off1 > 0.0) d += (cone_factor * unif(rng) * on1 / off1) * off;

        // local descent on the Rayleigh quotient inside the cone
        double q = quotient(d);
        double step = 1.0;
        for (int it = 0; it < 200; ++it) {
            Eigen::VectorXd grad = 2.0 * (h * d - q * d) / d.squaredNorm();
            const double gnorm = grad.norm();
            if (gnorm < 1e-13) break;
            bool improved = false;
            for (int ls = 0; ls < 25; ++ls) {
                Eigen::VectorXd cand = d - step * grad;
                if (project(cand) && cand.squaredNorm() > 1e-300) {
                    const double qc = quotient(cand);
                    if (qc < q - 1e-15) {
                        d = cand;
                        q = qc;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!improved) break;
            step *= 2.0;
        }
        best = std::min(best, q);
    }
    return best;
}

SubgaussianCheck check_subgaussian_product(double sigma, double m_bound,
                                           const std::vector<double>& t_grid, int mc_samples,
                                           std::uint64_t seed) {
    if (!(sigma > 0.0) || !(m_bound > 0.0))
        throw std::invalid_argument("sigma and the bound must be positive");
    if (t_grid.empty()) throw std::invalid_argument("empty t grid");
    if (mc_samples < 2) throw std::invalid_argument("need at least two samples");
    for (double t : t_grid) {
        if (!std::isfinite(t)) throw std::invalid_argument("non-finite grid point");
        if (std::abs(t) * m_bound * sigma > 3.0)
            throw std::invalid_argument("unstable grid point: |t| M sigma > 3");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    std::uniform_real_distribution<double> unif(-m_bound, m_bound);
    std::vector<double> product(static_cast<std::size_t>(mc_samples));
    for (int i = 0; i < mc_samples; ++i) product[static_cast<std::size_t>(i)] = gauss(rng) * unif(rng);

    SubgaussianCheck check;
    check.pass = true;
    for (double t : t_grid) {
        double mean = 0.0;
        for (double st : product) mean += std::exp(t * st);
        mean /= mc_samples;
        double var = 0.0;
        for (double st : product) {
            const double dev = std::exp(t * st) - mean;
            var += dev * dev;
        }
        var /= (mc_samples - 1);
        SubgaussianCheckPoint point;
        point.t = t;
        point.empirical_mgf = mean;
        point.bound = std::exp(0.5 * t * t * m_bound * m_bound * sigma * sigma);
        point.se = std::sqrt(var / mc_samples) / mean;
        point.pass = mean <= point.bound * (1.0 + 3.0 * point.se);
        check.pass = check.pass && point.pass;
        check.points.push_back(point);
    }
    return check;
}

} // namespace gicsel
