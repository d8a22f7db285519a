#include "gicsel/gic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "gicsel/errors.hpp"

namespace gicsel {

std::string GicPenalty::name() const {
    switch (kind) {
    case PenaltyKind::aic: return "aic";
    case PenaltyKind::bic: return "bic";
    case PenaltyKind::ebic: {
        if (param == 1.0) return "ebic1";
        std::ostringstream os;
        os << "ebic:" << param;
        return os.str();
    }
    case PenaltyKind::fan_tang: return "fan-tang";
    case PenaltyKind::custom: {
        std::ostringstream os;
        os << "custom:" << param;
        return os.str();
    }
    }
    return "?";
}

GicPenalty penalty_from_name(const std::string& name) {
    if (name == "aic") return GicPenalty::aic();
    if (name == "bic") return GicPenalty::bic();
    if (name == "ebic1") return GicPenalty::ebic1();
    if (name == "fan-tang" || name == "fan_tang") return GicPenalty::fan_tang();
    if (name.rfind("ebic:", 0) == 0) return GicPenalty::ebic(std::stod(name.substr(5)));
    if (name.rfind("custom:", 0) == 0) return GicPenalty::custom(std::stod(name.substr(7)));
    throw std::invalid_argument("unknown penalty: " + name);
}

double penalty_value(const GicPenalty& pen, int n, int p_n) {
    if (n < 2) throw std::invalid_argument("penalty needs n >= 2");
    if (p_n < 1) throw std::invalid_argument("penalty needs p >= 1");
    double a_n = 0.0;
    switch (pen.kind) {
    case PenaltyKind::aic: a_n = 2.0; break;
    case PenaltyKind::bic: a_n = std::log(static_cast<double>(n)); break;
    case PenaltyKind::ebic:
        if (!(pen.param > 0.0)) throw std::invalid_argument("ebic needs d > 0");
        a_n = std::log(static_cast<double>(n)) + 2.0 * pen.param * std::log(static_cast<double>(p_n));
        break;
    case PenaltyKind::fan_tang:
        a_n = std::log(std::log(static_cast<double>(n))) * std::log(static_cast<double>(p_n));
        break;
    case PenaltyKind::custom: a_n = pen.param; break;
    }
    if (!(a_n > 0.0))
        throw std::invalid_argument("penalty is nonpositive for n=" + std::to_string(n) +
                                    ", p=" + std::to_string(p_n));
    return a_n;
}

std::string procedure_name(Procedure p) {
    switch (p) {
    case Procedure::ss: return "ss";
    case Procedure::ssnet: return "ssnet";
    case Procedure::sscv: return "sscv";
    case Procedure::lft: return "lft";
    }
    return "?";
}

Procedure procedure_from_name(const std::string& name) {
    if (name == "ss") return Procedure::ss;
    if (name == "ssnet") return Procedure::ssnet;
    if (name == "sscv") return Procedure::sscv;
    if (name == "lft") return Procedure::lft;
    throw std::invalid_argument("unknown procedure: " + name);
}

const PenalizedFit* RefitCache::find(const PredictorSet& w) const {
    auto it = fits_.find(w.indices());
    return it == fits_.end() ? nullptr : &it->second;
}

void RefitCache::insert(const PredictorSet& w, PenalizedFit fit) {
    fits_.emplace(w.indices(), std::move(fit));
}

const PenalizedFit& refit_cached(const Dataset& d, const LossSpec& spec, const PredictorSet& w,
                                 const SolverConfig& cfg, RefitCache& cache) {
    if (const PenalizedFit* hit = cache.find(w)) return *hit;
    const PenalizedFit* warm = nullptr;
    for (int j : w.indices()) {
        warm = cache.find(w.without(j));
        if (warm && warm->converged) break;
        warm = nullptr;
    }
    PenalizedFit fit = refit(d, spec, w, cfg, warm);
    cache.insert(w, std::move(fit));
    return *cache.find(w);
}

double gic(const Dataset& d, const LossSpec& spec, const PredictorSet& w, const GicPenalty& pen,
           const SolverConfig& cfg, RefitCache* cache) {
    RefitCache local;
    const PenalizedFit& fit = refit_cached(d, spec, w, cfg, cache ? *cache : local);
    if (fit.flag == "separation") return std::numeric_limits<double>::infinity();
    const double a_n = penalty_value(pen, static_cast<int>(d.n()), static_cast<int>(d.p()));
    const double complexity = static_cast<double>(w.size()) + (pen.counts_intercept ? 1.0 : 0.0);
    return static_cast<double>(d.n()) * fit.objective + a_n * complexity;
}

std::vector<EvaluatedModel> evaluate_family(const Dataset& d, const LossSpec& spec,
                                            const NestedFamily& family, const SolverConfig& cfg,
                                            RefitCache& cache) {
    std::vector<EvaluatedModel> out;
    out.reserve(family.models.size());
    for (const PredictorSet& w : family.models) {
        EvaluatedModel em;
        em.set = w;
        if (w.size() + 1 > static_cast<int>(d.n())) {
            // the support cap admits |w| = n, but such models are not
            // identifiable; they compete with an infinite criterion value
            em.fit.coefficients = Eigen::VectorXd::Zero(d.p());
            em.fit.flag = "unidentifiable";
            em.usable = false;
        } else {
            em.fit = refit_cached(d, spec, w, cfg, cache);
            em.usable = em.fit.flag != "separation";
        }
        out.push_back(std::move(em));
    }
    return out;
}

SelectionOutcome select_among(const std::vector<EvaluatedModel>& models, const Dataset& d,
                              const GicPenalty& pen, Procedure proc) {
    if (models.empty()) throw std::invalid_argument("empty model family");
    const double a_n = penalty_value(pen, static_cast<int>(d.n()), static_cast<int>(d.p()));
    const double n = static_cast<double>(d.n());
    const double intercept_count = pen.counts_intercept ? 1.0 : 0.0;

    SelectionOutcome outcome;
    outcome.procedure = proc;
    outcome.gic_table.reserve(models.size());
    const EvaluatedModel* best = nullptr;
    double best_value = std::numeric_limits<double>::infinity();
    for (const EvaluatedModel& em : models) {
        const double value =
            em.usable ? n * em.fit.objective + a_n * (static_cast<double>(em.set.size()) + intercept_count)
                      : std::numeric_limits<double>::infinity();
        outcome.gic_table.emplace_back(em.set, value);
        const bool better =
            value < best_value ||
            (value == best_value && best != nullptr &&
             PredictorSet::size_lex_less(em.set, best->set));
        if (best == nullptr || better) {
            if (value <= best_value) {
                best = &em;
                best_value = value;
            }
        }
    }
    if (!std::isfinite(best_value)) {
        outcome.failure = "no usable candidate model";
        // fall through with the first (smallest) model as placeholder
        best = &models.front();
    }
    outcome.selected = best->set;
    outcome.refit = best->fit;
    return outcome;
}

namespace {

void require_nondegenerate(const Dataset& d, const LossSpec& spec) {
    if (spec.kind != LossKind::logistic) return;
    const double s = d.y().sum();
    if (s == 0.0 || s == static_cast<double>(d.n())) throw data_error("degenerate response");
}

} // namespace

SelectionOutcome select_ss(const Dataset& d, const LossSpec& spec, double lambda,
                           const GicPenalty& pen, const SolverConfig& cfg) {
    if (!d.standardized()) throw std::invalid_argument("select_ss requires standardized data");
    require_nondegenerate(d, spec);
    const PenalizedFit fit = fit_lasso(d, spec, lambda, cfg);
    const NestedFamily family = nested_from_order(order_support(fit));
    RefitCache cache;
    const auto evaluated = evaluate_family(d, spec, family, cfg, cache);
    return select_among(evaluated, d, pen, Procedure::ss);
}

SelectionOutcome select_ssnet(const Dataset& d, const LossSpec& spec, int m, double ratio,
                              const GicPenalty& pen, const SolverConfig& cfg) {
    if (!d.standardized()) throw std::invalid_argument("select_ssnet requires standardized data");
    require_nondegenerate(d, spec);
    const PathResult path = fit_path(d, spec, m, ratio, cfg);
    const NestedFamily family = union_families(path);
    RefitCache cache;
    const auto evaluated = evaluate_family(d, spec, family, cfg, cache);
    return select_among(evaluated, d, pen, Procedure::ssnet);
}

std::vector<int> cv_fold_assignment(int n, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    if (folds > n) throw std::invalid_argument("more folds than observations");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i % folds;
    return ids;
}

CvCurve cv_risk_curve(const Dataset& d, const LossSpec& spec, const std::vector<double>& lambdas,
                      const std::vector<int>& fold_ids, const SolverConfig& cfg) {
    if (lambdas.empty()) throw std::invalid_argument("empty lambda grid");
    if (static_cast<Eigen::Index>(fold_ids.size()) != d.n())
        throw std::invalid_argument("fold assignment length mismatch");
    const int folds = *std::max_element(fold_ids.begin(), fold_ids.end()) + 1;
    const std::size_t m = lambdas.size();

    // fold_risks[f][i]: validation risk of fold f at lambda i
    std::vector<std::vector<double>> fold_risks(
        static_cast<std::size_t>(folds), std::vector<double>(m, 0.0));

    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, validation;
        for (int i = 0; i < static_cast<int>(fold_ids.size()); ++i)
            (fold_ids[static_cast<std::size_t>(i)] == f ? validation : train).push_back(i);
        if (train.empty() || validation.empty())
            throw std::invalid_argument("fold without observations");

        Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), d.p());
        Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            xt.row(static_cast<Eigen::Index>(i)) = d.x().row(train[i]);
            yt[static_cast<Eigen::Index>(i)] = d.y()[train[i]];
        }
        Eigen::MatrixXd xv(static_cast<Eigen::Index>(validation.size()), d.p());
        Eigen::VectorXd yv(static_cast<Eigen::Index>(validation.size()));
        for (std::size_t i = 0; i < validation.size(); ++i) {
            xv.row(static_cast<Eigen::Index>(i)) = d.x().row(validation[i]);
            yv[static_cast<Eigen::Index>(i)] = d.y()[validation[i]];
        }
        const Dataset dt = Dataset::with_stats(std::move(xt), std::move(yt), true,
                                               d.column_means(), d.column_scales());

        PenalizedFit previous;
        bool have_previous = false;
        for (std::size_t i = 0; i < m; ++i) {
            PenalizedFit fit =
                fit_lasso(dt, spec, lambdas[i], cfg, have_previous ? &previous : nullptr);
            fold_risks[static_cast<std::size_t>(f)][i] =
                empirical_risk_on(spec, xv, yv, fit.intercept, fit.coefficients);
            previous = std::move(fit);
            have_previous = true;
        }
    }

    CvCurve curve;
    curve.lambdas = lambdas;
    curve.mean_risk.resize(m);
    curve.se_risk.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double mean = 0.0;
        for (int f = 0; f < folds; ++f) mean += fold_risks[static_cast<std::size_t>(f)][i];
        mean /= static_cast<double>(folds);
        double var = 0.0;
        for (int f = 0; f < folds; ++f) {
            const double dev = fold_risks[static_cast<std::size_t>(f)][i] - mean;
            var += dev * dev;
        }
        var = folds > 1 ? var / static_cast<double>(folds - 1) : 0.0;
        curve.mean_risk[i] = mean;
        curve.se_risk[i] = std::sqrt(var / static_cast<double>(folds));
    }
    return curve;
}

std::size_t pick_lambda_1se(const CvCurve& curve) {
    if (curve.mean_risk.empty()) throw std::invalid_argument("empty CV curve");
    std::size_t imin = 0;
    for (std::size_t i = 1; i < curve.mean_risk.size(); ++i)
        if (curve.mean_risk[i] < curve.mean_risk[imin]) imin = i;
    const double threshold = curve.mean_risk[imin] + curve.se_risk[imin];
    for (std::size_t i = 0; i < curve.mean_risk.size(); ++i)
        if (curve.mean_risk[i] <= threshold) return i; // lambdas decrease: first hit is largest
    return imin;
}

SelectionOutcome select_sscv(const Dataset& d, const LossSpec& spec, int folds, int m,
                             double ratio, const GicPenalty& pen, const SolverConfig& cfg,
                             std::uint64_t seed) {
    if (!d.standardized()) throw std::invalid_argument("select_sscv requires standardized data");
    if (folds < 2 || folds > static_cast<int>(d.n()))
        throw std::invalid_argument("folds must lie in [2, n]");
    require_nondegenerate(d, spec);
    const PathResult path = fit_path(d, spec, m, ratio, cfg);
    std::vector<double> grid;
    grid.reserve(path.fits.size());
    for (const auto& fit : path.fits) grid.push_back(fit.lambda);
    const std::vector<int> fold_ids = cv_fold_assignment(static_cast<int>(d.n()), folds, seed);
    const CvCurve curve = cv_risk_curve(d, spec, grid, fold_ids, cfg);
    const std::size_t chosen = pick_lambda_1se(curve);

    const NestedFamily family = nested_from_order(order_support(path.fits[chosen]));
    RefitCache cache;
    const auto evaluated = evaluate_family(d, spec, family, cfg, cache);
    return select_among(evaluated, d, pen, Procedure::sscv);
}

SelectionOutcome select_lft(const Dataset& d, const LossSpec& spec, int m, double ratio,
                            const SolverConfig& cfg) {
    if (!d.standardized()) throw std::invalid_argument("select_lft requires standardized data");
    require_nondegenerate(d, spec);
    const double a_n =
        penalty_value(GicPenalty::fan_tang(), static_cast<int>(d.n()), static_cast<int>(d.p()));
    const PathResult path = fit_path(d, spec, m, ratio, cfg);
    const double n = static_cast<double>(d.n());

    SelectionOutcome outcome;
    outcome.procedure = Procedure::lft;
    const PenalizedFit* best = nullptr;
    PredictorSet best_set;
    double best_value = std::numeric_limits<double>::infinity();
    for (const PenalizedFit& fit : path.fits) {
        const PredictorSet support = fit.support();
        const double risk = empirical_risk(spec, d, fit.intercept, fit.coefficients);
        const double value = n * risk + a_n * (static_cast<double>(support.size()) + 1.0);
        outcome.gic_table.emplace_back(support, value);
        const bool better =
            value < best_value ||
            (value == best_value && best != nullptr && PredictorSet::size_lex_less(support, best_set));
        if (best == nullptr || better) {
            if (value <= best_value) {
                best = &fit;
                best_set = support;
                best_value = value;
            }
        }
    }
    if (best == nullptr) throw numeric_error("empty lambda path");
    outcome.selected = best_set;
    outcome.refit = *best;
    return outcome;
}

} // namespace gicsel
