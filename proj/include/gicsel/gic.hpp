#ifndef GICSEL_GIC_HPP
#define GICSEL_GIC_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gicsel/family.hpp"

namespace gicsel {

enum class PenaltyKind { aic, bic, ebic, fan_tang, custom };

/// The model-complexity penalty a_n of the information criterion
/// n*risk + a_n*(|w| + intercept).
struct GicPenalty {
    PenaltyKind kind = PenaltyKind::bic;
    double param = 1.0;           // ebic: d, custom: a_n
    bool counts_intercept = true; // penalize |w|+1 rather than |w|

    static GicPenalty aic() { return {PenaltyKind::aic}; }
    static GicPenalty bic() { return {PenaltyKind::bic}; }
    static GicPenalty ebic(double d) { return {PenaltyKind::ebic, d}; }
    static GicPenalty ebic1() { return ebic(1.0); }
    static GicPenalty fan_tang() { return {PenaltyKind::fan_tang}; }
    static GicPenalty custom(double a_n) { return {PenaltyKind::custom, a_n}; }

    std::string name() const; // "aic", "bic", "ebic1", "ebic:0.5", "fan-tang", ...
};

GicPenalty penalty_from_name(const std::string& name);

/// a_n as a function of n and the predictor count.
double penalty_value(const GicPenalty& pen, int n, int p_n);

enum class Procedure { ss, ssnet, sscv, lft };
std::string procedure_name(Procedure p);
Procedure procedure_from_name(const std::string& name);

struct SelectionOutcome {
    PredictorSet selected;
    PenalizedFit refit; // unpenalized on `selected` (penalized fit for lft)
    std::vector<std::pair<PredictorSet, double>> gic_table;
    Procedure procedure = Procedure::ss;
    std::string failure; // nonempty when every candidate model was unusable
};

/// Cache of unpenalized refits keyed by predictor set, shared across
/// penalties and lambda values within one sample.
class RefitCache {
public:
    const PenalizedFit* find(const PredictorSet& w) const;
    void insert(const PredictorSet& w, PenalizedFit fit);
    std::size_t size() const { return fits_.size(); }

private:
    std::map<std::vector<int>, PenalizedFit> fits_;
};

/// Refit through the cache; warm-starts from a cached subset when available.
const PenalizedFit& refit_cached(const Dataset& d, const LossSpec& spec, const PredictorSet& w,
                                 const SolverConfig& cfg, RefitCache& cache);

/// n*risk(refit(w)) + a_n*(|w| + intercept). Separation-flagged refits give +inf.
double gic(const Dataset& d, const LossSpec& spec, const PredictorSet& w, const GicPenalty& pen,
           const SolverConfig& cfg, RefitCache* cache = nullptr);

struct EvaluatedModel {
    PredictorSet set;
    PenalizedFit fit;
    bool usable = true; // false when the refit flagged separation
};

/// Refits every family member (cached); evaluating several penalties on one
/// family reuses this work.
std::vector<EvaluatedModel> evaluate_family(const Dataset& d, const LossSpec& spec,
                                            const NestedFamily& family, const SolverConfig& cfg,
                                            RefitCache& cache);

/// GIC minimization over evaluated models. Ties go to the smaller model,
/// then lexicographic order.
SelectionOutcome select_among(const std::vector<EvaluatedModel>& models, const Dataset& d,
                              const GicPenalty& pen, Procedure proc);

/// Single-lambda screening (Lasso), magnitude ordering, nested family, GIC.
SelectionOutcome select_ss(const Dataset& d, const LossSpec& spec, double lambda,
                           const GicPenalty& pen, const SolverConfig& cfg);

/// Lambda-grid variant: union of per-lambda nested families, then GIC.
SelectionOutcome select_ssnet(const Dataset& d, const LossSpec& spec, int m, double ratio,
                              const GicPenalty& pen, const SolverConfig& cfg);

/// Lambda chosen by K-fold cross-validation with the one-standard-error
/// rule, then the single-lambda procedure at that lambda.
SelectionOutcome select_sscv(const Dataset& d, const LossSpec& spec, int folds, int m,
                             double ratio, const GicPenalty& pen, const SolverConfig& cfg,
                             std::uint64_t seed);

/// Penalized-fit criterion with a_n = log(log n)*log p over the grid; the
/// selected set is the support of the winning Lasso fit, no refit.
SelectionOutcome select_lft(const Dataset& d, const LossSpec& spec, int m, double ratio,
                            const SolverConfig& cfg);

// Cross-validation internals, exposed for testing.
std::vector<int> cv_fold_assignment(int n, int folds, std::uint64_t seed);
struct CvCurve {
    std::vector<double> lambdas;   // decreasing
    std::vector<double> mean_risk; // mean of fold validation risks
    std::vector<double> se_risk;   // sd over folds / sqrt(K)
};
CvCurve cv_risk_curve(const Dataset& d, const LossSpec& spec, const std::vector<double>& lambdas,
                      const std::vector<int>& fold_ids, const SolverConfig& cfg);
std::size_t pick_lambda_1se(const CvCurve& curve);

} // namespace gicsel

#endif
