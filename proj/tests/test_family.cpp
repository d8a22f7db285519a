#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "gicsel/family.hpp"
#include "gicsel/sim.hpp"

using namespace gicsel;

namespace {

PenalizedFit fit_with(const std::vector<double>& coefs) {
    PenalizedFit fit;
    fit.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(),
                                                         static_cast<Eigen::Index>(coefs.size()));
    fit.converged = true;
    return fit;
}

} // namespace

TEST_CASE("order_support sorts by magnitude with index tie-break") {
    CHECK(order_support(fit_with({0, 3, -5, 0, 1})) == std::vector<int>{3, 2, 5});
    CHECK(order_support(fit_with({0, 0, 0})).empty());
    CHECK(order_support(fit_with({0, 1.5, 0, 0, 0, 0, -1.5})) == std::vector<int>{2, 7});
}

TEST_CASE("nested_from_order builds prefix chains including the empty model") {
    const NestedFamily f = nested_from_order({3, 2, 5});
    REQUIRE(f.models.size() == 4);
    CHECK(f.models[0] == PredictorSet());
    CHECK(f.models[1] == PredictorSet({3}));
    CHECK(f.models[2] == PredictorSet({2, 3}));
    CHECK(f.models[3] == PredictorSet({2, 3, 5}));
    CHECK(f.source == FamilySource::single_lambda);

    CHECK(nested_from_order({}).models.size() == 1);
    CHECK(nested_from_order({7, 1, 4, 2}).models.size() == 5);
    CHECK_THROWS_AS(nested_from_order({1, 2, 1}), std::invalid_argument);
}

TEST_CASE("union_families merges prefix chains with deduplication") {
    PathResult path;
    path.loss = LossSpec::logistic();
    PenalizedFit f1 = fit_with({2, 0, 0});
    f1.lambda = 0.5;
    PenalizedFit f2 = fit_with({3, -1, 0});
    f2.lambda = 0.25;
    path.fits = {f1, f2};
    const NestedFamily family = union_families(path);
    REQUIRE(family.models.size() == 3);
    CHECK(family.models[0] == PredictorSet());
    CHECK(family.models[1] == PredictorSet({1}));
    CHECK(family.models[2] == PredictorSet({1, 2}));
    CHECK(family.source == FamilySource::union_over_path);

    // identical supports and orders collapse to the single-fit family
    PathResult twice;
    twice.loss = LossSpec::logistic();
    twice.fits = {f2, f2};
    CHECK(union_families(twice).models.size() == 3);
}

TEST_CASE("union family members are prefixes of some per-fit order") {
    SimModelSpec spec;
    spec.model = SimModel::m2;
    spec.n = 120;
    spec.p = 25;
    spec.rho = 0.3;
    spec.seed = 17;
    auto [raw, truth] = generate_m2(spec);
    Dataset d = standardize(raw);
    SolverConfig cfg;
    const PathResult path = fit_path(d, LossSpec::logistic(), 10, 0.02, cfg);
    const NestedFamily family = union_families(path);

    std::set<std::vector<int>> prefixes;
    prefixes.insert(std::vector<int>{});
    std::size_t support_total = 0;
    for (const PenalizedFit& fit : path.fits) {
        std::vector<int> prefix;
        const auto order = order_support(fit);
        support_total += order.size();
        for (int j : order) {
            prefix.push_back(j);
            std::vector<int> sorted = prefix;
            std::sort(sorted.begin(), sorted.end());
            prefixes.insert(sorted);
        }
    }
    CHECK(family.models.size() <= 1 + support_total);
    for (const PredictorSet& w : family.models) {
        CHECK(prefixes.count(w.indices()) == 1);
        CHECK(w.size() <= static_cast<int>(d.n()));
    }
    CHECK(family.models[0] == PredictorSet());
}

TEST_CASE("families serialize for audit") {
    PathResult path;
    path.loss = LossSpec::logistic();
    PenalizedFit f = fit_with({0, 2, -3});
    f.lambda = 0.1;
    path.fits = {f};
    std::ostringstream out;
    write_family_csv(union_families(path), out);
    CHECK(out.str() == "size,model\n0,\n1,3\n2,2;3\n");
}

TEST_CASE("separation of coefficient magnitudes puts the true support in the family") {
    // an explicit fit where every active true coefficient dominates the noise
    PenalizedFit fit = fit_with({0.9, 1.1, 0.2, 0.0, 0.05});
    const PredictorSet truth({1, 2});
    double min_active = std::numeric_limits<double>::infinity();
    double max_inactive = 0.0;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
        const double m = std::abs(fit.coefficients[j]);
        if (truth.contains(static_cast<int>(j) + 1))
            min_active = std::min(min_active, m);
        else
            max_inactive = std::max(max_inactive, m);
    }
    REQUIRE(min_active >= max_inactive);
    REQUIRE(truth.subset_of(fit.support()));
    const NestedFamily family = nested_from_order(order_support(fit));
    CHECK(std::find(family.models.begin(), family.models.end(), truth) != family.models.end());
}
