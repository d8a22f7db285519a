#ifndef GICSEL_FAMILY_HPP
#define GICSEL_FAMILY_HPP

#include <vector>

#include "gicsel/dataset.hpp"
#include "gicsel/solver.hpp"

namespace gicsel {

enum class FamilySource { single_lambda, union_over_path };

/// Ordered collection of candidate models. The empty model is always first.
struct NestedFamily {
    std::vector<PredictorSet> models;
    FamilySource source = FamilySource::single_lambda;
};

/// Indices of nonzero coefficients sorted by decreasing |coefficient|,
/// ties broken by ascending index.
std::vector<int> order_support(const PenalizedFit& fit);

/// Prefix chain {} , {j1}, {j1,j2}, ... of an ordered index list.
NestedFamily nested_from_order(const std::vector<int>& order);

/// Union of the per-lambda prefix chains plus the empty model, deduplicated
/// by set equality. Ordered by cardinality then lexicographically.
NestedFamily union_families(const PathResult& path);

/// Audit serialization: one row per model as "size,j1;j2;...".
void write_family_csv(const NestedFamily& family, std::ostream& out);

} // namespace gicsel

#endif
