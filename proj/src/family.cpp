#include "gicsel/family.hpp"

#include <algorithm>
#include <ostream>
#include <cmath>
#include <set>
#include <stdexcept>

namespace gicsel {

std::vector<int> order_support(const PenalizedFit& fit) {
    std::vector<int> idx;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j)
        if (fit.coefficients[j] != 0.0) idx.push_back(static_cast<int>(j) + 1);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const double ma = std::abs(fit.coefficients[a - 1]);
        const double mb = std::abs(fit.coefficients[b - 1]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    return idx;
}

NestedFamily nested_from_order(const std::vector<int>& order) {
    {
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("duplicate index in support order");
    }
    NestedFamily family;
    family.source = FamilySource::single_lambda;
    family.models.reserve(order.size() + 1);
    family.models.emplace_back(); // the empty model
    std::vector<int> prefix;
    for (int j : order) {
        prefix.push_back(j);
        family.models.emplace_back(prefix);
    }
    return family;
}

NestedFamily union_families(const PathResult& path) {
    if (path.fits.empty()) throw std::invalid_argument("empty path");
    std::set<std::vector<int>> seen;
    seen.insert(std::vector<int>{}); // always include the empty model
    for (const PenalizedFit& fit : path.fits) {
        std::vector<int> prefix;
        for (int j : order_support(fit)) {
            prefix.push_back(j);
            std::vector<int> sorted = prefix;
            std::sort(sorted.begin(), sorted.end());
            seen.insert(std::move(sorted));
        }
    }
    NestedFamily family;
    family.source = FamilySource::union_over_path;
    family.models.reserve(seen.size());
    for (const auto& idx : seen) family.models.emplace_back(idx);
    std::sort(family.models.begin(), family.models.end(), PredictorSet::size_lex_less);
    return family;
}

void write_family_csv(const NestedFamily& family, std::ostream& out) {
    out << "size,model\n";
    for (const PredictorSet& w : family.models) {
        std::string joined = w.to_string();
        std::replace(joined.begin(), joined.end(), ',', ';');
        out << w.size() << ',' << joined << '\n';
    }
}

} // namespace gicsel
