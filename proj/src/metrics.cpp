#include "gicsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gicsel {

double angle_statistic(const Eigen::VectorXd& true_direction, const Eigen::VectorXd& estimated) {
    if (true_direction.size() != estimated.size())
        throw std::invalid_argument("angle arguments must have equal length");
    const double norms = true_direction.norm() * estimated.norm();
    if (norms == 0.0) return M_PI / 2.0; // cosine defined as zero
    const double c = std::min(1.0, std::abs(true_direction.dot(estimated)) / norms);
    return std::acos(c);
}

double binomial_se(double p_hat, int l) {
    if (l <= 0) throw std::invalid_argument("need at least one replication");
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(l));
}

ExperimentReport aggregate(const std::vector<ReplicationRecord>& records) {
    if (records.empty()) throw std::invalid_argument("no replication records");
    ExperimentReport report;
    report.l = static_cast<int>(records.size());
    int inc = 0, equal = 0, supset = 0;
    double angle_sum = 0.0;
    for (const ReplicationRecord& r : records) {
        if (r.family_contained_truth) ++inc;
        if (r.selected == r.true_support) ++equal;
        if (r.selected.superset_of(r.true_support)) ++supset;
        angle_sum += angle_statistic(r.true_direction, r.refit_coefficients);
    }
    report.p_inc = static_cast<double>(inc) / report.l;
    report.p_equal = static_cast<double>(equal) / report.l;
    report.p_supset = static_cast<double>(supset) / report.l;
    report.angle = angle_sum / report.l;
    report.per_replication = records;
    return report;
}

} // namespace gicsel
