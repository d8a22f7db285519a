#ifndef GICSEL_METRICS_HPP
#define GICSEL_METRICS_HPP

#include <vector>

#include "gicsel/dataset.hpp"

namespace gicsel {

/// Outcome of one simulation replication, with everything needed for the
/// selection-quality measures.
struct ReplicationRecord {
    PredictorSet selected;
    bool family_contained_truth = false;
    Eigen::VectorXd refit_coefficients; // length p, zero off `selected`
    PredictorSet true_support;
    Eigen::VectorXd true_direction; // length p, zero-padded
};

struct ExperimentReport {
    double p_inc = 0.0;
    double p_equal = 0.0;
    double p_supset = 0.0;
    double angle = 0.0; // radians
    int l = 0;
    std::vector<ReplicationRecord> per_replication;
};

/// arccos of the absolute normalized inner product; pi/2 when either norm
/// vanishes. Arguments must have equal length.
double angle_statistic(const Eigen::VectorXd& true_direction, const Eigen::VectorXd& estimated);

ExperimentReport aggregate(const std::vector<ReplicationRecord>& records);

/// Binomial standard error sqrt(p(1-p)/l) of an empirical proportion.
double binomial_se(double p_hat, int l);

} // namespace gicsel

#endif
