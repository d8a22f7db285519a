#ifndef GICSEL_DATASET_HPP
#define GICSEL_DATASET_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace gicsel {

/// A set of predictor indices, 1-based (index 0 is reserved for the
/// intercept and never stored). Kept sorted ascending without duplicates.
class PredictorSet {
public:
    PredictorSet() = default;
    explicit PredictorSet(std::vector<int> indices);

    int size() const { return static_cast<int>(idx_.size()); }
    bool empty() const { return idx_.empty(); }
    bool contains(int j) const;
    const std::vector<int>& indices() const { return idx_; }

    bool subset_of(const PredictorSet& other) const;
    bool superset_of(const PredictorSet& other) const { return other.subset_of(*this); }
    PredictorSet with(int j) const;
    PredictorSet without(int j) const;

    friend bool operator==(const PredictorSet& a, const PredictorSet& b) { return a.idx_ == b.idx_; }
    friend bool operator!=(const PredictorSet& a, const PredictorSet& b) { return !(a == b); }

    // Ordering used for families and tie-breaking: cardinality, then lexicographic.
    static bool size_lex_less(const PredictorSet& a, const PredictorSet& b);

    std::string to_string() const; // "1,4,9" ("" for the empty set)

private:
    std::vector<int> idx_;
};

/// Immutable sample: n x p predictor matrix and a {0,1} response vector.
/// Constant predictor columns are rejected outright.
class Dataset {
public:
    Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

    // Trusted constructor for callers that already hold the standardization
    // statistics (standardize(), fold subsetting, synthetic test designs).
    static Dataset with_stats(Eigen::MatrixXd x, Eigen::VectorXd y, bool standardized,
                              Eigen::VectorXd column_means, Eigen::VectorXd column_scales);

    Eigen::Index n() const { return x_.rows(); }
    Eigen::Index p() const { return x_.cols(); }
    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::VectorXd& y() const { return y_; }
    bool standardized() const { return standardized_; }
    const Eigen::VectorXd& column_means() const { return column_means_; }
    const Eigen::VectorXd& column_scales() const { return column_scales_; }

private:
    Dataset() = default;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    bool standardized_ = false;
    Eigen::VectorXd column_means_;
    Eigen::VectorXd column_scales_;
};

/// Reads a CSV file with a header row. The named response column must hold
/// only 0/1; the remaining columns become predictors in file order.
Dataset load_csv(const std::string& path, const std::string& response_column);

/// Writes a dataset as CSV with enough digits to round-trip exactly.
void write_csv(const Dataset& d, const std::string& path, const std::string& response_name = "y");

/// Centers each column and scales to unit sample standard deviation
/// (divisor n-1). Records the original statistics.
Dataset standardize(const Dataset& d);

/// Maps a fit on standardized predictors back to the original scale:
/// returns (b0', b') with b0' + b'.x_orig == intercept + coefs.x_std row-wise.
std::pair<double, Eigen::VectorXd>
destandardize_coefficients(const Dataset& d, double intercept, const Eigen::VectorXd& coefs);

} // namespace gicsel

#endif
