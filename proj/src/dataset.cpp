#include "gicsel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gicsel/errors.hpp"

namespace gicsel {

PredictorSet::PredictorSet(std::vector<int> indices) : idx_(std::move(indices)) {
    for (int j : idx_) {
        if (j < 1) throw std::invalid_argument("predictor indices are 1-based and positive");
    }
    std::sort(idx_.begin(), idx_.end());
    if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end())
        throw std::invalid_argument("duplicate predictor index");
}

bool PredictorSet::contains(int j) const {
    return std::binary_search(idx_.begin(), idx_.end(), j);
}

bool PredictorSet::subset_of(const PredictorSet& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
}

PredictorSet PredictorSet::with(int j) const {
    if (contains(j)) return *this;
    std::vector<int> out = idx_;
    out.insert(std::upper_bound(out.begin(), out.end(), j), j);
    PredictorSet s;
    s.idx_ = std::move(out);
    return s;
}

PredictorSet PredictorSet::without(int j) const {
    PredictorSet s;
    s.idx_.reserve(idx_.size());
    for (int v : idx_)
        if (v != j) s.idx_.push_back(v);
    return s;
}

bool PredictorSet::size_lex_less(const PredictorSet& a, const PredictorSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.idx_.begin(), a.idx_.end(), b.idx_.begin(),
                                        b.idx_.end());
}

std::string PredictorSet::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < idx_.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(idx_[i]);
    }
    return out;
}

namespace {

void validate_core(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() < 1 || x.cols() < 1) throw std::invalid_argument("dataset needs n >= 1, p >= 1");
    if (y.size() != x.rows()) throw std::invalid_argument("response length must match row count");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y[i] == 0.0 || y[i] == 1.0))
            throw data_error("non-binary response at row " + std::to_string(i + 1));
    }
    if (!x.allFinite()) throw data_error("non-finite predictor value");
}

void reject_constant_columns(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) return;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (x.col(j).maxCoeff() == x.col(j).minCoeff())
            throw data_error("constant predictor column x" + std::to_string(j + 1));
    }
}

} // namespace

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y) {
    validate_core(x, y);
    reject_constant_columns(x);
    x_ = std::move(x);
    y_ = std::move(y);
    standardized_ = false;
    column_means_ = Eigen::VectorXd::Zero(x_.cols());
    column_scales_ = Eigen::VectorXd::Ones(x_.cols());
}

Dataset Dataset::with_stats(Eigen::MatrixXd x, Eigen::VectorXd y, bool standardized,
                            Eigen::VectorXd column_means, Eigen::VectorXd column_scales) {
    validate_core(x, y);
    if (column_means.size() != x.cols() || column_scales.size() != x.cols())
        throw std::invalid_argument("standardization statistics must have length p");
    if ((column_scales.array() <= 0.0).any())
        throw std::invalid_argument("column scales must be strictly positive");
    Dataset d;
    d.x_ = std::move(x);
    d.y_ = std::move(y);
    d.standardized_ = standardized;
    d.column_means_ = std::move(column_means);
    d.column_scales_ = std::move(column_scales);
    return d;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, Eigen::Index row, const std::string& column) {
    const std::string s = trim(raw);
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw data_error("non-numeric cell at row " + std::to_string(row) + ", column " + column);
    return value;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& response_column) {
    std::ifstream in(path);
    if (!in) throw data_error("missing file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("empty file: " + path);
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);

    Eigen::Index response_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == response_column) response_idx = static_cast<Eigen::Index>(j);
    if (response_idx < 0) throw data_error("response column '" + response_column + "' not found");

    const Eigen::Index ncol = static_cast<Eigen::Index>(header.size());
    std::vector<std::vector<double>> rows;
    Eigen::Index row_number = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_number;
        std::vector<std::string> cells = split_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != ncol)
            throw data_error("row " + std::to_string(row_number) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(ncol));
        std::vector<double> parsed(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j)
            parsed[j] = parse_cell(cells[j], row_number, header[j]);
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw data_error("no data rows in " + path);

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = ncol - 1;
    if (p < 1) throw data_error("no predictor columns in " + path);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double yv = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(response_idx)];
        if (!(yv == 0.0 || yv == 1.0))
            throw data_error("non-binary response at row " + std::to_string(i + 1));
        y[i] = yv;
        Eigen::Index k = 0;
        for (Eigen::Index j = 0; j < ncol; ++j) {
            if (j == response_idx) continue;
            x(i, k++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    try {
        return Dataset(std::move(x), std::move(y));
    } catch (const data_error& e) {
        throw data_error(std::string(e.what()) + " in " + path);
    }
}

void write_csv(const Dataset& d, const std::string& path, const std::string& response_name) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path);
    out << response_name;
    for (Eigen::Index j = 0; j < d.p(); ++j) out << ",x" << (j + 1);
    out << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", d.y()[i]);
        out << buf;
        for (Eigen::Index j = 0; j < d.p(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", d.x()(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

Dataset standardize(const Dataset& d) {
    if (d.standardized()) throw std::invalid_argument("dataset is already standardized");
    if (d.n() < 2) throw std::invalid_argument("standardize needs n >= 2");
    const Eigen::Index n = d.n(), p = d.p();
    Eigen::VectorXd means = d.x().colwise().mean();
    Eigen::MatrixXd centered = d.x().rowwise() - means.transpose();
    Eigen::VectorXd scales(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        scales[j] = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n - 1));
        if (!(scales[j] > 0.0))
            throw data_error("constant predictor column x" + std::to_string(j + 1));
        centered.col(j) /= scales[j];
    }
    return Dataset::with_stats(std::move(centered), d.y(), true, std::move(means),
                               std::move(scales));
}

std::pair<double, Eigen::VectorXd>
destandardize_coefficients(const Dataset& d, double intercept, const Eigen::VectorXd& coefs) {
    if (!d.standardized()) throw std::invalid_argument("dataset is not standardized");
    if (coefs.size() != d.p()) throw std::invalid_argument("coefficient length mismatch");
    Eigen::VectorXd original = coefs.array() / d.column_scales().array();
    const double b0 = intercept - original.dot(d.column_means());
    return {b0, std::move(original)};
}

} // namespace gicsel
