#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "gicsel/dataset.hpp"
#include "gicsel/errors.hpp"
#include "gicsel/sim.hpp"

using namespace gicsel;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("predictor sets are sorted, unique and 1-based") {
    PredictorSet s({3, 1, 2});
    CHECK(s.indices() == std::vector<int>{1, 2, 3});
    CHECK(s.contains(2));
    CHECK_FALSE(s.contains(4));
    CHECK_THROWS_AS(PredictorSet({1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(PredictorSet({0}), std::invalid_argument);
    CHECK(PredictorSet({1}).subset_of(s));
    CHECK(s.superset_of(PredictorSet({1, 3})));
    CHECK(s.with(5).indices() == std::vector<int>{1, 2, 3, 5});
    CHECK(s.without(2).indices() == std::vector<int>{1, 3});
    CHECK(PredictorSet::size_lex_less(PredictorSet({9}), PredictorSet({1, 2})));
    CHECK(PredictorSet::size_lex_less(PredictorSet({1, 3}), PredictorSet({2, 3})));
}

TEST_CASE("load_csv parses a small file") {
    const std::string path = temp_file("gicsel_t1.csv");
    write_text(path, "y,x1,x2\n0,1.5,2\n1,2.5,1\n1,3.5,5\n");
    Dataset d = load_csv(path, "y");
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.y()[0] == 0.0);
    CHECK(d.y()[1] == 1.0);
    CHECK(d.x()(0, 0) == 1.5);
    CHECK(d.x()(2, 1) == 5.0);
    CHECK_FALSE(d.standardized());
}

TEST_CASE("load_csv reports contract violations") {
    const std::string path = temp_file("gicsel_t2.csv");
    write_text(path, "y,x1\n0,1\n2,2\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "y"), doctest::Contains("non-binary response at row 2"),
                         data_error);

    write_text(path, "y,x1,x3\n0,1,7\n1,2,7\n1,3,7\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "y"), doctest::Contains("constant predictor"), data_error);

    write_text(path, "y,x1\n0,abc\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "y"), doctest::Contains("non-numeric cell"), data_error);

    CHECK_THROWS_AS(load_csv(temp_file("gicsel_notthere.csv"), "y"), data_error);
    write_text(path, "y,x1\n0,1\n1,2\n");
    CHECK_THROWS_AS(load_csv(path, "z"), data_error);
}

TEST_CASE("standardize centers and scales with divisor n-1") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 0, 1, 1;
    Dataset d(x, y);
    Dataset s = standardize(d);
    CHECK(s.x()(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s.x()(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s.x()(2, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.column_means()[0] == doctest::Approx(2.0));
    CHECK(s.column_scales()[0] == doctest::Approx(1.0));
    CHECK(s.y() == d.y());
    CHECK_THROWS_AS(standardize(s), std::invalid_argument);
}

TEST_CASE("standardize rejects single-observation data") {
    Eigen::MatrixXd x(1, 2);
    x << 1, 2;
    Eigen::VectorXd y(1);
    y << 1;
    Dataset d(x, y);
    CHECK_THROWS_AS(standardize(d), std::invalid_argument);
}

TEST_CASE("standardized columns satisfy the mean/sd invariant on generated data") {
    SimModelSpec spec;
    spec.model = SimModel::m1;
    spec.n = 500;
    spec.p = 150;
    spec.rho = 0.3;
    spec.seed = 42;
    auto [d, truth] = generate_m1(spec);
    Dataset s = standardize(d);
    const double n = static_cast<double>(s.n());
    for (Eigen::Index j = 0; j < s.p(); ++j) {
        CHECK(std::abs(s.x().col(j).mean()) < 1e-10);
        const double sd = std::sqrt(s.x().col(j).squaredNorm() / (n - 1.0));
        CHECK(std::abs(sd - 1.0) < 1e-8);
    }
}

TEST_CASE("destandardize_coefficients maps fits back to the original scale") {
    SUBCASE("zero map") {
        Eigen::MatrixXd x(4, 2);
        x << 1, 2, 3, 5, 2, 8, 7, 1;
        Eigen::VectorXd y(4);
        y << 0, 1, 0, 1;
        Dataset s = standardize(Dataset(x, y));
        auto [b0, b] = destandardize_coefficients(s, 0.0, Eigen::VectorXd::Zero(2));
        CHECK(b0 == 0.0);
        CHECK(b.isZero(0.0));
    }
    SUBCASE("single column with mean 2, scale 1") {
        Eigen::MatrixXd x(3, 1);
        x << 1, 2, 3;
        Eigen::VectorXd y(3);
        y << 0, 1, 1;
        Dataset s = standardize(Dataset(x, y));
        Eigen::VectorXd coefs(1);
        coefs << 1.0;
        auto [b0, b] = destandardize_coefficients(s, 0.0, coefs);
        CHECK(b[0] == doctest::Approx(1.0));
        CHECK(b0 == doctest::Approx(-2.0));
    }
    SUBCASE("predictions agree on random data") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> gauss;
        Eigen::MatrixXd x(5, 3);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 3; ++j) x(i, j) = 3.0 * gauss(rng) + j;
        Eigen::VectorXd y(5);
        y << 0, 1, 1, 0, 1;
        Dataset raw(x, y);
        Dataset s = standardize(raw);
        Eigen::VectorXd coefs(3);
        coefs << 0.7, -1.2, 0.4;
        const double intercept = 0.3;
        auto [b0, b] = destandardize_coefficients(s, intercept, coefs);
        Eigen::VectorXd pred_std = (s.x() * coefs).array() + intercept;
        Eigen::VectorXd pred_raw = (raw.x() * b).array() + b0;
        CHECK((pred_std - pred_raw).lpNorm<Eigen::Infinity>() < 1e-12);
    }
    SUBCASE("length mismatch is rejected") {
        Eigen::MatrixXd x(3, 2);
        x << 1, 0, 2, 1, 3, 4;
        Eigen::VectorXd y(3);
        y << 0, 1, 1;
        Dataset s = standardize(Dataset(x, y));
        CHECK_THROWS_AS(destandardize_coefficients(s, 0.0, Eigen::VectorXd::Zero(3)),
                        std::invalid_argument);
    }
}

TEST_CASE("csv round-trip is the identity") {
    SimModelSpec spec;
    spec.model = SimModel::m2;
    spec.n = 40;
    spec.p = 6;
    spec.rho = -0.4;
    spec.seed = 5;
    auto [d, truth] = generate_m2(spec);
    const std::string path = temp_file("gicsel_rt.csv");
    write_csv(d, path);
    Dataset back = load_csv(path, "y");
    REQUIRE(back.n() == d.n());
    REQUIRE(back.p() == d.p());
    CHECK((back.x() - d.x()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.y() - d.y()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("dataset construction validates the response and columns") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    Eigen::VectorXd bad(2);
    bad << 0, 0.5;
    CHECK_THROWS_AS(Dataset(x, bad), data_error);
    Eigen::MatrixXd cst(3, 1);
    cst << 4, 4, 4;
    Eigen::VectorXd y(3);
    y << 0, 1, 0;
    CHECK_THROWS_AS(Dataset(cst, y), data_error);
}
