#include <doctest.h>

#include <cmath>
#include <random>

#include "gicsel/metrics.hpp"

using namespace gicsel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

ReplicationRecord make_record(const PredictorSet& selected, const PredictorSet& truth, int p,
                              bool in_family) {
    ReplicationRecord r;
    r.selected = selected;
    r.true_support = truth;
    r.family_contained_truth = in_family;
    r.refit_coefficients = Eigen::VectorXd::Zero(p);
    for (int j : selected.indices()) r.refit_coefficients[j - 1] = 1.0;
    r.true_direction = Eigen::VectorXd::Zero(p);
    for (int j : truth.indices()) r.true_direction[j - 1] = 1.0;
    return r;
}

} // namespace

TEST_CASE("angle statistic at pinned configurations") {
    CHECK(angle_statistic(vec({1, 1, 0}), vec({2, 2, 0})) == doctest::Approx(0.0));
    CHECK(angle_statistic(vec({1, 0}), vec({0, 1})) == doctest::Approx(M_PI / 2));
    CHECK(angle_statistic(vec({1, 2}), vec({0, 0})) == doctest::Approx(M_PI / 2));
    CHECK_THROWS_AS(angle_statistic(vec({1}), vec({1, 2})), std::invalid_argument);
}

TEST_CASE("angle statistic ignores signed scaling and is symmetric") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::VectorXd a(4), b(4);
        for (int j = 0; j < 4; ++j) {
            a[j] = gauss(rng);
            b[j] = gauss(rng);
        }
        const double base = angle_statistic(a, b);
        CHECK(base >= 0.0);
        CHECK(base <= M_PI / 2 + 1e-12);
        CHECK(angle_statistic(a * scale(rng), b) == doctest::Approx(base).epsilon(1e-10));
        CHECK(angle_statistic(a, b * -scale(rng)) == doctest::Approx(base).epsilon(1e-10));
        CHECK(angle_statistic(b, a) == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("aggregate counts the selection events") {
    const PredictorSet truth({1, 2});
    SUBCASE("single exact selection") {
        const auto report = aggregate({make_record(truth, truth, 4, true)});
        CHECK(report.p_equal == 1.0);
        CHECK(report.p_supset == 1.0);
        CHECK(report.p_inc == 1.0);
        CHECK(report.angle == doctest::Approx(0.0));
        CHECK(report.l == 1);
    }
    SUBCASE("one equal and one strict superset") {
        const auto report = aggregate({make_record(truth, truth, 4, true),
                                       make_record(PredictorSet({1, 2, 3}), truth, 4, true)});
        CHECK(report.p_equal == 0.5);
        CHECK(report.p_supset == 1.0);
    }
    SUBCASE("hand-counted batch of one hundred") {
        std::vector<ReplicationRecord> records;
        int want_equal = 0, want_supset = 0, want_inc = 0;
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<int> kind(0, 3);
        for (int i = 0; i < 100; ++i) {
            PredictorSet sel;
            const int k = kind(rng);
            if (k == 0) sel = truth;
            else if (k == 1) sel = PredictorSet({1, 2, 4});
            else if (k == 2) sel = PredictorSet({1});
            else sel = PredictorSet({3});
            const bool in_family = k != 3;
            records.push_back(make_record(sel, truth, 4, in_family));
            if (sel == truth) ++want_equal;
            if (sel.superset_of(truth)) ++want_supset;
            if (in_family) ++want_inc;
        }
        const auto report = aggregate(records);
        CHECK(report.p_equal == doctest::Approx(want_equal / 100.0));
        CHECK(report.p_supset == doctest::Approx(want_supset / 100.0));
        CHECK(report.p_inc == doctest::Approx(want_inc / 100.0));
        CHECK(report.p_equal <= report.p_supset);
        CHECK(report.p_equal <= report.p_inc); // families contain the selected set
        CHECK(report.angle >= 0.0);
        CHECK(report.angle <= M_PI / 2 + 1e-12);
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
    }
}

TEST_CASE("binomial standard error") {
    CHECK(binomial_se(0.5, 100) == doctest::Approx(0.05));
    CHECK(binomial_se(0.0, 50) == 0.0);
    CHECK_THROWS_AS(binomial_se(0.5, 0), std::invalid_argument);
}
