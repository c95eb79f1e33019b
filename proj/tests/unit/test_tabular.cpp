#include <doctest.h>

#include "credence/errors.hpp"
#include "credence/random.hpp"
#include "credence/tabular.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace credence;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("credence_tabular_" + name);
    std::ofstream(p) << text;
    return p;
}

CsvOptions treat_y() {
    CsvOptions o;
    o.treatment_col = "treat";
    o.outcome_col = "y";
    return o;
}

ObservationalSample random_sample(std::size_t n, Eigen::Index p, std::uint64_t seed) {
    Rng rng = make_rng(seed, "unit_tabular");
    std::normal_distribution<double> normal(3.0, 2.0);
    ObservationalSample s;
    s.x.resize(static_cast<Eigen::Index>(n), p);
    s.z.resize(static_cast<Eigen::Index>(n));
    s.y.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
        for (Eigen::Index j = 0; j < p; ++j) s.x(i, j) = normal(rng);
        s.z[i] = static_cast<double>(i % 2);
        s.y[i] = normal(rng);
    }
    for (Eigen::Index j = 0; j < p; ++j) s.column_names.push_back("x" + std::to_string(j));
    return s;
}

} // namespace

TEST_CASE("csv load keeps covariates in header order") {
    const auto path = write_temp("basic.csv", "x1,treat,y\n0.5,1,2\n1.5,1,3\n2.5,0,4\n3.5,0,5\n");
    const auto s = load_observational_csv(path, treat_y());
    CHECK(s.rows() == 4);
    CHECK(s.cols() == 1);
    CHECK(s.column_names == std::vector<std::string>{"x1"});
    CHECK(s.z == Vector((Vector(4) << 1, 1, 0, 0).finished()));
    CHECK(s.x(2, 0) == 2.5);
    CHECK(s.y[3] == 5.0);
}

TEST_CASE("csv load errors") {
    CHECK_THROWS_WITH_AS(load_observational_csv(write_temp("bad_z.csv", "x1,treat,y\n1,2,3\n1,0,3\n"), treat_y()),
                         doctest::Contains("non-binary treatment"), DataError);
    CHECK_THROWS_AS(load_observational_csv("/nonexistent/file.csv", treat_y()), DataError);
    CHECK_THROWS_AS(load_observational_csv(write_temp("no_col.csv", "x1,t,y\n1,1,3\n1,0,3\n"), treat_y()), DataError);
    CHECK_THROWS_AS(load_observational_csv(write_temp("text.csv", "x1,treat,y\nabc,1,3\n1,0,3\n"), treat_y()), DataError);
    CHECK_THROWS_AS(load_observational_csv(write_temp("empty.csv", ""), treat_y()), DataError);
    CHECK_THROWS_AS(load_observational_csv(write_temp("missing.csv", "x1,treat,y\n,1,3\n1,0,3\n"), treat_y()), DataError);
}

TEST_CASE("csv load ignores and flags columns") {
    auto options = treat_y();
    options.binary_cols = {"b"};
    options.ignore_cols = {"y0"};
    const auto s = load_observational_csv(write_temp("flags.csv", "a,b,treat,y,y0\n1,0,1,2,9\n2,1,0,3,9\n"), options);
    CHECK(s.column_names == std::vector<std::string>{"a", "b"});
    CHECK(s.binary_columns == std::vector<std::size_t>{1});
}

TEST_CASE("standardize two-point column") {
    ObservationalSample s;
    s.x = (Matrix(2, 1) << 1, 3).finished();
    s.z = (Vector(2) << 1, 0).finished();
    s.y = (Vector(2) << 0, 1).finished();
    const auto [std_s, stats] = standardize(s);
    const double sd = std::sqrt(2.0);
    CHECK(std_s.x(0, 0) == doctest::Approx(-1.0 / sd));
    CHECK(std_s.x(1, 0) == doctest::Approx(1.0 / sd));
    CHECK(std_s.x.col(0).sum() == 0.0);
    CHECK(stats.x_scale[0] == doctest::Approx(sd));
    CHECK(std_s.z == s.z);
}

TEST_CASE("standardize leaves constant columns with scale one") {
    ObservationalSample s;
    s.x = (Matrix(3, 1) << 5, 5, 5).finished();
    s.z = (Vector(3) << 1, 0, 1).finished();
    s.y = (Vector(3) << 1, 2, 3).finished();
    const auto [std_s, stats] = standardize(s);
    CHECK(stats.x_scale[0] == 1.0);
    CHECK(std_s.x(0, 0) == 5.0);
    CHECK(std_s.x(2, 0) == 5.0);
}

TEST_CASE("standardize round-trips and yields unit moments") {
    const auto s = random_sample(200, 4, 1);
    const auto [std_s, stats] = standardize(s);
    for (Eigen::Index j = 0; j < 4; ++j) {
        const auto col = std_s.x.col(j).array();
        CHECK(std::abs(col.mean()) < 1e-12);
        CHECK(std::sqrt((col - col.mean()).square().sum() / 199.0) == doctest::Approx(1.0));
    }
    const auto back = destandardize(std_s, stats);
    CHECK((back.x - s.x).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.y - s.y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("destandardize identity, affine map and consistency") {
    StandardizationStats identity{Vector::Zero(2), Vector::Ones(2), 0.0, 1.0};
    Rng rng = make_rng(2, "destd");
    std::normal_distribution<double> normal;
    std::bernoulli_distribution coin;
    for (int trial = 0; trial < 1000; ++trial) {
        GeneratedSample g;
        g.x = Matrix::NullaryExpr(3, 2, [&] { return normal(rng); });
        g.z = Vector::NullaryExpr(3, [&] { return coin(rng) ? 1.0 : 0.0; });
        g.y0 = Vector::NullaryExpr(3, [&] { return normal(rng); });
        g.y1 = Vector::NullaryExpr(3, [&] { return normal(rng); });
        g.enforce_consistency();
        const StandardizationStats stats{Vector::Constant(2, normal(rng)), Vector::Constant(2, 1.5), normal(rng), 2.5};
        const auto out = destandardize(g, stats);
        REQUIRE(out.is_consistent());
        if (trial == 0) {
            const auto same = destandardize(g, identity);
            CHECK(same.x == g.x);
            CHECK(same.y0 == g.y0);
            CHECK(same.y == g.y);
        }
    }
    GeneratedSample g;
    g.x = Matrix::Zero(1, 2);
    g.z = Vector::Zero(1);
    g.y0 = Vector::Zero(1);
    g.y1 = Vector::Ones(1);
    g.enforce_consistency();
    const auto out = destandardize(g, StandardizationStats{Vector::Zero(2), Vector::Ones(2), 10.0, 2.0});
    CHECK(out.y0[0] == 10.0);
    CHECK(out.y1[0] == 12.0);
    CHECK_THROWS_AS(destandardize(g, StandardizationStats{Vector::Zero(3), Vector::Ones(3), 0.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("destandardize rounds flagged binary columns") {
    GeneratedSample g;
    g.x = (Matrix(2, 2) << 0.4, 0.4, 0.7, 0.7).finished();
    g.z = Vector::Zero(2);
    g.y0 = g.y1 = Vector::Zero(2);
    g.enforce_consistency();
    const std::vector<std::size_t> round = {1};
    const auto out = destandardize(g, StandardizationStats{Vector::Zero(2), Vector::Ones(2), 0.0, 1.0}, round);
    CHECK(out.x(0, 0) == 0.4);
    CHECK(out.x(0, 1) == 0.0);
    CHECK(out.x(1, 1) == 1.0);
}

TEST_CASE("bootstrap resample") {
    auto one = random_sample(1, 2, 3);
    const auto r1 = bootstrap_resample(one, 99);
    CHECK(r1.x == one.x);
    CHECK(r1.y == one.y);

    const auto s = random_sample(50, 2, 4);
    const auto a = bootstrap_resample(s, 7);
    const auto b = bootstrap_resample(s, 7);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);

    std::set<std::pair<double, double>> rows;
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) rows.insert({s.x(i, 0), s.y[i]});
    for (Eigen::Index i = 0; i < a.x.rows(); ++i) CHECK(rows.count({a.x(i, 0), a.y[i]}) == 1);
}

TEST_CASE("bootstrap inclusion counts match the binomial oracle") {
    // each row count is Binomial(5, 1/5): mean 1, variance 0.8
    const int draws = 10000;
    std::vector<double> totals(5, 0.0);
    for (int b = 0; b < draws; ++b)
        for (auto i : bootstrap_indices(5, derive_seed(11, "inclusion", static_cast<std::uint64_t>(b)))) totals[i] += 1.0;
    const double mc_se = std::sqrt(0.8 / draws);
    for (double t : totals) CHECK(std::abs(t / draws - 1.0) < 3.0 * mc_se + 1e-12);
}

TEST_CASE("generated sample consistency helpers") {
    GeneratedSample g;
    g.x = Matrix::Zero(2, 1);
    g.z = (Vector(2) << 1, 0).finished();
    g.y0 = (Vector(2) << 1, 2).finished();
    g.y1 = (Vector(2) << 5, 6).finished();
    g.enforce_consistency();
    CHECK(g.y == Vector((Vector(2) << 5, 2).finished()));
    const auto o = observe(g);
    CHECK(o.y == g.y);
}

TEST_CASE("validate rejects bad samples") {
    auto s = random_sample(4, 1, 5);
    s.z[0] = 0.5;
    CHECK_THROWS_AS(s.validate(), DataError);
    auto t = random_sample(1, 1, 5);
    CHECK_THROWS_AS(t.validate(), DataError);
}
