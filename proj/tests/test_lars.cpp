#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "trex/lars.hpp"
#include "trex/standardize.hpp"

using namespace trex;

namespace {

// Brute-force oracle for the first LARS entry: the column of the enlarged
// standardized matrix with the largest absolute inner product with ys.
int first_entry_oracle(const StandardizedData& data, const Eigen::MatrixXd& dummies) {
    int best = -1;
    double best_corr = -1.0;
    const int p = data.p;
    const int m = p + static_cast<int>(dummies.cols());
    for (int j = 0; j < m; ++j) {
        const double c = std::abs(
            (j < p ? data.Xs.col(j) : dummies.col(j - p)).dot(data.ys));
        if (c > best_corr) {
            best_corr = c;
            best = j;
        }
    }
    return best;
}

StandardizedData random_instance(int n, int p, std::uint64_t seed, Eigen::MatrixXd* dummies,
                                 int L) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = normal(rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);
    const StandardizedData data = standardize(X, y);
    *dummies = generate_dummies(n, L, seed ^ 0xabcdULL);
    standardize_columns_inplace(*dummies, "dummy");
    return data;
}

}  // namespace

TEST_CASE("standardize centers and scales columns") {
    Eigen::MatrixXd X(3, 1);
    X << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 4, 5, 9;
    const StandardizedData data = standardize(X, y);
    const double root_half = 1.0 / std::sqrt(2.0);
    REQUIRE(data.Xs(0, 0) == Catch::Approx(-root_half).margin(1e-12));
    REQUIRE(data.Xs(1, 0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(data.Xs(2, 0) == Catch::Approx(root_half).margin(1e-12));
    REQUIRE(data.scale[0] == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    REQUIRE(data.ys.mean() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("standardize rejects constant columns by name") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 5, 2, 5, 3, 5;
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    try {
        standardize(X, y);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("standardize handles a binary response") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    Eigen::VectorXd y(4);
    y << 0, 1, 1, 0;
    const StandardizedData data = standardize(X, y);
    REQUIRE(data.ys.mean() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(data.ys[0] == Catch::Approx(-0.5).margin(1e-12));
    REQUIRE(data.ys[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("standardize invariants hold on random matrices") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::MatrixXd X(12, 6);
        for (int i = 0; i < X.size(); ++i) X(i) = normal(rng) + 3.0;
        Eigen::VectorXd y(12);
        for (int i = 0; i < 12; ++i) y[i] = normal(rng);
        const StandardizedData data = standardize(X, y);
        for (int j = 0; j < 6; ++j) {
            REQUIRE(std::abs(data.Xs.col(j).mean()) < 1e-10);
            REQUIRE(std::abs(data.Xs.col(j).norm() - 1.0) < 1e-10);
        }
        REQUIRE(std::abs(data.ys.mean()) < 1e-10);
    }
}

TEST_CASE("generate_dummies shape and determinism") {
    const Eigen::MatrixXd a = generate_dummies(75, 150, 5);
    REQUIRE(a.rows() == 75);
    REQUIRE(a.cols() == 150);
    REQUIRE(a == generate_dummies(75, 150, 5));
    REQUIRE(a != generate_dummies(75, 150, 6));
}

TEST_CASE("dummy entries concentrate around zero") {
    const Eigen::MatrixXd d = generate_dummies(10000, 1, 21);
    REQUIRE(std::abs(d.mean()) < 0.05);
}

TEST_CASE("first entered column matches the correlation oracle") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Eigen::MatrixXd dummies;
        const StandardizedData data = random_instance(20, 8, seed, &dummies, 8);
        const ExperimentResult result = lars_run(data, dummies, 8);
        REQUIRE_FALSE(result.entry_order.empty());
        REQUIRE(result.entry_order.front().column == first_entry_oracle(data, dummies));
    }
}

TEST_CASE("active correlations stay equiangular along the path") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        Eigen::MatrixXd dummies;
        const StandardizedData data = random_instance(20, 8, seed, &dummies, 8);
        LarsTrace trace;
        lars_run(data, dummies, 8, &trace);
        for (double spread : trace.active_corr_spread) REQUIRE(spread < 1e-8);
        REQUIRE_FALSE(trace.active_corr_spread.empty());
    }
}

TEST_CASE("the run terminates exactly when the stop_T-th dummy enters") {
    for (std::uint64_t seed = 200; seed < 215; ++seed) {
        Eigen::MatrixXd dummies;
        const StandardizedData data = random_instance(30, 6, seed, &dummies, 12);
        for (int stop_T : {1, 2, 3}) {
            const ExperimentResult result = lars_run(data, dummies, stop_T);
            if (!result.exhausted) {
                REQUIRE(result.dummies_entered == stop_T);
                REQUIRE(result.entry_order.back().is_dummy);
                int count = 0;
                for (const auto& e : result.entry_order)
                    if (e.is_dummy) ++count;
                REQUIRE(count == stop_T);
            } else {
                REQUIRE(result.dummies_entered < stop_T);
            }
        }
    }
}

TEST_CASE("a dummy built to dominate the correlations enters first and stops the run") {
    std::mt19937_64 rng(47);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 25;
    Eigen::MatrixXd X(n, 4);
    for (int i = 0; i < X.size(); ++i) X(i) = normal(rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);
    const StandardizedData data = standardize(X, y);

    // One dummy column proportional to the centered response dominates every
    // original column's correlation.
    Eigen::MatrixXd dummies = data.ys + 0.001 * Eigen::VectorXd::Ones(n);
    standardize_columns_inplace(dummies, "dummy");

    const ExperimentResult result = lars_run(data, dummies, 1);
    REQUIRE_FALSE(result.exhausted);
    REQUIRE(result.entry_order.size() == 1);
    REQUIRE(result.entry_order.front().is_dummy);
    REQUIRE(result.originals_entered().empty());
}

TEST_CASE("orthogonal two-column design enters the higher-correlation column first") {
    // Identity columns centered become collinear, so the path has exactly one
    // entry; it must be the argmax-of-|correlation| column (ties break low).
    Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 2, 1;
    const StandardizedData data = standardize(X, y);
    Eigen::MatrixXd dummies = generate_dummies(2, 1, 3);
    standardize_columns_inplace(dummies, "dummy");
    const ExperimentResult result = lars_run(data, dummies, 1);
    REQUIRE_FALSE(result.entry_order.empty());
    REQUIRE(result.entry_order.front().column == 0);
}

TEST_CASE("dummies_before counts dummies in the model at entry time") {
    for (std::uint64_t seed = 300; seed < 310; ++seed) {
        Eigen::MatrixXd dummies;
        const StandardizedData data = random_instance(20, 6, seed, &dummies, 10);
        const ExperimentResult result = lars_run(data, dummies, 4);
        int dummy_count = 0;
        for (const auto& e : result.entry_order) {
            REQUIRE(e.dummies_before == dummy_count);
            if (e.is_dummy) ++dummy_count;
            if (!e.is_dummy) REQUIRE(e.dummies_before <= 3);
        }
        // Entries never repeat.
        std::vector<int> cols;
        for (const auto& e : result.entry_order) cols.push_back(e.column);
        std::sort(cols.begin(), cols.end());
        REQUIRE(std::adjacent_find(cols.begin(), cols.end()) == cols.end());
    }
}

TEST_CASE("stop_T is validated") {
    Eigen::MatrixXd dummies;
    const StandardizedData data = random_instance(10, 3, 1, &dummies, 4);
    REQUIRE_THROWS_AS(lars_run(data, dummies, 0), ArgumentError);
    REQUIRE_THROWS_AS(lars_run(data, dummies, 5), ArgumentError);
}

TEST_CASE("exactly dependent columns degrade into a path error or a clean stop") {
    // x3 lies in the span of x1 and x2; depending on floating-point tie
    // resolution the third dependent column either never enters (ties resolve
    // to the full step) or triggers the rank-degeneracy guard. Both outcomes
    // keep the recorded path consistent; silent nonsense is the failure mode.
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 16;
    Eigen::VectorXd a1(n), a2(n), g(n);
    for (int i = 0; i < n; ++i) {
        a1[i] = normal(rng);
        a2[i] = normal(rng);
        g[i] = normal(rng);
    }
    Eigen::MatrixXd X(n, 3);
    X.col(0) = a1;
    X.col(1) = a2;
    X.col(2) = a1 + a2;
    Eigen::VectorXd y = 2.0 * a1 + a2 + 0.01 * g;
    const StandardizedData data = standardize(X, y);
    Eigen::MatrixXd dummies = generate_dummies(n, 2, 9) * 0.001;
    dummies.col(0) += g;
    dummies.col(1) -= g;
    standardize_columns_inplace(dummies, "dummy");
    try {
        LarsTrace trace;
        const ExperimentResult result = lars_run(data, dummies, 2, &trace);
        for (double spread : trace.active_corr_spread) REQUIRE(spread < 1e-8);
        REQUIRE(result.entry_order.size() <= 5);
    } catch (const PathError& e) {
        REQUIRE(e.step() >= 1);
        REQUIRE(std::string(e.what()).find("rank-degenerate") != std::string::npos);
    }
}
