#include <catch2/catch_amalgamated.hpp>

#include "trex/synth.hpp"

using namespace trex;

TEST_CASE("draw_sparse_beta places exactly s nonzeros") {
    auto [beta, active] = draw_sparse_beta(5, 2, 1.0, 1.0, 123);
    REQUIRE(active.size() == 2);
    int nonzeros = 0;
    for (int j = 0; j < 5; ++j) {
        if (beta[j] != 0.0) {
            ++nonzeros;
            REQUIRE(std::abs(beta[j]) == 1.0);  // degenerate [1, 1] range
        }
    }
    REQUIRE(nonzeros == 2);
    for (int j : active) REQUIRE(beta[j] != 0.0);
}

TEST_CASE("draw_sparse_beta null and error cases") {
    auto [beta, active] = draw_sparse_beta(5, 0, 1.0, 3.0, 1);
    REQUIRE(active.empty());
    REQUIRE(beta.isZero(0.0));
    REQUIRE_THROWS_AS(draw_sparse_beta(3, 4, 1.0, 3.0, 1), ArgumentError);
    REQUIRE_THROWS_AS(draw_sparse_beta(3, 1, 0.0, 3.0, 1), ArgumentError);
}

TEST_CASE("draw_sparse_beta covers indices and signs") {
    // Across many seeds every index should be hit and both signs should occur.
    std::vector<int> hits(6, 0);
    int negatives = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto [beta, active] = draw_sparse_beta(6, 2, 1.0, 2.0, seed);
        for (int j : active) {
            ++hits[static_cast<std::size_t>(j)];
            if (beta[j] < 0) ++negatives;
        }
    }
    for (int h : hits) REQUIRE(h > 20);
    REQUIRE(negatives > 100);
    REQUIRE(negatives < 300);
}

TEST_CASE("compute_noise_std matches the definition") {
    // Xb alternates +-1, so the population variance of the signal is exactly 1.
    Eigen::MatrixXd X(4, 1);
    X << 1, -1, 1, -1;
    Eigen::VectorXd beta(1);
    beta << 1.0;
    REQUIRE(compute_noise_std(X, beta, 1.0) == Catch::Approx(1.0).margin(1e-15));

    beta << 2.0;  // signal variance 4
    REQUIRE(compute_noise_std(X, beta, 0.01) == Catch::Approx(20.0).margin(1e-12));

    beta << 0.0;  // null system convention
    REQUIRE(compute_noise_std(X, beta, 5.0) == 1.0);

    beta << 1.0;
    REQUIRE_THROWS_AS(compute_noise_std(X, beta, 0.0), ArgumentError);
    REQUIRE_THROWS_AS(compute_noise_std(X, beta, -1.0), ArgumentError);
}

TEST_CASE("generate_system null case is pure noise") {
    SystemConfig cfg;
    cfg.n = 20;
    cfg.p = 6;
    cfg.s = 0;
    cfg.snr = 1.0;
    const SyntheticSystem sys = generate_system(cfg, 4242);
    REQUIRE(sys.active_set.empty());
    REQUIRE(sys.beta.isZero(0.0));
    REQUIRE((sys.X * sys.beta).isZero(0.0));
    REQUIRE(sys.noise_std == 1.0);
    REQUIRE(sys.y.norm() > 0.0);
}

TEST_CASE("generate_system is deterministic and carries its config") {
    SystemConfig cfg;
    cfg.n = 75;
    cfg.p = 150;
    cfg.s = 3;
    cfg.snr = 5.0;
    const SyntheticSystem a = generate_system(cfg, 99);
    const SyntheticSystem b = generate_system(cfg, 99);
    REQUIRE(a.X == b.X);
    REQUIRE(a.y == b.y);
    REQUIRE(a.beta == b.beta);
    REQUIRE(a.active_set == b.active_set);
    REQUIRE(a.noise_std == b.noise_std);
    REQUIRE(a.X.rows() == 75);
    REQUIRE(a.X.cols() == 150);
    REQUIRE(a.active_set.size() == 3);
    REQUIRE(a.seed == 99);
}

TEST_CASE("realized SNR tracks the configured SNR for large n") {
    SystemConfig cfg;
    cfg.n = 1000;
    cfg.p = 5;
    cfg.s = 2;
    cfg.snr = 2.0;
    const SyntheticSystem sys = generate_system(cfg, 31337);
    const Eigen::VectorXd signal = sys.X * sys.beta;
    const Eigen::VectorXd noise = sys.y - signal;
    auto pop_var = [](const Eigen::VectorXd& v) {
        return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size());
    };
    const double realized = pop_var(signal) / pop_var(noise);
    REQUIRE(realized > 0.8 * cfg.snr);
    REQUIRE(realized < 1.2 * cfg.snr);
}

TEST_CASE("generate_corpus derives distinct per-system seeds") {
    const ConfigSampler sampler = [](std::mt19937_64&) {
        SystemConfig cfg;
        cfg.n = 10;
        cfg.p = 4;
        cfg.s = 1;
        cfg.snr = 1.0;
        return cfg;
    };
    const auto corpus = generate_corpus(sampler, 10, 777);
    REQUIRE(corpus.size() == 10);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            REQUIRE(corpus[i].seed != corpus[j].seed);
            REQUIRE(corpus[i].X != corpus[j].X);
        }
    }
    const auto again = generate_corpus(sampler, 10, 777);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        REQUIRE(corpus[i].X == again[i].X);
        REQUIRE(corpus[i].y == again[i].y);
    }
    REQUIRE_THROWS_AS(generate_corpus(sampler, 0, 1), ArgumentError);
}

TEST_CASE("corpus restricted to GaussianMixture uses only that family") {
    const ConfigSampler sampler = [](std::mt19937_64& rng) {
        SystemConfig cfg;
        cfg.n = 12;
        cfg.p = 5;
        cfg.s = 1;
        cfg.snr = 1.0;
        cfg.distribution = random_spec(Family::GaussianMixture, rng);
        return cfg;
    };
    const auto corpus = generate_corpus(sampler, 5, 2024);
    for (const auto& sys : corpus)
        REQUIRE(sys.config.distribution.family == Family::GaussianMixture);
}

TEST_CASE("generate_system_usable avoids constant columns") {
    SystemConfig cfg;
    cfg.n = 25;
    cfg.p = 10;
    cfg.s = 1;
    cfg.snr = 1.0;
    // Bernoulli-like binomial: raw generation sometimes yields all-zero columns.
    cfg.distribution = DistributionSpec{Family::Binomial, {1.0, 0.15}, "Binomial"};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SyntheticSystem sys = generate_system_usable(cfg, seed);
        REQUIRE_FALSE(has_constant_column(sys.X));
        // The stored seed regenerates the same system without retry logic.
        const SyntheticSystem again = generate_system(sys.config, sys.seed);
        REQUIRE(sys.X == again.X);
        REQUIRE(sys.y == again.y);
    }
}

TEST_CASE("invalid system configs are rejected") {
    SystemConfig cfg;
    cfg.n = 1;
    REQUIRE_THROWS_AS(cfg.validate(), ArgumentError);
    cfg.n = 10;
    cfg.s = 40;
    cfg.p = 30;
    REQUIRE_THROWS_AS(cfg.validate(), ArgumentError);
    cfg.s = 3;
    cfg.snr = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), ArgumentError);
}
