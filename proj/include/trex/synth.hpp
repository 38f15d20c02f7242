#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "trex/common.hpp"
#include "trex/distributions.hpp"

namespace trex {

/// Configuration of one synthetic sparse linear system y = X beta + eps.
struct SystemConfig {
    int n = 75;           // samples
    int p = 150;          // predictors
    int s = 3;            // true active-set size
    double snr = 1.0;     // var(X beta) / var(eps)
    double beta_lo = 1.0; // nonzero |beta| range
    double beta_hi = 3.0;
    DistributionSpec distribution = DistributionSpec::gaussian();

    void validate() const {
        if (n < 2) throw ArgumentError("SystemConfig: n must be >= 2");
        if (p < 1) throw ArgumentError("SystemConfig: p must be >= 1");
        if (s < 0 || s > p) throw ArgumentError("SystemConfig: requires 0 <= s <= p");
        if (!(snr > 0)) throw ArgumentError("SystemConfig: snr must be > 0");
        if (!(beta_lo > 0) || beta_hi < beta_lo)
            throw ArgumentError("SystemConfig: requires 0 < beta_lo <= beta_hi");
        distribution.validate();
    }
};

/// A generated regression instance with known ground truth.
struct SyntheticSystem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd beta;
    std::vector<int> active_set;  // sorted 0-based indices {j : beta_j != 0}
    double noise_std = 0.0;
    SystemConfig config;
    std::uint64_t seed = 0;
};

/// Sparse coefficient vector: s nonzeros at distinct uniform indices, magnitudes
/// uniform in [lo, hi], signs uniform. Returns (beta, sorted active set).
inline std::pair<Eigen::VectorXd, std::vector<int>> draw_sparse_beta(
    int p, int s, double lo, double hi, std::uint64_t seed) {
    if (p < 1) throw ArgumentError("draw_sparse_beta: p must be >= 1");
    if (s < 0 || s > p) throw ArgumentError("draw_sparse_beta: requires 0 <= s <= p");
    if (!(lo > 0) || hi < lo) throw ArgumentError("draw_sparse_beta: requires 0 < lo <= hi");

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates gives s distinct indices.
    std::vector<int> idx(p);
    for (int j = 0; j < p; ++j) idx[j] = j;
    for (int i = 0; i < s; ++i) {
        std::uniform_int_distribution<int> pick(i, p - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<int> active(idx.begin(), idx.begin() + s);
    std::sort(active.begin(), active.end());

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    std::uniform_real_distribution<double> mag(lo, hi);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int j : active) {
        const double m = mag(rng);
        beta[j] = coin(rng) == 0 ? m : -m;
    }
    return {beta, active};
}

/// Noise level sigma with sigma^2 = var(X beta) / snr, where var is the
/// population variance. A null system (zero signal variance) gets sigma = 1.
inline double compute_noise_std(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta, double snr) {
    if (!(snr > 0)) throw ArgumentError("compute_noise_std: snr must be > 0");
    if (X.cols() != beta.size()) throw ArgumentError("compute_noise_std: dimension mismatch");
    const Eigen::VectorXd signal = X * beta;
    const double mean = signal.mean();
    const double var = (signal.array() - mean).square().sum() / static_cast<double>(signal.size());
    if (var <= 0.0) return 1.0;
    return std::sqrt(var / snr);
}

/// Full system: X from the configured family, sparse beta, Gaussian noise
/// scaled to the configured SNR. Pure function of (cfg, seed).
inline SyntheticSystem generate_system(const SystemConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SyntheticSystem sys;
    sys.config = cfg;
    sys.seed = seed;
    sys.X = sample_design(cfg.distribution, cfg.n, cfg.p, derive_seed(seed, 1));
    auto [beta, active] = draw_sparse_beta(cfg.p, cfg.s, cfg.beta_lo, cfg.beta_hi, derive_seed(seed, 2));
    sys.beta = std::move(beta);
    sys.active_set = std::move(active);
    sys.noise_std = compute_noise_std(sys.X, sys.beta, cfg.snr);

    std::mt19937_64 rng(derive_seed(seed, 3));
    std::normal_distribution<double> noise(0.0, sys.noise_std);
    sys.y = sys.X * sys.beta;
    for (int i = 0; i < cfg.n; ++i) sys.y[i] += noise(rng);
    return sys;
}

inline bool has_constant_column(const Eigen::MatrixXd& X) {
    for (int j = 0; j < X.cols(); ++j) {
        const auto col = X.col(j);
        if ((col.array() - col[0]).abs().maxCoeff() == 0.0) return true;
    }
    return false;
}

/// generate_system, redrawing deterministically (seed stream keyed by attempt)
/// until X has no constant column. Discrete families can otherwise produce
/// degenerate columns that forward selection cannot standardize.
inline SyntheticSystem generate_system_usable(const SystemConfig& cfg, std::uint64_t seed,
                                              int max_attempts = 64) {
    std::uint64_t s = seed;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        SyntheticSystem sys = generate_system(cfg, s);
        if (!has_constant_column(sys.X)) return sys;
        s = derive_seed(seed, 0xdeadull, static_cast<std::uint64_t>(attempt + 1));
    }
    throw DataError("generate_system_usable: could not draw a design without constant columns");
}

/// Draws a SystemConfig given an RNG; used to randomize corpora.
using ConfigSampler = std::function<SystemConfig(std::mt19937_64&)>;

/// count independent systems with per-system seeds derived from master_seed.
inline std::vector<SyntheticSystem> generate_corpus(const ConfigSampler& sampler, int count,
                                                    std::uint64_t master_seed, int threads = 1) {
    if (count < 1) throw ArgumentError("generate_corpus: count must be >= 1");
    std::vector<SyntheticSystem> out(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        std::mt19937_64 cfg_rng(derive_seed(master_seed, i, 0xc0f1ull));
        const SystemConfig cfg = sampler(cfg_rng);
        out[i] = generate_system_usable(cfg, derive_seed(master_seed, i, 0x5e5eull));
    });
    return out;
}

}  // namespace trex
