#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "trex/common.hpp"

namespace trex {

/// Design-matrix entry distributions. The first fourteen are the training
/// families; GaussianMixture is reserved for held-out evaluation.
enum class Family {
    Beta,
    Binomial,
    Cauchy,
    ChiSquared,
    Exponential,
    Gamma,
    Gaussian,
    Gumbel,
    Laplace,
    LogNormal,
    Pareto,
    StudentT,
    Uniform,
    Weibull,
    GaussianMixture,
};

inline constexpr int kNumTrainingFamilies = 14;

inline const std::vector<Family>& all_families() {
    static const std::vector<Family> fams = {
        Family::Beta,     Family::Binomial, Family::Cauchy,   Family::ChiSquared,
        Family::Exponential, Family::Gamma, Family::Gaussian, Family::Gumbel,
        Family::Laplace,  Family::LogNormal, Family::Pareto,  Family::StudentT,
        Family::Uniform,  Family::Weibull,  Family::GaussianMixture,
    };
    return fams;
}

inline const std::vector<Family>& training_families() {
    static const std::vector<Family> fams(all_families().begin(), all_families().begin() + kNumTrainingFamilies);
    return fams;
}

inline std::string family_name(Family f) {
    switch (f) {
        case Family::Beta: return "Beta";
        case Family::Binomial: return "Binomial";
        case Family::Cauchy: return "Cauchy";
        case Family::ChiSquared: return "ChiSquared";
        case Family::Exponential: return "Exponential";
        case Family::Gamma: return "Gamma";
        case Family::Gaussian: return "Gaussian";
        case Family::Gumbel: return "Gumbel";
        case Family::Laplace: return "Laplace";
        case Family::LogNormal: return "LogNormal";
        case Family::Pareto: return "Pareto";
        case Family::StudentT: return "StudentT";
        case Family::Uniform: return "Uniform";
        case Family::Weibull: return "Weibull";
        case Family::GaussianMixture: return "GaussianMixture";
    }
    throw ArgumentError("unknown family enum value");
}

inline Family family_from_name(const std::string& name) {
    for (Family f : all_families()) {
        if (family_name(f) == name) return f;
    }
    throw ArgumentError("unknown distribution family: " + name);
}

/// One scalar distribution with family-specific parameters.
///
/// Parameter layouts:
///   Beta            {alpha, beta},        alpha, beta > 0
///   Binomial        {trials, prob},       trials >= 1 (integral), 0 < prob < 1
///   Cauchy          {location, scale},    scale > 0
///   ChiSquared      {dof},                dof > 0
///   Exponential     {rate},               rate > 0
///   Gamma           {shape, scale},       both > 0
///   Gaussian        {mean, std},          std > 0
///   Gumbel          {location, scale},    scale > 0
///   Laplace         {location, scale},    scale > 0
///   LogNormal       {mu, sigma},          sigma > 0
///   Pareto          {minimum, shape},     both > 0
///   StudentT        {dof},                dof > 0
///   Uniform         {lo, hi},             lo < hi
///   Weibull         {shape, scale},       both > 0
///   GaussianMixture {w_1..w_c, mu_1..mu_c, sd_1..sd_c} for c >= 2 components;
///                   weights > 0 and summing to 1 within 1e-12, sds > 0
struct DistributionSpec {
    Family family = Family::Gaussian;
    std::vector<double> params = {0.0, 1.0};
    std::string label;  // seed-derivation label; defaults to the family name

    int mixture_components() const {
        if (family != Family::GaussianMixture) return 0;
        return static_cast<int>(params.size()) / 3;
    }

    void validate() const {
        auto require = [&](bool ok, const std::string& what) {
            if (!ok) throw ArgumentError(family_name(family) + ": " + what);
        };
        auto finite = [&] {
            for (double x : params) require(std::isfinite(x), "non-finite parameter");
        };
        finite();
        switch (family) {
            case Family::Beta:
                require(params.size() == 2, "expects {alpha, beta}");
                require(params[0] > 0 && params[1] > 0, "shape parameters must be > 0");
                break;
            case Family::Binomial:
                require(params.size() == 2, "expects {trials, prob}");
                require(params[0] >= 1 && params[0] == std::floor(params[0]), "trials must be a positive integer");
                require(params[1] > 0 && params[1] < 1, "prob must lie in (0, 1)");
                break;
            case Family::Cauchy:
            case Family::Gumbel:
            case Family::Laplace:
                require(params.size() == 2, "expects {location, scale}");
                require(params[1] > 0, "scale must be > 0");
                break;
            case Family::ChiSquared:
            case Family::StudentT:
                require(params.size() == 1, "expects {dof}");
                require(params[0] > 0, "degrees of freedom must be > 0");
                break;
            case Family::Exponential:
                require(params.size() == 1, "expects {rate}");
                require(params[0] > 0, "rate must be > 0");
                break;
            case Family::Gamma:
            case Family::Weibull:
                require(params.size() == 2, "expects {shape, scale}");
                require(params[0] > 0 && params[1] > 0, "shape and scale must be > 0");
                break;
            case Family::Gaussian:
                require(params.size() == 2, "expects {mean, std}");
                require(params[1] > 0, "std must be > 0");
                break;
            case Family::LogNormal:
                require(params.size() == 2, "expects {mu, sigma}");
                require(params[1] > 0, "sigma must be > 0");
                break;
            case Family::Pareto:
                require(params.size() == 2, "expects {minimum, shape}");
                require(params[0] > 0 && params[1] > 0, "minimum and shape must be > 0");
                break;
            case Family::Uniform:
                require(params.size() == 2, "expects {lo, hi}");
                require(params[0] < params[1], "requires lo < hi");
                break;
            case Family::GaussianMixture: {
                const int c = mixture_components();
                require(c >= 2 && params.size() == static_cast<std::size_t>(3 * c),
                        "expects {w_1..w_c, mu_1..mu_c, sd_1..sd_c} with c >= 2");
                double wsum = 0.0;
                for (int i = 0; i < c; ++i) {
                    require(params[i] > 0, "mixture weights must be > 0");
                    wsum += params[i];
                    require(params[2 * c + i] > 0, "mixture stds must be > 0");
                }
                require(std::abs(wsum - 1.0) <= 1e-12, "mixture weights must sum to 1");
                break;
            }
        }
    }

    static DistributionSpec gaussian(double mean = 0.0, double sd = 1.0) {
        return DistributionSpec{Family::Gaussian, {mean, sd}, "Gaussian"};
    }
    static DistributionSpec uniform(double lo, double hi) {
        return DistributionSpec{Family::Uniform, {lo, hi}, "Uniform"};
    }
};

namespace detail {

inline double sample_beta(double a, double b, std::mt19937_64& rng) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

inline double sample_laplace(double loc, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng) - 0.5;
    return loc - scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
}

inline double sample_pareto(double minimum, double shape, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return minimum * std::pow(1.0 - unif(rng), -1.0 / shape);
}

inline double sample_gmm(const std::vector<double>& params, std::mt19937_64& rng) {
    const int c = static_cast<int>(params.size()) / 3;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    int comp = c - 1;
    for (int i = 0; i < c; ++i) {
        acc += params[i];
        if (u <= acc) {
            comp = i;
            break;
        }
    }
    std::normal_distribution<double> normal(params[c + comp], params[2 * c + comp]);
    return normal(rng);
}

}  // namespace detail

/// Draws one value from `spec` advancing `rng`. The spec must be valid.
inline double sample_one(const DistributionSpec& spec, std::mt19937_64& rng) {
    const auto& p = spec.params;
    switch (spec.family) {
        case Family::Beta: return detail::sample_beta(p[0], p[1], rng);
        case Family::Binomial: {
            std::binomial_distribution<int> d(static_cast<int>(p[0]), p[1]);
            return static_cast<double>(d(rng));
        }
        case Family::Cauchy: {
            std::cauchy_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::ChiSquared: {
            std::chi_squared_distribution<double> d(p[0]);
            return d(rng);
        }
        case Family::Exponential: {
            std::exponential_distribution<double> d(p[0]);
            return d(rng);
        }
        case Family::Gamma: {
            std::gamma_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::Gaussian: {
            std::normal_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::Gumbel: {
            std::extreme_value_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::Laplace: return detail::sample_laplace(p[0], p[1], rng);
        case Family::LogNormal: {
            std::lognormal_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::Pareto: return detail::sample_pareto(p[0], p[1], rng);
        case Family::StudentT: {
            std::student_t_distribution<double> d(p[0]);
            return d(rng);
        }
        case Family::Uniform: {
            std::uniform_real_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::Weibull: {
            std::weibull_distribution<double> d(p[0], p[1]);
            return d(rng);
        }
        case Family::GaussianMixture: return detail::sample_gmm(p, rng);
    }
    throw ArgumentError("unknown family enum value");
}

/// n x p design matrix with i.i.d. entries from `spec`, bit-reproducible per seed.
/// Entries are drawn column by column.
inline Eigen::MatrixXd sample_design(const DistributionSpec& spec, int n, int p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw ArgumentError("sample_design: n and p must be >= 1");
    spec.validate();
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd X(n, p);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) X(i, j) = sample_one(spec, rng);
    }
    return X;
}

/// Randomized hyperparameters per family, drawn from the documented default
/// ranges below. The paper-style corpora randomize these per system; the
/// ranges are deliberately wide (U-shaped Betas, near-Bernoulli Binomials,
/// heavy Student tails) so trained estimators see varied column laws.
///
///   Beta:        alpha, beta ~ U[0.3, 5]
///   Binomial:    trials ~ U{2..20}, prob ~ U[0.15, 0.85]
///   Cauchy:      location ~ U[-2, 2], scale ~ U[0.3, 3]
///   ChiSquared:  dof ~ U[0.5, 10]
///   Exponential: rate ~ U[0.3, 3]
///   Gamma:       shape ~ U[0.3, 5], scale ~ U[0.3, 3]
///   Gaussian:    mean ~ U[-3, 3], std ~ U[0.3, 3]
///   Gumbel:      location ~ U[-2, 2], scale ~ U[0.3, 3]
///   Laplace:     location ~ U[-2, 2], scale ~ U[0.3, 3]
///   LogNormal:   mu ~ U[-1, 1], sigma ~ U[0.2, 1.25]
///   Pareto:      minimum ~ U[0.5, 2], shape ~ U[2.2, 6]
///   StudentT:    dof ~ U[2.5, 30]
///   Uniform:     lo ~ U[-3, 1.5], hi = lo + U[0.3, 6]
///   Weibull:     shape ~ U[0.4, 4], scale ~ U[0.3, 3]
///   GaussianMixture: 3 components, weights ~ flat Dirichlet,
///                    means ~ U[-3, 3], stds ~ U[0.5, 2]
inline DistributionSpec random_spec(Family family, std::mt19937_64& rng) {
    auto unif = [&](double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(rng);
    };
    DistributionSpec spec;
    spec.family = family;
    spec.label = family_name(family);
    switch (family) {
        case Family::Beta: spec.params = {unif(0.3, 5.0), unif(0.3, 5.0)}; break;
        case Family::Binomial: {
            std::uniform_int_distribution<int> trials(2, 20);
            spec.params = {static_cast<double>(trials(rng)), unif(0.15, 0.85)};
            break;
        }
        case Family::Cauchy: spec.params = {unif(-2.0, 2.0), unif(0.3, 3.0)}; break;
        case Family::ChiSquared: spec.params = {unif(0.5, 10.0)}; break;
        case Family::Exponential: spec.params = {unif(0.3, 3.0)}; break;
        case Family::Gamma: spec.params = {unif(0.3, 5.0), unif(0.3, 3.0)}; break;
        case Family::Gaussian: spec.params = {unif(-3.0, 3.0), unif(0.3, 3.0)}; break;
        case Family::Gumbel: spec.params = {unif(-2.0, 2.0), unif(0.3, 3.0)}; break;
        case Family::Laplace: spec.params = {unif(-2.0, 2.0), unif(0.3, 3.0)}; break;
        case Family::LogNormal: spec.params = {unif(-1.0, 1.0), unif(0.2, 1.25)}; break;
        case Family::Pareto: spec.params = {unif(0.5, 2.0), unif(2.2, 6.0)}; break;
        case Family::StudentT: spec.params = {unif(2.5, 30.0)}; break;
        case Family::Uniform: {
            const double lo = unif(-3.0, 1.5);
            spec.params = {lo, lo + unif(0.3, 6.0)};
            break;
        }
        case Family::Weibull: spec.params = {unif(0.4, 4.0), unif(0.3, 3.0)}; break;
        case Family::GaussianMixture: {
            const int c = 3;
            std::vector<double> w(c);
            double wsum = 0.0;
            std::exponential_distribution<double> e(1.0);
            for (int i = 0; i < c; ++i) {
                w[i] = e(rng);
                wsum += w[i];
            }
            spec.params.clear();
            for (int i = 0; i < c; ++i) spec.params.push_back(w[i] / wsum);
            for (int i = 0; i < c; ++i) spec.params.push_back(unif(-3.0, 3.0));
            for (int i = 0; i < c; ++i) spec.params.push_back(unif(0.5, 2.0));
            break;
        }
    }
    spec.validate();
    return spec;
}

}  // namespace trex
