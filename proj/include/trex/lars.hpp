#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "trex/common.hpp"
#include "trex/standardize.hpp"

namespace trex {

/// n x L matrix of i.i.d. standard Gaussian dummy predictors.
inline Eigen::MatrixXd generate_dummies(int n, int L, std::uint64_t seed) {
    if (n < 1 || L < 1) throw ArgumentError("generate_dummies: n and L must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd D(n, L);
    for (int j = 0; j < L; ++j) {
        for (int i = 0; i < n; ++i) D(i, j) = normal(rng);
    }
    return D;
}

/// One entry on the forward-selection path. `column` indexes the enlarged
/// matrix [X D]: originals are 0..p-1, dummies p..p+L-1.
struct EntryRecord {
    int column = 0;
    bool is_dummy = false;
    int dummies_before = 0;  // dummies already in the model when this entered
};

/// Outcome of one dummy-augmented forward-selection experiment.
struct ExperimentResult {
    int k = 0;                             // experiment index
    std::vector<EntryRecord> entry_order;  // in path order, no repeats
    int dummies_entered = 0;
    bool exhausted = false;  // path ended before stop_T dummies entered

    std::vector<int> originals_entered() const {
        std::vector<int> out;
        for (const auto& e : entry_order)
            if (!e.is_dummy) out.push_back(e.column);
        return out;
    }
};

/// Per-step diagnostics, mainly for invariant checks: the spread of the active
/// set's absolute residual correlations must stay near zero along the path.
struct LarsTrace {
    std::vector<double> active_corr_spread;  // max - min over active |corr|, per step
    std::vector<double> max_corr;            // entering correlation level, per step
};

/// Least-angle regression on the enlarged standardized data [Xs D], recording
/// the order in which columns enter the model. The path terminates as soon as
/// the stop_T-th dummy enters, or exhausts after min(n-1, p+L) entries (or a
/// vanishing residual correlation).
///
/// `dummies` must be standardized the same way as `data.Xs` (centered columns
/// of unit norm). Throws PathError when the equiangular system degenerates.
inline ExperimentResult lars_run(const StandardizedData& data, const Eigen::MatrixXd& dummies,
                                 int stop_T, LarsTrace* trace = nullptr) {
    const int n = static_cast<int>(data.Xs.rows());
    const int p = data.p;
    const int L = static_cast<int>(dummies.cols());
    if (dummies.rows() != n) throw ArgumentError("lars_run: dummy row count mismatch");
    if (stop_T < 1 || stop_T > L) throw ArgumentError("lars_run: requires 1 <= stop_T <= L");

    const int m = p + L;
    const int max_entries = std::min(n - 1, m);
    constexpr double kEps = 1e-12;

    Eigen::MatrixXd Xt(n, m);
    Xt.leftCols(p) = data.Xs;
    Xt.rightCols(L) = dummies;

    Eigen::VectorXd residual = data.ys;
    std::vector<char> active(static_cast<std::size_t>(m), 0);
    std::vector<int> active_idx;
    std::vector<double> sign;
    Eigen::MatrixXd gram(max_entries, max_entries);  // grows with the active set

    ExperimentResult result;
    for (int step = 1;; ++step) {
        const Eigen::VectorXd corr = Xt.transpose() * residual;

        // Equiangularity bookkeeping over the current active set.
        if (trace && !active_idx.empty()) {
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (int j : active_idx) {
                const double a = std::abs(corr[j]);
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
            trace->active_corr_spread.push_back(hi - lo);
        }

        int enter = -1;
        double cmax = 0.0;
        for (int j = 0; j < m; ++j) {
            if (active[j]) continue;
            const double a = std::abs(corr[j]);
            if (a > cmax) {
                cmax = a;
                enter = j;
            }
        }
        if (enter < 0 || cmax < kEps) {
            result.exhausted = true;
            break;
        }
        if (trace) trace->max_corr.push_back(cmax);

        EntryRecord rec;
        rec.column = enter;
        rec.is_dummy = enter >= p;
        rec.dummies_before = result.dummies_entered;
        result.entry_order.push_back(rec);
        if (rec.is_dummy) {
            ++result.dummies_entered;
            if (result.dummies_entered == stop_T) break;  // terminated experiment
        }

        const int k = static_cast<int>(active_idx.size());
        // Extend the active Gram with the entering column (sign-adjusted).
        const double s_new = corr[enter] >= 0 ? 1.0 : -1.0;
        for (int i = 0; i < k; ++i) {
            const double g = sign[i] * s_new * Xt.col(active_idx[i]).dot(Xt.col(enter));
            gram(i, k) = g;
            gram(k, i) = g;
        }
        gram(k, k) = 1.0;  // unit-norm columns
        active[enter] = 1;
        active_idx.push_back(enter);
        sign.push_back(s_new);

        if (static_cast<int>(active_idx.size()) >= max_entries) {
            result.exhausted = true;
            break;
        }

        const int ka = static_cast<int>(active_idx.size());
        Eigen::LLT<Eigen::MatrixXd> llt(gram.topLeftCorner(ka, ka));
        if (llt.info() != Eigen::Success)
            throw PathError(step, "equiangular system is rank-degenerate");
        const Eigen::VectorXd ginv1 = llt.solve(Eigen::VectorXd::Ones(ka));
        const double denom = ginv1.sum();
        if (!(denom > 0.0) || !std::isfinite(denom))
            throw PathError(step, "equiangular normalization failed");
        const double aa = 1.0 / std::sqrt(denom);
        const Eigen::VectorXd w = aa * ginv1;

        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < ka; ++i) u += sign[i] * w[i] * Xt.col(active_idx[i]);
        const Eigen::VectorXd a = Xt.transpose() * u;

        // The direction must keep every active column equally correlated; a
        // violation means the solve degenerated even if the factorization ran.
        for (int i = 0; i < ka; ++i) {
            if (std::abs(a[active_idx[i]] - sign[i] * aa) > 1e-7)
                throw PathError(step, "equiangular system is rank-degenerate");
        }

        // Smallest positive step at which an inactive column ties the active level.
        double gamma = cmax / aa;  // full step: active correlations hit zero
        for (int j = 0; j < m; ++j) {
            if (active[j]) continue;
            const double d1 = aa - a[j];
            if (std::abs(d1) > kEps) {
                const double g = (cmax - corr[j]) / d1;
                if (g > kEps && g < gamma) gamma = g;
            }
            const double d2 = aa + a[j];
            if (std::abs(d2) > kEps) {
                const double g = (cmax + corr[j]) / d2;
                if (g > kEps && g < gamma) gamma = g;
            }
        }
        residual -= gamma * u;
    }
    return result;
}

}  // namespace trex
