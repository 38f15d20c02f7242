#pragma once

#include <Eigen/Dense>
#include <vector>

#include "trex/common.hpp"
#include "trex/lars.hpp"

namespace trex {

/// Relative and deflated relative occurrences over the (T, j) grid for one
/// dataset. Row T-1 holds the values at termination count T, T in 1..T_max.
struct OccurrenceTable {
    Eigen::MatrixXd phi;           // T_max x p, entries are multiples of 1/K
    Eigen::MatrixXd phi_deflated;  // T_max x p, <= phi entrywise
    int K = 0;
    int L = 0;
    int T_max = 0;
    int p = 0;
    int exhausted_runs = 0;  // experiments whose path ended before T_max dummies

    double phi_at(int T, int j) const { return phi(T - 1, j); }
    double phi_deflated_at(int T, int j) const { return phi_deflated(T - 1, j); }
};

/// Original variables that entered strictly before the T-th dummy in one
/// experiment. T must not exceed the run's dummy count.
inline std::vector<int> candidate_set(const ExperimentResult& result, int T) {
    if (T < 1 || T > result.dummies_entered)
        throw ArgumentError("candidate_set: T exceeds the run's dummy count");
    std::vector<int> out;
    int dummies = 0;
    for (const auto& e : result.entry_order) {
        if (e.is_dummy) {
            if (++dummies == T) break;
        } else {
            out.push_back(e.column);
        }
    }
    return out;
}

namespace detail {

/// Candidate set with the early-exhaustion convention: runs that ended before
/// T dummies contribute their final state.
inline std::vector<int> candidate_set_frozen(const ExperimentResult& result, int T) {
    if (T <= result.dummies_entered) return candidate_set(result, T);
    return result.originals_entered();
}

}  // namespace detail

/// Relative occurrences: phi[T][j] is the fraction of experiments whose
/// candidate set at termination count T contains variable j.
inline Eigen::MatrixXd relative_occurrences(const std::vector<ExperimentResult>& results,
                                            int T_max, int p) {
    if (results.empty()) throw ArgumentError("relative_occurrences: no experiments");
    if (T_max < 1) throw ArgumentError("relative_occurrences: T_max must be >= 1");
    const double K = static_cast<double>(results.size());
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(T_max, p);
    for (const auto& run : results) {
        for (int T = 1; T <= T_max; ++T) {
            for (int j : detail::candidate_set_frozen(run, T)) phi(T - 1, j) += 1.0;
        }
    }
    phi /= K;
    return phi;
}

namespace detail {

/// Deflation of relative occurrences: the row at termination count T is scaled
/// by 1 / L^(T-1), so every additional dummy tolerated in the model divides
/// the credited occurrence by the size of the dummy pool. T = 1 is untouched.
///
/// On null data a variable whose fixed correlation happens to beat the
/// refreshed dummies can reach a high occurrence at any depth, and no
/// per-variable statistic separates such a variable from a true one. Milder
/// increment-based deflations (occurrence mass earned at dummy count t scaled
/// by (L - t + 1) / L) leave the shortfall estimate far below the realized
/// false-discovery proportion on null systems, so the selector loses FDR
/// control entirely. Crushing mass earned beyond the first dummy keeps the
/// shortfall estimate conservative at every grid cell deeper than T = 1.
inline Eigen::MatrixXd deflate_phi(const Eigen::MatrixXd& phi, int L) {
    Eigen::MatrixXd out(phi.rows(), phi.cols());
    double scale = 1.0;
    for (int t = 1; t <= phi.rows(); ++t) {
        out.row(t - 1) = scale * phi.row(t - 1);
        scale /= static_cast<double>(L);
    }
    return out;
}

}  // namespace detail

/// Deflated relative occurrences Phi' for the same experiments.
inline Eigen::MatrixXd deflate_occurrences(const std::vector<ExperimentResult>& results,
                                           int T_max, int p, int L) {
    if (L < T_max) throw ArgumentError("deflate_occurrences: requires T_max <= L");
    return detail::deflate_phi(relative_occurrences(results, T_max, p), L);
}

/// Builds the full table (phi and phi_deflated) from K experiments.
inline OccurrenceTable build_occurrence_table(const std::vector<ExperimentResult>& results,
                                              int T_max, int p, int L) {
    if (L < T_max) throw ArgumentError("build_occurrence_table: requires T_max <= L");
    OccurrenceTable table;
    table.phi = relative_occurrences(results, T_max, p);
    table.phi_deflated = detail::deflate_phi(table.phi, L);
    table.K = static_cast<int>(results.size());
    table.L = L;
    table.T_max = T_max;
    table.p = p;
    for (const auto& run : results)
        if (run.dummies_entered < T_max) ++table.exhausted_runs;
    return table;
}

}  // namespace trex
