#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trex/common.hpp"
#include "trex/lars.hpp"
#include "trex/occurrence.hpp"
#include "trex/standardize.hpp"

namespace trex {

/// Grid of calibration parameters: voting thresholds v in [0.5, 1) and
/// termination counts T in 1..T_max, with a target FDR level alpha.
struct CalibrationGrid {
    std::vector<double> v_grid;
    int T_max = 10;
    double alpha = 0.2;

    void validate() const {
        if (T_max < 1) throw ArgumentError("CalibrationGrid: T_max must be >= 1");
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw ArgumentError("CalibrationGrid: alpha must lie in (0, 1)");
        if (v_grid.empty()) throw ArgumentError("CalibrationGrid: empty v grid");
        double prev = 0.0;
        for (double v : v_grid) {
            if (v < 0.5 || v >= 1.0)
                throw ArgumentError("CalibrationGrid: v values must lie in [0.5, 1)");
            if (v <= prev && v != v_grid.front())
                throw ArgumentError("CalibrationGrid: v grid must be increasing");
            prev = v;
        }
    }

    /// v in {0.50, 0.55, ..., 0.95}; with K = 20 experiments this resolves
    /// every attainable occurrence level under the strict comparison phi > v.
    static CalibrationGrid defaults(double alpha = 0.2, int T_max = 10) {
        CalibrationGrid g;
        g.alpha = alpha;
        g.T_max = T_max;
        for (int i = 0; i < 10; ++i) g.v_grid.push_back(0.50 + 0.05 * i);
        return g;
    }
};

/// Outcome of calibration: the selected set and the chosen grid point.
struct SelectionResult {
    std::vector<int> selected;  // sorted 0-based indices
    double v_star = 0.0;
    int T_star = 0;
    double fdp_estimate = 1.0;  // estimator value at the chosen point
    std::string estimator;      // "analytical" or "learned"
    bool feasible = false;
};

/// FDP estimator evaluated at one grid point of an occurrence table.
using FdpEstimator = std::function<double(const OccurrenceTable&, double v, int T)>;

/// Votes: variables whose relative occurrence at T strictly exceeds v.
inline std::vector<int> selected_at(const OccurrenceTable& table, double v, int T) {
    std::vector<int> out;
    for (int j = 0; j < table.p; ++j)
        if (table.phi_at(T, j) > v) out.push_back(j);
    return out;
}

/// Conservative analytical FDP estimate: mean shortfall (1 - Phi') over the
/// voted set, or 0 when nothing is voted in.
inline double analytical_fdp(const OccurrenceTable& table, double v, int T) {
    if (v < 0.5 || v >= 1.0) throw ArgumentError("analytical_fdp: v must lie in [0.5, 1)");
    if (T < 1 || T > table.T_max) throw ArgumentError("analytical_fdp: T out of range");
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < table.p; ++j) {
        if (table.phi_at(T, j) > v) {
            sum += 1.0 - table.phi_deflated_at(T, j);
            ++count;
        }
    }
    return sum / std::max(1, count);
}

inline FdpEstimator analytical_estimator() {
    return [](const OccurrenceTable& t, double v, int T) { return analytical_fdp(t, v, T); };
}

/// Grid search: among points with estimate <= alpha, picks one maximizing the
/// selected-set size; ties broken by smaller estimate, then smaller T, then
/// larger v. Infeasible grids yield an empty selection with feasible = false.
inline SelectionResult calibrate(const OccurrenceTable& table, const CalibrationGrid& grid,
                                 const FdpEstimator& estimator, const std::string& label) {
    grid.validate();
    if (grid.T_max > table.T_max)
        throw ArgumentError("calibrate: grid T_max exceeds the table's T_max");
    SelectionResult best;
    best.estimator = label;
    for (int T = 1; T <= grid.T_max; ++T) {
        for (double v : grid.v_grid) {
            const double est = estimator(table, v, T);
            if (!(est <= grid.alpha)) continue;
            std::vector<int> sel = selected_at(table, v, T);
            const int size = static_cast<int>(sel.size());
            const int best_size = static_cast<int>(best.selected.size());
            bool better = false;
            if (!best.feasible) {
                better = true;
            } else if (size != best_size) {
                better = size > best_size;
            } else if (est != best.fdp_estimate) {
                better = est < best.fdp_estimate;
            } else if (T != best.T_star) {
                better = T < best.T_star;
            } else {
                better = v > best.v_star;
            }
            if (better) {
                best.selected = std::move(sel);
                best.v_star = v;
                best.T_star = T;
                best.fdp_estimate = est;
                best.feasible = true;
            }
        }
    }
    return best;
}

/// Realized false-discovery and true-positive proportions of a selection
/// against the ground-truth active set (empty-set conventions via max{1, .}).
struct Metrics {
    double fdp = 0.0;
    double tpp = 0.0;
};

inline Metrics fdp_tpp(const std::vector<int>& selected, const std::vector<int>& truth) {
    std::vector<int> sel = selected, tru = truth;
    std::sort(sel.begin(), sel.end());
    std::sort(tru.begin(), tru.end());
    std::vector<int> hits;
    std::set_intersection(sel.begin(), sel.end(), tru.begin(), tru.end(), std::back_inserter(hits));
    Metrics m;
    const auto false_count = static_cast<double>(sel.size() - hits.size());
    m.fdp = false_count / std::max<std::size_t>(1, sel.size());
    m.tpp = static_cast<double>(hits.size()) / std::max<std::size_t>(1, tru.size());
    return m;
}

struct TrexResult {
    SelectionResult selection;
    OccurrenceTable table;
};

/// Runs K experiments to depth T_max with fresh dummies each and returns the
/// occurrence table, without calibrating. Deterministic per seed.
inline OccurrenceTable trex_occurrences(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        int K, int L, int T_max, std::uint64_t seed) {
    if (K < 1) throw ArgumentError("trex_occurrences: K must be >= 1");
    if (L < 1) throw ArgumentError("trex_occurrences: L must be >= 1");
    if (T_max < 1 || T_max > L)
        throw ArgumentError("trex_occurrences: requires 1 <= T_max <= L");
    const StandardizedData data = standardize(X, y);
    std::vector<ExperimentResult> runs(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        Eigen::MatrixXd D = generate_dummies(static_cast<int>(X.rows()), L,
                                             derive_seed(seed, 0xd0d0ull, static_cast<std::uint64_t>(k)));
        standardize_columns_inplace(D, "dummy");
        runs[k] = lars_run(data, D, T_max);
        runs[k].k = k;
    }
    return build_occurrence_table(runs, T_max, data.p, L);
}

/// End-to-end selector: occurrence table plus calibration with the supplied
/// estimator. Pure function of (inputs, seed).
inline TrexResult trex_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int K, int L,
                              const CalibrationGrid& grid, const FdpEstimator& estimator,
                              const std::string& estimator_label, std::uint64_t seed) {
    grid.validate();
    TrexResult out;
    out.table = trex_occurrences(X, y, K, L, grid.T_max, seed);
    out.selection = calibrate(out.table, grid, estimator, estimator_label);
    return out;
}

}  // namespace trex
