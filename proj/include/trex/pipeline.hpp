#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trex/common.hpp"
#include "trex/csv.hpp"
#include "trex/mlp.hpp"
#include "trex/selector.hpp"
#include "trex/synth.hpp"

namespace trex {

/// Recipe for a randomized corpus: fixed problem shape, families and SNR
/// levels sampled uniformly per system, per-family hyperparameters randomized.
struct CorpusSpec {
    int n = 15;
    int p = 30;
    int s = 3;
    std::vector<double> snr_choices = {0.3, 1.0, 3.0};
    std::vector<Family> families = training_families();
    double beta_lo = 1.0;
    double beta_hi = 3.0;

    void validate() const {
        if (snr_choices.empty()) throw ArgumentError("CorpusSpec: no SNR choices");
        for (double snr : snr_choices)
            if (!(snr > 0)) throw ArgumentError("CorpusSpec: SNR values must be > 0");
        if (families.empty()) throw ArgumentError("CorpusSpec: no families");
    }
};

inline SystemConfig sample_config(const CorpusSpec& spec, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick_family(0, spec.families.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_snr(0, spec.snr_choices.size() - 1);
    SystemConfig cfg;
    cfg.n = spec.n;
    cfg.p = spec.p;
    cfg.s = spec.s;
    cfg.snr = spec.snr_choices[pick_snr(rng)];
    cfg.beta_lo = spec.beta_lo;
    cfg.beta_hi = spec.beta_hi;
    cfg.distribution = random_spec(spec.families[pick_family(rng)], rng);
    return cfg;
}

inline ConfigSampler make_config_sampler(CorpusSpec spec) {
    spec.validate();
    return [spec = std::move(spec)](std::mt19937_64& rng) { return sample_config(spec, rng); };
}

/// Seed of the experiment block run on system i of a sweep; shared between
/// training-set extraction, evaluation and surface reporting so the same
/// system yields the same occurrence table everywhere.
inline std::uint64_t system_table_seed(std::uint64_t master_seed, std::size_t index) {
    return derive_seed(master_seed, index, 0xab1eull);
}

inline int effective_dummies(int L_rule, int p) { return L_rule > 0 ? L_rule : p; }

/// What to extract per corpus system: K experiments to depth T_max, then one
/// labeled example for every (v, T) grid pair.
struct TrainingSetSpec {
    CorpusSpec corpus;
    int count = 2000;
    int K = 20;
    int L = 0;  // 0 means L = p
    int T_max = 10;
    std::vector<double> v_grid = CalibrationGrid::defaults().v_grid;

    void validate() const {
        corpus.validate();
        if (count < 1) throw ArgumentError("TrainingSetSpec: count must be >= 1");
        if (K < 1) throw ArgumentError("TrainingSetSpec: K must be >= 1");
        if (T_max < 1) throw ArgumentError("TrainingSetSpec: T_max must be >= 1");
        if (v_grid.empty()) throw ArgumentError("TrainingSetSpec: empty v grid");
    }
};

/// Labels every grid cell of every system with its realized FDP against the
/// known truth. Examples appear in (system, T, v) order; pure per master seed.
///
/// Systems whose forward-selection paths degenerate (possible for discrete
/// column laws at small n) are redrawn deterministically, like designs with
/// constant columns.
inline std::vector<TrainingExample> build_training_set(const TrainingSetSpec& spec,
                                                       std::uint64_t master_seed, int threads = 1) {
    spec.validate();
    const auto sampler = make_config_sampler(spec.corpus);
    const std::size_t cells = spec.v_grid.size() * static_cast<std::size_t>(spec.T_max);
    std::vector<TrainingExample> examples(static_cast<std::size_t>(spec.count) * cells);
    parallel_for(static_cast<std::size_t>(spec.count), threads, [&](std::size_t i) {
        std::mt19937_64 cfg_rng(derive_seed(master_seed, i, 0xc0f1ull));
        const SystemConfig cfg = sampler(cfg_rng);
        const int L = effective_dummies(spec.L, cfg.p);
        SyntheticSystem sys;
        OccurrenceTable table;
        bool built = false;
        for (int attempt = 0; attempt < 64 && !built; ++attempt) {
            const std::uint64_t sys_seed =
                attempt == 0 ? derive_seed(master_seed, i, 0x5e5eull)
                             : derive_seed(derive_seed(master_seed, i, 0x9e7aull),
                                           static_cast<std::uint64_t>(attempt));
            try {
                sys = generate_system_usable(cfg, sys_seed);
                table = trex_occurrences(sys.X, sys.y, spec.K, L, spec.T_max,
                                         derive_seed(system_table_seed(master_seed, i),
                                                     static_cast<std::uint64_t>(attempt)));
                built = true;
            } catch (const PathError&) {
            }
        }
        if (!built)
            throw DataError("build_training_set: system " + std::to_string(i) +
                            " kept degenerating after 64 redraws");
        std::size_t slot = i * cells;
        for (int T = 1; T <= spec.T_max; ++T) {
            for (double v : spec.v_grid) {
                TrainingExample ex;
                ex.label = fdp_tpp(selected_at(table, v, T), sys.active_set).fdp;
                ex.v = v;
                ex.T = T;
                ex.L = L;
                ex.p = cfg.p;
                ex.phi.assign(table.phi.row(T - 1).begin(), table.phi.row(T - 1).end());
                ex.system_index = static_cast<long>(i);
                examples[slot++] = std::move(ex);
            }
        }
    });
    return examples;
}

/// One (method, system) evaluation row.
struct EvaluationRecord {
    std::string method;
    double snr = 0.0;
    std::uint64_t seed = 0;
    double fdp = 0.0;
    double tpp = 0.0;
    double v_star = 0.0;
    int T_star = 0;
    int n_selected = 0;
    bool feasible = false;
};

struct MethodSpec {
    std::string label;
    FdpEstimator estimator;
};

/// Runs every method on every system, sharing the occurrence table per system.
/// Records are ordered by (system, method).
inline std::vector<EvaluationRecord> evaluate_sweep(const std::vector<SyntheticSystem>& systems,
                                                    const std::vector<MethodSpec>& methods,
                                                    const CalibrationGrid& grid, int K, int L_rule,
                                                    std::uint64_t master_seed, int threads = 1) {
    grid.validate();
    if (systems.empty()) throw ArgumentError("evaluate_sweep: no systems");
    if (methods.empty()) throw ArgumentError("evaluate_sweep: no methods");
    std::vector<EvaluationRecord> records(systems.size() * methods.size());
    parallel_for(systems.size(), threads, [&](std::size_t i) {
        const SyntheticSystem& sys = systems[i];
        const int L = effective_dummies(L_rule, sys.config.p);
        const OccurrenceTable table =
            trex_occurrences(sys.X, sys.y, K, L, grid.T_max, system_table_seed(master_seed, i));
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const SelectionResult sel = calibrate(table, grid, methods[m].estimator, methods[m].label);
            const Metrics metrics = fdp_tpp(sel.selected, sys.active_set);
            EvaluationRecord& rec = records[i * methods.size() + m];
            rec.method = methods[m].label;
            rec.snr = sys.config.snr;
            rec.seed = sys.seed;
            rec.fdp = metrics.fdp;
            rec.tpp = metrics.tpp;
            rec.v_star = sel.v_star;
            rec.T_star = sel.T_star;
            rec.n_selected = static_cast<int>(sel.selected.size());
            rec.feasible = sel.feasible;
        }
    });
    return records;
}

/// Mean and standard deviation of realized FDP/TPP per (method, SNR).
struct AggregateRow {
    std::string method;
    double snr = 0.0;
    double fdr_mean = 0.0;
    double fdr_std = 0.0;
    double tpr_mean = 0.0;
    double tpr_std = 0.0;
    long n_systems = 0;
};

inline std::vector<AggregateRow> aggregate_records(const std::vector<EvaluationRecord>& records) {
    std::map<std::pair<std::string, double>, std::vector<const EvaluationRecord*>> groups;
    for (const auto& rec : records) groups[{rec.method, rec.snr}].push_back(&rec);
    std::vector<AggregateRow> rows;
    for (const auto& [key, members] : groups) {
        AggregateRow row;
        row.method = key.first;
        row.snr = key.second;
        row.n_systems = static_cast<long>(members.size());
        double fsum = 0.0, tsum = 0.0;
        for (const auto* rec : members) {
            fsum += rec->fdp;
            tsum += rec->tpp;
        }
        row.fdr_mean = fsum / static_cast<double>(members.size());
        row.tpr_mean = tsum / static_cast<double>(members.size());
        if (members.size() > 1) {
            double fvar = 0.0, tvar = 0.0;
            for (const auto* rec : members) {
                fvar += (rec->fdp - row.fdr_mean) * (rec->fdp - row.fdr_mean);
                tvar += (rec->tpp - row.tpr_mean) * (rec->tpp - row.tpr_mean);
            }
            row.fdr_std = std::sqrt(fvar / static_cast<double>(members.size() - 1));
            row.tpr_std = std::sqrt(tvar / static_cast<double>(members.size() - 1));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_results_csv(const std::vector<EvaluationRecord>& records, std::ostream& out) {
    out << "method,snr,seed,fdp,tpp,v_star,T_star,n_selected,feasible\n";
    for (const auto& rec : records) {
        out << rec.method << ',' << format_double(rec.snr) << ',' << rec.seed << ','
            << format_double(rec.fdp) << ',' << format_double(rec.tpp) << ','
            << format_double(rec.v_star) << ',' << rec.T_star << ',' << rec.n_selected << ','
            << (rec.feasible ? 1 : 0) << '\n';
    }
}

inline void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "method,snr,fdr_mean,fdr_std,tpr_mean,tpr_std,n_systems\n";
    for (const auto& row : rows) {
        out << row.method << ',' << format_double(row.snr) << ',' << format_double(row.fdr_mean)
            << ',' << format_double(row.fdr_std) << ',' << format_double(row.tpr_mean) << ','
            << format_double(row.tpr_std) << ',' << row.n_systems << '\n';
    }
}

/// Mean predicted vs mean realized FDP at one calibration grid cell.
struct SurfaceRow {
    double v = 0.5;
    int T = 1;
    double mean_pred_fdp = 0.0;
    double mean_true_fdp = 0.0;
};

struct SurfaceReport {
    std::vector<SurfaceRow> rows;
    /// Fraction of cells with mean_pred_fdp >= mean_true_fdp (ties count as
    /// overestimation).
    double overestimation_fraction = 0.0;
};

/// Estimator that may also inspect the system under evaluation; lets tests
/// substitute a truth oracle.
using SystemAwareEstimator =
    std::function<double(std::size_t index, const OccurrenceTable&, double v, int T)>;

inline SurfaceReport surface_report(const std::vector<SyntheticSystem>& systems,
                                    const SystemAwareEstimator& estimator,
                                    const CalibrationGrid& grid, int K, int L_rule,
                                    std::uint64_t master_seed, int threads = 1) {
    grid.validate();
    if (systems.empty()) throw ArgumentError("surface_report: no systems");
    const std::size_t cells = grid.v_grid.size() * static_cast<std::size_t>(grid.T_max);
    std::vector<double> pred_sum(cells, 0.0), true_sum(cells, 0.0);
    std::vector<std::vector<double>> preds(systems.size()), trues(systems.size());
    parallel_for(systems.size(), threads, [&](std::size_t i) {
        const SyntheticSystem& sys = systems[i];
        const int L = effective_dummies(L_rule, sys.config.p);
        const OccurrenceTable table =
            trex_occurrences(sys.X, sys.y, K, L, grid.T_max, system_table_seed(master_seed, i));
        preds[i].reserve(cells);
        trues[i].reserve(cells);
        for (int T = 1; T <= grid.T_max; ++T) {
            for (double v : grid.v_grid) {
                preds[i].push_back(estimator(i, table, v, T));
                trues[i].push_back(fdp_tpp(selected_at(table, v, T), sys.active_set).fdp);
            }
        }
    });
    for (std::size_t i = 0; i < systems.size(); ++i) {
        for (std::size_t c = 0; c < cells; ++c) {
            pred_sum[c] += preds[i][c];
            true_sum[c] += trues[i][c];
        }
    }
    SurfaceReport report;
    const double count = static_cast<double>(systems.size());
    std::size_t c = 0;
    long over = 0;
    for (int T = 1; T <= grid.T_max; ++T) {
        for (double v : grid.v_grid) {
            SurfaceRow row;
            row.v = v;
            row.T = T;
            row.mean_pred_fdp = pred_sum[c] / count;
            row.mean_true_fdp = true_sum[c] / count;
            if (row.mean_pred_fdp >= row.mean_true_fdp) ++over;
            report.rows.push_back(row);
            ++c;
        }
    }
    report.overestimation_fraction = static_cast<double>(over) / static_cast<double>(cells);
    return report;
}

inline SurfaceReport surface_report(const std::vector<SyntheticSystem>& systems,
                                    const FdpEstimator& estimator, const CalibrationGrid& grid,
                                    int K, int L_rule, std::uint64_t master_seed, int threads = 1) {
    return surface_report(
        systems,
        [&estimator](std::size_t, const OccurrenceTable& t, double v, int T) {
            return estimator(t, v, T);
        },
        grid, K, L_rule, master_seed, threads);
}

inline void write_surface_csv(const SurfaceReport& report, std::ostream& out) {
    out << "v,T,mean_pred_fdp,mean_true_fdp\n";
    for (const auto& row : report.rows) {
        out << format_double(row.v) << ',' << row.T << ',' << format_double(row.mean_pred_fdp)
            << ',' << format_double(row.mean_true_fdp) << '\n';
    }
}

/// An ingested dataset: validated numeric X and y, optional ground truth.
struct ExternalDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<int> truth;  // 0-based active indices, when known
    bool has_truth = false;
    std::string source;
};

struct IngestOptions {
    bool header = false;
    int p_max = 0;  // when > 0, reject datasets wider than this
};

/// Reads X and y CSVs, checking shape agreement, numeric cells and
/// non-degenerate columns. y must be a single column (binary allowed).
inline ExternalDataset ingest_csv(const std::string& x_path, const std::string& y_path,
                                  const IngestOptions& options = {},
                                  const std::optional<std::string>& truth_path = std::nullopt) {
    ExternalDataset ds;
    ds.X = read_numeric_csv(x_path, options.header);
    const Eigen::MatrixXd ymat = read_numeric_csv(y_path, options.header);
    if (ymat.cols() != 1)
        throw DataError(y_path + ": response must be a single column, found " +
                        std::to_string(ymat.cols()));
    if (ymat.rows() != ds.X.rows())
        throw DataError("row mismatch: " + x_path + " has " + std::to_string(ds.X.rows()) +
                        " rows, " + y_path + " has " + std::to_string(ymat.rows()));
    ds.y = ymat.col(0);
    for (int j = 0; j < ds.X.cols(); ++j) {
        if ((ds.X.col(j).array() - ds.X(0, j)).abs().maxCoeff() == 0.0)
            throw DataError(x_path + ": column " + std::to_string(j) + " is constant");
    }
    if (options.p_max > 0 && ds.X.cols() > options.p_max)
        throw DataError(x_path + ": p = " + std::to_string(ds.X.cols()) +
                        " exceeds the model's maximum dimension " + std::to_string(options.p_max));
    if (truth_path) {
        std::ifstream in(*truth_path);
        if (!in) throw IoError("cannot open truth file: " + *truth_path);
        long idx;
        while (in >> idx) {
            if (idx < 0 || idx >= ds.X.cols())
                throw DataError(*truth_path + ": truth index " + std::to_string(idx) +
                                " out of range [0, " + std::to_string(ds.X.cols()) + ")");
            ds.truth.push_back(static_cast<int>(idx));
        }
        if (!in.eof())
            throw DataError(*truth_path + ": truth file must contain whitespace-separated indices");
        ds.has_truth = true;
    }
    ds.source = x_path;
    return ds;
}

struct ExternalReport {
    SelectionResult selection;
    OccurrenceTable table;
    std::optional<Metrics> metrics;
};

/// Full selection pipeline on external data; reports realized metrics when a
/// truth set accompanies the dataset.
inline ExternalReport select_external(const ExternalDataset& dataset, const FdpEstimator& estimator,
                                      const std::string& estimator_label, int K, int L_rule,
                                      const CalibrationGrid& grid, std::uint64_t seed) {
    ExternalReport report;
    const int L = effective_dummies(L_rule, static_cast<int>(dataset.X.cols()));
    TrexResult res = trex_select(dataset.X, dataset.y, K, L, grid, estimator, estimator_label, seed);
    report.selection = std::move(res.selection);
    report.table = std::move(res.table);
    if (dataset.has_truth) report.metrics = fdp_tpp(report.selection.selected, dataset.truth);
    return report;
}

}  // namespace trex
