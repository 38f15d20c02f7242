// Command-line front end: corpus generation, training-set extraction, model
// training, SNR-sweep evaluation and external-data selection.
//
// Exit codes: 0 success, 2 usage error, 3 data validation error, 4 numerical
// failure. Outputs are written to temp files and renamed on success, so a
// failing run leaves no partial artifacts.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trex/trex.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_double_list(const std::string& csv, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw trex::ArgumentError(flag + ": cannot parse '" + token + "' as a number");
        }
    }
    if (out.empty()) throw trex::ArgumentError(flag + ": empty list");
    return out;
}

std::vector<trex::Family> parse_families(const std::string& csv) {
    if (csv == "training") return trex::training_families();
    if (csv == "all") return trex::all_families();
    std::vector<trex::Family> out;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) out.push_back(trex::family_from_name(token));
    }
    if (out.empty()) throw trex::ArgumentError("--families: empty list");
    return out;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw trex::IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw trex::IoError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_run_manifest(const fs::path& out_dir, const std::string& subcommand,
                        std::uint64_t seed, const json& config) {
    json doc;
    doc["subcommand"] = subcommand;
    doc["version"] = trex::kVersion;
    doc["seed"] = seed;
    doc["timestamp"] = timestamp_utc();
    doc["config"] = config;
    write_file_atomic(out_dir / "run_manifest.json", doc.dump(2) + "\n");
}

// Options shared by the corpus-producing subcommands.
struct CorpusOptions {
    int count = 200;
    int n = 15;
    int p = 30;
    int s = 3;
    std::string snr = "0.3,1,3";
    std::string families = "training";
    double beta_lo = 1.0;
    double beta_hi = 3.0;

    trex::CorpusSpec to_spec() const {
        trex::CorpusSpec spec;
        spec.n = n;
        spec.p = p;
        spec.s = s;
        spec.snr_choices = parse_double_list(snr, "--snr");
        spec.families = parse_families(families);
        spec.beta_lo = beta_lo;
        spec.beta_hi = beta_hi;
        spec.validate();
        return spec;
    }

    json to_json() const {
        return json{{"count", count}, {"n", n},        {"p", p},
                    {"s", s},         {"snr", snr},    {"families", families},
                    {"beta_lo", beta_lo}, {"beta_hi", beta_hi}};
    }

    void add_flags(CLI::App* cmd, int default_count) {
        count = default_count;
        cmd->add_option("--count", count, "Number of systems")->capture_default_str();
        cmd->add_option("--n", n, "Samples per system")->capture_default_str();
        cmd->add_option("--p", p, "Predictors per system")->capture_default_str();
        cmd->add_option("--s", s, "True active-set size")->capture_default_str();
        cmd->add_option("--snr", snr, "Comma-separated SNR levels, sampled per system")
            ->capture_default_str();
        cmd->add_option("--families", families,
                        "Comma-separated families, or 'training' (14 families) or 'all'")
            ->capture_default_str();
        cmd->add_option("--beta-lo", beta_lo, "Minimum nonzero |beta|")->capture_default_str();
        cmd->add_option("--beta-hi", beta_hi, "Maximum nonzero |beta|")->capture_default_str();
    }
};

// Selector knobs shared by build-train-set / evaluate / select.
struct SelectorOptions {
    int K = 20;
    int L = 0;
    int T_max = 10;
    std::string v_grid = "0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95";
    double alpha = 0.2;

    std::vector<double> parse_v_grid() const { return parse_double_list(v_grid, "--v-grid"); }

    trex::CalibrationGrid to_grid() const {
        trex::CalibrationGrid grid;
        grid.v_grid = parse_v_grid();
        grid.T_max = T_max;
        grid.alpha = alpha;
        grid.validate();
        return grid;
    }

    json to_json() const {
        return json{{"K", K}, {"L", L}, {"T_max", T_max}, {"v_grid", v_grid}, {"alpha", alpha}};
    }

    void add_flags(CLI::App* cmd, bool with_alpha) {
        cmd->add_option("--K", K, "Number of random experiments")->capture_default_str();
        cmd->add_option("--L", L, "Number of dummies (0 means L = p)")->capture_default_str();
        cmd->add_option("--T-max", T_max, "Maximum dummy termination count")->capture_default_str();
        cmd->add_option("--v-grid", v_grid, "Comma-separated voting thresholds in [0.5, 1)")
            ->capture_default_str();
        if (with_alpha)
            cmd->add_option("--alpha", alpha, "Target FDR level in (0, 1)")->capture_default_str();
    }
};

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void run_datagen(const CorpusOptions& corpus, std::uint64_t seed, const std::string& out,
                 bool dump_xy, int threads) {
    const trex::CorpusSpec spec = corpus.to_spec();
    std::cerr << "[datagen] generating " << corpus.count << " systems\n";
    const auto systems =
        trex::generate_corpus(trex::make_config_sampler(spec), corpus.count, seed, threads);
    const fs::path dir = prepare_out_dir(out);

    std::ostringstream manifest;
    trex::write_corpus_manifest(systems, manifest);
    write_file_atomic(dir / "manifest.jsonl", manifest.str());

    if (dump_xy) {
        for (std::size_t i = 0; i < systems.size(); ++i) {
            std::ostringstream xs, ys;
            trex::write_matrix_csv(systems[i].X, xs);
            trex::write_matrix_csv(systems[i].y, ys);
            const std::string stem = "system_" + std::to_string(i);
            write_file_atomic(dir / (stem + "_X.csv"), xs.str());
            write_file_atomic(dir / (stem + "_y.csv"), ys.str());
        }
    }
    json cfg = corpus.to_json();
    cfg["dump_xy"] = dump_xy;
    write_run_manifest(dir, "datagen", seed, cfg);
    std::cerr << "[datagen] wrote " << (dir / "manifest.jsonl").string() << "\n";
}

void run_build_train_set(const CorpusOptions& corpus, const SelectorOptions& sel,
                         std::uint64_t seed, const std::string& out, int threads) {
    trex::TrainingSetSpec spec;
    spec.corpus = corpus.to_spec();
    spec.count = corpus.count;
    spec.K = sel.K;
    spec.L = sel.L;
    spec.T_max = sel.T_max;
    spec.v_grid = sel.parse_v_grid();
    std::cerr << "[build-train-set] extracting labels from " << spec.count << " systems\n";
    const auto examples = trex::build_training_set(spec, seed, threads);
    const fs::path dir = prepare_out_dir(out);
    std::ostringstream body;
    trex::write_training_set(examples, body);
    write_file_atomic(dir / "train_set.txt", body.str());
    json cfg = corpus.to_json();
    cfg.update(sel.to_json());
    write_run_manifest(dir, "build-train-set", seed, cfg);
    std::cerr << "[build-train-set] wrote " << examples.size() << " examples\n";
}

void run_train(const std::string& train_set_path, int p_max, double t_max_norm, int epochs,
               double lr, int batch_size, double w, std::uint64_t seed, const std::string& out) {
    const auto examples = trex::read_training_set(train_set_path);
    int max_p = 0, max_T = 0;
    for (const auto& ex : examples) {
        max_p = std::max(max_p, ex.p);
        max_T = std::max(max_T, ex.T);
    }
    trex::FeaturizationMeta meta;
    meta.p_max = p_max > 0 ? p_max : max_p;
    meta.T_max_norm = t_max_norm > 0 ? t_max_norm : static_cast<double>(max_T);
    if (max_p > meta.p_max)
        throw trex::DataError("training set contains p = " + std::to_string(max_p) +
                              " wider than --p-max = " + std::to_string(meta.p_max));

    std::cerr << "[train] " << examples.size() << " examples, input dim " << meta.p_max + 3
              << ", " << epochs << " epochs\n";
    trex::LossSpec loss{w};
    auto [params, trace] = trex::train(examples, epochs, lr, batch_size, loss, seed, meta);

    const fs::path dir = prepare_out_dir(out);
    const fs::path model_tmp = dir / "model.bin.tmp";
    trex::save_model(params, model_tmp.string());
    fs::rename(model_tmp, dir / "model.bin");

    std::ostringstream trace_csv;
    trace_csv << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        trace_csv << (e + 1) << ',' << trex::format_double(trace[e]) << '\n';
    write_file_atomic(dir / "loss_trace.csv", trace_csv.str());

    write_run_manifest(dir, "train", seed,
                       json{{"train_set", train_set_path},
                            {"p_max", meta.p_max},
                            {"T_max_norm", meta.T_max_norm},
                            {"epochs", epochs},
                            {"lr", lr},
                            {"batch_size", batch_size},
                            {"w", w}});
    for (std::size_t e = 0; e < trace.size(); ++e)
        std::cerr << "[train] epoch " << (e + 1) << "/" << trace.size() << " mean loss "
                  << trace[e] << "\n";
    std::cerr << "[train] wrote " << (dir / "model.bin").string() << "\n";
}

void run_evaluate(const std::string& model_path, const CorpusOptions& corpus,
                  const SelectorOptions& sel, std::uint64_t seed, const std::string& out,
                  int threads) {
    const trex::MlpParams model = trex::load_model(model_path);
    const trex::CorpusSpec spec = corpus.to_spec();
    if (spec.p > model.meta.p_max)
        throw trex::DataError("evaluation corpus p = " + std::to_string(spec.p) +
                              " exceeds the model's p_max = " + std::to_string(model.meta.p_max));
    const trex::CalibrationGrid grid = sel.to_grid();

    std::cerr << "[evaluate] generating " << corpus.count << " held-out systems\n";
    const auto systems =
        trex::generate_corpus(trex::make_config_sampler(spec), corpus.count, seed, threads);

    std::vector<trex::MethodSpec> methods;
    methods.push_back({"analytical", trex::analytical_estimator()});
    methods.push_back({"learned", trex::learned_estimator(model)});

    std::cerr << "[evaluate] running " << methods.size() << " methods on " << systems.size()
              << " systems\n";
    const auto records = trex::evaluate_sweep(systems, methods, grid, sel.K, sel.L, seed, threads);
    const auto aggregate = trex::aggregate_records(records);
    const auto surface =
        trex::surface_report(systems, trex::learned_estimator(model), grid, sel.K, sel.L, seed, threads);

    const fs::path dir = prepare_out_dir(out);
    std::ostringstream results_csv, aggregate_csv, surface_csv;
    trex::write_results_csv(records, results_csv);
    trex::write_aggregate_csv(aggregate, aggregate_csv);
    trex::write_surface_csv(surface, surface_csv);
    write_file_atomic(dir / "results.csv", results_csv.str());
    write_file_atomic(dir / "aggregate.csv", aggregate_csv.str());
    write_file_atomic(dir / "surface.csv", surface_csv.str());

    json cfg = corpus.to_json();
    cfg.update(sel.to_json());
    cfg["model"] = model_path;
    write_run_manifest(dir, "evaluate", seed, cfg);
    for (const auto& row : aggregate)
        std::cerr << "[evaluate] " << row.method << " snr=" << row.snr << " fdr=" << row.fdr_mean
                  << " tpr=" << row.tpr_mean << " (n=" << row.n_systems << ")\n";
}

void run_select(const std::string& x_path, const std::string& y_path,
                const std::optional<std::string>& truth_path,
                const std::optional<std::string>& model_path, bool header,
                const SelectorOptions& sel, std::uint64_t seed, const std::string& out,
                bool dump_occurrence) {
    trex::IngestOptions ingest_options;
    ingest_options.header = header;
    std::optional<trex::MlpParams> model;
    if (model_path) {
        model = trex::load_model(*model_path);
        ingest_options.p_max = model->meta.p_max;
    }
    const trex::ExternalDataset dataset = trex::ingest_csv(x_path, y_path, ingest_options, truth_path);
    const trex::CalibrationGrid grid = sel.to_grid();

    trex::FdpEstimator estimator;
    std::string label;
    if (model) {
        estimator = trex::learned_estimator(*model);
        label = "learned";
    } else {
        estimator = trex::analytical_estimator();
        label = "analytical";
    }
    std::cerr << "[select] n=" << dataset.X.rows() << " p=" << dataset.X.cols() << " estimator="
              << label << "\n";
    const trex::ExternalReport report =
        trex::select_external(dataset, estimator, label, sel.K, sel.L, grid, seed);

    const fs::path dir = prepare_out_dir(out);
    json doc = trex::selection_report_json(report.selection, seed, grid.alpha, sel.K,
                                           report.table.L, report.metrics);
    doc["source_x"] = x_path;
    doc["source_y"] = y_path;
    doc["n"] = dataset.X.rows();
    doc["p"] = dataset.X.cols();
    write_file_atomic(dir / "report.json", doc.dump(2) + "\n");
    if (dump_occurrence) {
        std::ostringstream occ;
        trex::write_occurrence_csv(report.table, occ);
        write_file_atomic(dir / "occurrence.csv", occ.str());
    }
    json cfg = sel.to_json();
    cfg["x"] = x_path;
    cfg["y"] = y_path;
    cfg["model"] = model_path ? json(*model_path) : json(nullptr);
    cfg["header"] = header;
    write_run_manifest(dir, "select", seed, cfg);
    std::cerr << "[select] selected " << report.selection.selected.size() << " variables"
              << (report.selection.feasible ? "" : " (no feasible grid point)") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"T-Rex variable selection with analytical or learned FDP calibration"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key=value config file; command-line flags take precedence");
    app.set_version_flag("--version", std::string(trex::kVersion));

    int threads = 1;
    const auto add_threads_flag = [&threads](CLI::App* cmd) {
        cmd->add_option("--threads", threads, "Worker thread cap for per-system parallelism")
            ->capture_default_str();
    };

    // datagen
    auto* datagen = app.add_subcommand("datagen", "Generate a synthetic corpus and its manifest");
    CorpusOptions datagen_corpus;
    datagen_corpus.add_flags(datagen, 200);
    std::uint64_t datagen_seed = 0;
    std::string datagen_out;
    bool dump_xy = false;
    add_threads_flag(datagen);
    datagen->add_option("--seed", datagen_seed, "Master seed")->required();
    datagen->add_option("--out", datagen_out, "Output directory")->required();
    datagen->add_flag("--dump-xy", dump_xy, "Also write per-system X/y CSV files");
    datagen->callback([&] { run_datagen(datagen_corpus, datagen_seed, datagen_out, dump_xy, threads); });

    // build-train-set
    auto* bts = app.add_subcommand("build-train-set",
                                   "Extract labeled (phi, v, T, L) -> FDP training examples");
    CorpusOptions bts_corpus;
    bts_corpus.add_flags(bts, 2000);
    SelectorOptions bts_sel;
    bts_sel.add_flags(bts, false);
    std::uint64_t bts_seed = 0;
    std::string bts_out;
    add_threads_flag(bts);
    bts->add_option("--seed", bts_seed, "Master seed")->required();
    bts->add_option("--out", bts_out, "Output directory")->required();
    bts->callback([&] { run_build_train_set(bts_corpus, bts_sel, bts_seed, bts_out, threads); });

    // train
    auto* train = app.add_subcommand("train", "Train the FDP estimator network");
    std::string train_set_path;
    int p_max = 0;
    double t_max_norm = 0.0;
    int epochs = 10;
    double lr = 1e-3;
    int batch_size = 256;
    double loss_w = 1.1;
    std::uint64_t train_seed = 0;
    std::string train_out;
    train->add_option("--train-set", train_set_path, "Training-set file from build-train-set")
        ->required();
    train->add_option("--p-max", p_max, "Padded input dimension (default: widest p in the set)")
        ->capture_default_str();
    train->add_option("--t-max-norm", t_max_norm,
                      "Normalizer for the T feature (default: largest T in the set)")
        ->capture_default_str();
    train->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    train->add_option("--lr", lr, "Learning rate")->capture_default_str();
    train->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str();
    train->add_option("--w", loss_w, "Underestimation penalty weight (> 1)")->capture_default_str();
    add_threads_flag(train);
    train->add_option("--seed", train_seed, "Master seed")->required();
    train->add_option("--out", train_out, "Output directory")->required();
    train->callback([&] {
        run_train(train_set_path, p_max, t_max_norm, epochs, lr, batch_size, loss_w, train_seed,
                  train_out);
    });

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Compare analytical and learned calibration on a held-out corpus");
    CorpusOptions eval_corpus;
    eval_corpus.families = "GaussianMixture";
    eval_corpus.add_flags(evaluate, 200);
    SelectorOptions eval_sel;
    eval_sel.add_flags(evaluate, true);
    std::string eval_model;
    std::uint64_t eval_seed = 0;
    std::string eval_out;
    evaluate->add_option("--model", eval_model, "Model file from train")->required();
    add_threads_flag(evaluate);
    evaluate->add_option("--seed", eval_seed, "Master seed")->required();
    evaluate->add_option("--out", eval_out, "Output directory")->required();
    evaluate->callback(
        [&] { run_evaluate(eval_model, eval_corpus, eval_sel, eval_seed, eval_out, threads); });

    // select
    auto* select = app.add_subcommand("select", "Run selection on an external CSV dataset");
    std::string x_path, y_path;
    std::string truth_path, model_path;
    bool header = false;
    bool dump_occurrence = false;
    SelectorOptions select_sel;
    select_sel.add_flags(select, true);
    std::uint64_t select_seed = 0;
    std::string select_out;
    select->add_option("--x", x_path, "Design matrix CSV")->required();
    select->add_option("--y", y_path, "Response CSV (single column; binary responses allowed)")
        ->required();
    select->add_option("--truth", truth_path, "Optional 0-based true active indices");
    select->add_option("--model", model_path, "Model file; omit to use the analytical estimator");
    select->add_flag("--header", header, "CSV files carry a header row");
    select->add_flag("--dump-occurrence", dump_occurrence, "Also write the occurrence table CSV");
    add_threads_flag(select);
    select->add_option("--seed", select_seed, "Master seed")->required();
    select->add_option("--out", select_out, "Output directory")->required();
    select->callback([&] {
        run_select(x_path, y_path,
                   truth_path.empty() ? std::nullopt : std::optional<std::string>(truth_path),
                   model_path.empty() ? std::nullopt : std::optional<std::string>(model_path),
                   header, select_sel, select_seed, select_out, dump_occurrence);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const trex::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const trex::PathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const trex::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const trex::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
