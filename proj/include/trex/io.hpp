#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trex/csv.hpp"
#include "trex/mlp.hpp"
#include "trex/occurrence.hpp"
#include "trex/selector.hpp"
#include "trex/synth.hpp"

namespace trex {

/// Occurrence-table dump: one row per (T, j) cell.
inline void write_occurrence_csv(const OccurrenceTable& table, std::ostream& out) {
    out << "T,j,phi,phi_deflated\n";
    for (int T = 1; T <= table.T_max; ++T) {
        for (int j = 0; j < table.p; ++j) {
            out << T << ',' << j << ',' << format_double(table.phi_at(T, j)) << ','
                << format_double(table.phi_deflated_at(T, j)) << '\n';
        }
    }
}

/// Selection report as a structured JSON document. Indices are 0-based.
inline nlohmann::json selection_report_json(const SelectionResult& sel, std::uint64_t seed,
                                            double alpha, int K, int L,
                                            const std::optional<Metrics>& metrics = std::nullopt) {
    nlohmann::json doc;
    doc["selected"] = sel.selected;
    doc["n_selected"] = sel.selected.size();
    doc["v_star"] = sel.v_star;
    doc["T_star"] = sel.T_star;
    doc["fdp_estimate"] = sel.fdp_estimate;
    doc["feasible"] = sel.feasible;
    doc["estimator"] = sel.estimator;
    doc["seed"] = seed;
    doc["alpha"] = alpha;
    doc["K"] = K;
    doc["L"] = L;
    if (metrics) {
        doc["metrics"] = {{"fdp", metrics->fdp}, {"tpp", metrics->tpp}};
    }
    return doc;
}

/// One corpus manifest record, enough to regenerate the system exactly.
struct ManifestRecord {
    long index = 0;
    SystemConfig config;
    std::uint64_t seed = 0;
};

inline void write_corpus_manifest(const std::vector<SyntheticSystem>& systems, std::ostream& out) {
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const auto& sys = systems[i];
        nlohmann::json rec;
        rec["index"] = i;
        rec["family"] = family_name(sys.config.distribution.family);
        rec["params"] = sys.config.distribution.params;
        rec["label"] = sys.config.distribution.label;
        rec["n"] = sys.config.n;
        rec["p"] = sys.config.p;
        rec["s"] = sys.config.s;
        rec["snr"] = sys.config.snr;
        rec["beta_lo"] = sys.config.beta_lo;
        rec["beta_hi"] = sys.config.beta_hi;
        rec["seed"] = sys.seed;
        out << rec.dump() << '\n';
    }
}

inline std::vector<ManifestRecord> read_corpus_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    std::vector<ManifestRecord> records;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": invalid manifest record at line " + std::to_string(line_no) +
                            ": " + e.what());
        }
        ManifestRecord out;
        try {
            out.index = rec.at("index").get<long>();
            out.config.distribution.family = family_from_name(rec.at("family").get<std::string>());
            out.config.distribution.params = rec.at("params").get<std::vector<double>>();
            out.config.distribution.label = rec.value("label", family_name(out.config.distribution.family));
            out.config.n = rec.at("n").get<int>();
            out.config.p = rec.at("p").get<int>();
            out.config.s = rec.at("s").get<int>();
            out.config.snr = rec.at("snr").get<double>();
            out.config.beta_lo = rec.value("beta_lo", 1.0);
            out.config.beta_hi = rec.value("beta_hi", 3.0);
            out.seed = rec.at("seed").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": incomplete manifest record at line " + std::to_string(line_no) +
                            ": " + e.what());
        }
        records.push_back(std::move(out));
    }
    if (records.empty()) throw DataError(path + ": empty manifest");
    return records;
}

/// Training-set file: one example per line, "label v T L p phi_1 .. phi_p".
inline void write_training_set(const std::vector<TrainingExample>& examples, std::ostream& out) {
    for (const auto& ex : examples) {
        out << format_double(ex.label) << ' ' << format_double(ex.v) << ' ' << ex.T << ' ' << ex.L
            << ' ' << ex.p;
        for (double phi : ex.phi) out << ' ' << format_double(phi);
        out << '\n';
    }
}

inline std::vector<TrainingExample> read_training_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open training set: " + path);
    std::vector<TrainingExample> examples;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        TrainingExample ex;
        double t = 0, l = 0, p = 0;
        if (!(ss >> ex.label >> ex.v >> t >> l >> p))
            throw DataError(path + ": malformed example at line " + std::to_string(line_no));
        ex.T = static_cast<int>(t);
        ex.L = static_cast<int>(l);
        ex.p = static_cast<int>(p);
        if (ex.p < 1 || ex.T < 1 || ex.L < 1 || ex.label < 0.0 || ex.label > 1.0)
            throw DataError(path + ": invalid example fields at line " + std::to_string(line_no));
        ex.phi.resize(static_cast<std::size_t>(ex.p));
        for (int j = 0; j < ex.p; ++j) {
            if (!(ss >> ex.phi[static_cast<std::size_t>(j)]))
                throw DataError(path + ": line " + std::to_string(line_no) + " expects " +
                                std::to_string(ex.p) + " occurrence values");
        }
        double extra;
        if (ss >> extra)
            throw DataError(path + ": line " + std::to_string(line_no) + " has trailing values");
        ex.system_index = line_no - 1;
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) throw DataError(path + ": no examples");
    return examples;
}

}  // namespace trex
