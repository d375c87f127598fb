#pragma once

#include "vectorcd/aggregation.hpp"
#include "vectorcd/citest.hpp"
#include "vectorcd/metrics.hpp"
#include "vectorcd/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vcd {

enum class MethodKind { vec, avg, pca, s2v, s2v2, adag };

struct MethodSpec {
    MethodKind kind = MethodKind::vec;
    // adag only
    ScoreKind q = ScoreKind::c_ind;
    double alpha_q = 0.8;
    MapKind map = MapKind::pca;

    std::string label() const;  // e.g. "vec", "adag-pca-cind-0.8"
};

MethodSpec parse_method(const std::string& s);

enum class GeneratorKind { vector_scm, savar };

struct ExperimentConfig {
    GeneratorKind generator = GeneratorKind::vector_scm;
    VectorScmSpec scm;
    SavarSpec savar;
    std::vector<MethodSpec> methods;
    CiConfig ci;
    int repetitions = 1;
    std::uint64_t seed_base = 0;
    bool contemporaneous = true;  // time series: allow lag-0 links
    bool scores = false;          // also record consistency scores of aggregate methods
    int threads = 0;              // repetitions in parallel; <= 0 means default
    std::string output;

    int tau_max() const;
    void validate() const;
};

struct RunRecord {
    int rep = 0;
    std::string method;
    std::string metric;
    double value = 0.0;
    double seconds = 0.0;

    bool operator==(const RunRecord&) const = default;
};

struct SummaryRow {
    std::string method;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    int count = 0;
};

struct MethodOutput {
    MixedGraph graph;
    double seconds = 0.0;
    bool has_scores = false;
    ConsistencyReport report;
    std::vector<int> m;
};

// Truth graph to score against: the CPDAG, with lagged links kept directed
// for window graphs.
MixedGraph evaluation_target(const MixedGraph& truth, int n_base, int tau_max);

MethodOutput run_method(const MethodSpec& method, const Dataset& data, const CiConfig& ci,
                        int tau_max, bool contemporaneous, bool scores);

// A failed repetition leaves one record (method "-", metric "failed");
// throws if more than 20% fail.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

void emit_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_records_csv(const std::string& path);
void emit_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace vcd
