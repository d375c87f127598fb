#pragma once

#include "vectorcd/ci_tester.hpp"
#include "vectorcd/dataset.hpp"
#include "vectorcd/discovery.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vcd {

enum class MapKind { weighted_average, pca };

std::string to_string(MapKind k);
MapKind parse_map_kind(const std::string& s);

struct TunableAggregationMap {
    MapKind kind = MapKind::weighted_average;
    Partition input;
    std::vector<int> m;
    // weighted_average: d_i x d_i, row r is the r-th weight vector.
    std::vector<Eigen::MatrixXd> weights;
    // pca: d_i x d_i, column r is the r-th loading (descending eigenvalue).
    std::vector<Eigen::MatrixXd> basis;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::VectorXd> eigenvalues;

    bool fitted() const;
    Partition output_partition() const;
    // The m_i x d_i linear operator of block i (centering aside).
    Eigen::MatrixXd block_operator(int i) const;
    // Block-diagonal operator over all columns.
    Eigen::MatrixXd linear_operator() const;
    bool is_maximal() const;
    void validate() const;
};

// Weighted-average stack: row 0 uniform, further rows shifted cosine profiles,
// all entries in (0,1) for d_i > 1, full row rank.
TunableAggregationMap weighted_average_map(const Partition& p, std::vector<int> m);
TunableAggregationMap fixed_weight_map(const Partition& p, std::vector<Eigen::MatrixXd> stacks,
                                       std::vector<int> m);
TunableAggregationMap pca_map(const Partition& p, std::vector<int> m);  // unfitted

TunableAggregationMap fit_pca(const Dataset& ds, std::vector<int> m);
TunableAggregationMap fit_pca_covariance(const Eigen::MatrixXd& cov, const Partition& p,
                                         std::vector<int> m);

Dataset apply_map(const TunableAggregationMap& map, const Dataset& ds);
// Population covariance of Z = g(X) for a linear map.
Eigen::MatrixXd map_covariance(const TunableAggregationMap& map, const Eigen::MatrixXd& cov_x);

struct Statement {
    int i = 0;
    int j = 0;
    std::vector<int> cond;
    double p_aggregate = 1.0;
    double p_vector = 1.0;
    bool consistent = true;
    std::string source;  // "log", "augmented", "fallback", "exhaustive"
};

struct ScorePart {
    double score = 1.0;
    std::vector<Statement> consistent;
    std::vector<Statement> inconsistent;

    int total() const { return static_cast<int>(consistent.size() + inconsistent.size()); }
};

struct ConsistencyReport {
    double c_ind = 1.0;
    double c_dep = 1.0;
    double ac = 1.0;
    std::string dep_strategy = "effective";
    ScorePart ind;
    ScorePart dep;
};

struct MarkovPiece {
    int v = 0;
    int r = 0;
    std::vector<int> cond;  // sorted
};

// Pairwise pieces of the local Markov statements of `dag`:
// v _|_ r_k | Pa(v) u {r_1..r_{k-1}} for the non-parent predecessors r_k of v,
// predecessors taken in topological order.
std::vector<MarkovPiece> local_markov_pieces(const MixedGraph& dag);

// `z_tester` is only needed when `augment` is set. Pieces whose pair is not a
// discovery candidate under `pc` (temporal knowledge) are skipped.
ScorePart c_ind_score(const CiTester& x_tester, const DiscoveryResult& agg,
                      const CiTester* z_tester, bool augment, const PcOptions& pc = {});
ScorePart c_ind_score(const Dataset& vec_data, const DiscoveryResult& agg_result,
                      const TunableAggregationMap& map, const CiConfig& cfg, bool augment);

ScorePart effective_c_dep_score(const CiTester& x_tester, const DiscoveryResult& agg);
ScorePart effective_c_dep_score(const Dataset& vec_data, const DiscoveryResult& agg_result,
                                const TunableAggregationMap& map, const CiConfig& cfg);

enum class DepStrategy { adjacency, connection };
enum class CondStrategy { tested, all };
enum class SortStrategy { min_p, none };

constexpr int kExhaustiveLimit = 8;

ScorePart meta_c_dep_score(const CiTester& x_tester, const CiTester& z_tester,
                           const DiscoveryResult& agg, DepStrategy dep, CondStrategy cond,
                           SortStrategy sort);
ScorePart meta_c_dep_score(const Dataset& vec_data, const DiscoveryResult& agg_result,
                           const TunableAggregationMap& map, const CiConfig& cfg,
                           DepStrategy dep, CondStrategy cond, SortStrategy sort);

double ac_score(double c_ind, double c_dep);

enum class ScoreKind { c_ind, c_dep_eff, ac };
std::string to_string(ScoreKind k);
ScoreKind parse_score_kind(const std::string& s);

using ZTesterFactory =
    std::function<std::unique_ptr<CiTester>(const Dataset& z, const TunableAggregationMap& map)>;
using DiscoveryEngine = std::function<DiscoveryResult(const CiTester&, const PcOptions&)>;

struct AdagOptions {
    MapKind map_kind = MapKind::pca;
    ScoreKind q = ScoreKind::c_ind;
    double alpha_q = 0.8;
    bool augment = false;
    // Use the complete (connection, all, none) dependence strategy instead of
    // the effective one wherever a dependence score is needed.
    bool complete_dep = false;
    PcOptions pc;
    int tau_max = 0;  // >0: data are time series, discovery runs on lag windows
    DiscoveryEngine algo;  // defaults to pc_stable
    // Population covariance of X. When set, PCA is fitted from it and the
    // aggregate dataset passed to the factory has no rows.
    std::optional<Eigen::MatrixXd> population_cov;
};

struct AdagTraceRow {
    int iteration = 0;
    std::vector<int> m;
    double score = 0.0;
    int edges = 0;
};

struct AdagResult {
    MixedGraph graph;
    ConsistencyReport report;
    std::vector<int> m;
    std::vector<AdagTraceRow> trace;
    DiscoveryResult aggregate;
    TunableAggregationMap map;
};

AdagResult adag(const Dataset& vec_data, const CiTester& x_tester, const ZTesterFactory& make_z,
                const AdagOptions& opt);
AdagResult adag(const Dataset& vec_data, const CiConfig& cfg, const AdagOptions& opt);
AdagResult adag(const Dataset& vec_data, const CiConfig& cfg, MapKind map_kind, ScoreKind q,
                double alpha_q);

// Full report for a fixed aggregate result (effective or complete c_dep).
ConsistencyReport consistency_report(const CiTester& x_tester, const CiTester& z_tester,
                                     const DiscoveryResult& agg, bool augment, bool complete_dep,
                                     const PcOptions& pc = {});

std::string trace_csv(const std::vector<AdagTraceRow>& trace);

}  // namespace vcd
