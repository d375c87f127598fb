#pragma once

#include "vectorcd/ci_tester.hpp"
#include "vectorcd/citest.hpp"
#include "vectorcd/dataset.hpp"
#include "vectorcd/graph.hpp"

#include <array>
#include <map>
#include <utility>
#include <vector>

namespace vcd {

enum class ColliderMode { standard, conflict };
enum class EdgeAggregation { majority, conservative };

using Sepsets = std::map<std::pair<int, int>, std::vector<int>>;  // key (i, j) with i < j

struct DiscoveryResult {
    MixedGraph graph;
    Sepsets sepsets;
    std::vector<TestRecord> log;

    const std::vector<int>* sepset(int i, int j) const;
};

struct PcOptions {
    ColliderMode collider_mode = ColliderMode::conflict;
    int max_depth = -1;  // unlimited
    int threads = 1;     // workers for the tests of one depth
    // Temporal background knowledge: lag[v] > 0 marks a past copy of a
    // variable. Empty means none. Only pairs touching lag 0 are candidates;
    // lagged edges are oriented forward in time.
    std::vector<int> lag;
    bool contemporaneous = true;
};

struct Skeleton {
    MixedGraph graph;  // circle-circle edges
    Sepsets sepsets;
    std::vector<TestRecord> log;
};

Skeleton pc_skeleton(const CiTester& tester, const PcOptions& opt = {});
DiscoveryResult pc_stable(const CiTester& tester, const PcOptions& opt = {});
DiscoveryResult pc_stable(const Dataset& ds, const CiConfig& cfg,
                          ColliderMode mode = ColliderMode::conflict);
DiscoveryResult vectorized_pc(const Dataset& ds, const CiConfig& cfg);

// Triples (a, c, b) propose a -> c <- b. Conflict mode turns an edge with
// arrowheads proposed at both ends into a conflict; standard mode lets the
// last proposal win. Edges fixed by temporal knowledge are left alone.
void orient_colliders(MixedGraph& g, const std::vector<std::array<int, 3>>& triples,
                      ColliderMode mode, const PcOptions& opt);

// Colliders from sepsets, temporal orientation, then Meek closure.
MixedGraph orient_skeleton(const MixedGraph& skeleton, const Sepsets& sepsets,
                           const PcOptions& opt);

struct EdgeCounts {
    int dir_ij = 0;
    int dir_ji = 0;
    int undir = 0;
    int other = 0;  // bidirected or conflicting micro edges

    int total() const { return dir_ij + dir_ji + undir + other; }
};

EdgeCounts count_edges(const MixedGraph& micro, const Partition& p, int i, int j);
MixedGraph aggregate_edges(const MixedGraph& micro_cpdag, const Partition& p,
                           EdgeAggregation mode);

struct ComponentwiseResult {
    MixedGraph graph;        // macro
    DiscoveryResult micro;   // micro-level run (log includes any re-tests)
};

ComponentwiseResult s2v(const CiTester& micro_tester, const Partition& p, EdgeAggregation mode,
                        const PcOptions& opt = {});
MixedGraph s2v(const Dataset& ds, const CiConfig& cfg,
               EdgeAggregation mode = EdgeAggregation::majority);

ComponentwiseResult s2v2(const CiTester& micro_tester, const Partition& p,
                         const PcOptions& opt = {});
MixedGraph s2v2(const Dataset& ds, const CiConfig& cfg);

struct LaggedDataset {
    Dataset data;
    std::vector<int> lag;   // per expanded variable
    std::vector<int> base;  // original macro index
    int tau_max = 0;

    PcOptions pc_options(bool contemporaneous = true) const;
};

// Expanded variable (i, tau) has index tau * N + i; row r holds time r + tau_max.
LaggedDataset lag_expand(const Dataset& ds, int tau_max);

}  // namespace vcd
