#pragma once

#include "vectorcd/graph.hpp"
#include "vectorcd/partition.hpp"

#include <utility>
#include <vector>

namespace vcd {

using NodeSet = std::vector<int>;

// Ancestors of `targets` along directed edges, the targets included.
std::vector<bool> ancestor_mask(const MixedGraph& g, const NodeSet& targets);

bool m_separated(const MixedGraph& g, const NodeSet& i_set, const NodeSet& j_set,
                 const NodeSet& s);

MixedGraph coarsen(const MixedGraph& g, const Partition& p);

MixedGraph cpdag_of(const MixedGraph& dag);

// Meek R1-R4 to a fixed point. Proposals are collected per sweep and applied
// together; an edge proposed in both directions in one sweep becomes a conflict.
MixedGraph apply_meek_rules(const MixedGraph& g);
bool apply_meek_rules_in_place(MixedGraph& g);

MixedGraph acyclify(const MixedGraph& g);
// Same for an arbitrary digraph given as arcs (from, to); 2-cycles allowed.
MixedGraph acyclify(int n_nodes, const std::vector<std::pair<int, int>>& arcs);
std::vector<std::vector<int>> strongly_connected_components(const MixedGraph& g);

bool inducing_path_exists(const MixedGraph& g, int x, int y, const NodeSet& latents);

NodeSet possible_dsep_set(const MixedGraph& g, int x, int z);

// Smallest-index-first topological order of the directed part; throws on cycles.
std::vector<int> topological_order(const MixedGraph& g);

// One DAG in the class of a (possibly imperfect) CPDAG. Conflict edges are
// treated as undirected. Sinks are peeled off by smallest index.
MixedGraph dag_extension(const MixedGraph& cpdag);

}  // namespace vcd
