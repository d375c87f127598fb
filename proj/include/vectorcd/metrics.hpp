#pragma once

#include "vectorcd/graph.hpp"

namespace vcd {

struct Metrics {
    double adj_precision = 1.0;
    double adj_recall = 1.0;
    double edgemark_precision = 1.0;
    double edgemark_recall = 1.0;
    int shd = 0;
};

// Adjacencies over unordered pairs. Edgemarks over the endpoints of shared
// adjacencies, classed as arrowhead or not: recall counts every truth endpoint
// (circles read as non-arrow), precision counts committal predicted marks
// (arrow, tail, conflict); a conflict never matches. Empty denominators give 1.
// SHD adds missing/extra adjacencies and shared edges whose marks differ.
Metrics evaluate_graph(const MixedGraph& pred, const MixedGraph& truth_cpdag);

}  // namespace vcd
