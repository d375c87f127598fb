#include "vectorcd/metrics.hpp"

#include <stdexcept>
#include <utility>

namespace vcd {

namespace {

double ratio(int num, int den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / den;
}

}  // namespace

Metrics evaluate_graph(const MixedGraph& pred, const MixedGraph& truth) {
    if (pred.n_nodes() != truth.n_nodes()) {
        throw std::invalid_argument("evaluate_graph: node counts differ");
    }
    const int n = pred.n_nodes();
    int n_pred = 0, n_truth = 0, shared = 0, shd = 0;
    int mark_total = 0, mark_hit = 0, committal = 0, committal_hit = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool p = pred.adjacent(i, j), t = truth.adjacent(i, j);
            n_pred += p;
            n_truth += t;
            if (p != t) ++shd;
            if (!p || !t) continue;
            ++shared;
            bool differs = false;
            for (auto [from, to] : {std::pair{i, j}, std::pair{j, i}}) {
                const Mark tm = truth.mark_at(from, to), pm = pred.mark_at(from, to);
                const bool t_arrow = tm == Mark::arrow;
                const bool match = pm != Mark::conflict && (pm == Mark::arrow) == t_arrow;
                ++mark_total;
                mark_hit += match;
                if (pm == Mark::arrow || pm == Mark::tail || pm == Mark::conflict) {
                    ++committal;
                    committal_hit += match;
                }
                if (pm != tm) differs = true;
            }
            if (differs) ++shd;
        }
    }
    Metrics m;
    m.adj_precision = ratio(shared, n_pred);
    m.adj_recall = ratio(shared, n_truth);
    m.edgemark_precision = ratio(committal_hit, committal);
    m.edgemark_recall = ratio(mark_hit, mark_total);
    m.shd = shd;
    return m;
}

}  // namespace vcd
