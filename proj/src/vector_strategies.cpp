#include "vectorcd/discovery.hpp"

#include "vectorcd/graph_algorithms.hpp"

#include <algorithm>
#include <stdexcept>

namespace vcd {

EdgeCounts count_edges(const MixedGraph& micro, const Partition& p, int i, int j) {
    EdgeCounts c;
    for (int a : p.columns(i)) {
        for (int b : p.columns(j)) {
            if (!micro.adjacent(a, b)) continue;
            if (micro.is_directed(a, b)) ++c.dir_ij;
            else if (micro.is_directed(b, a)) ++c.dir_ji;
            else if (micro.is_undirected(a, b) ||
                     (micro.mark_at(a, b) == Mark::tail && micro.mark_at(b, a) == Mark::tail))
                ++c.undir;
            else ++c.other;
        }
    }
    return c;
}

MixedGraph aggregate_edges(const MixedGraph& micro_cpdag, const Partition& p,
                           EdgeAggregation mode) {
    if (micro_cpdag.n_nodes() != p.n_micro()) {
        throw std::invalid_argument("aggregate_edges: graph does not match partition");
    }
    const int n = p.n_macro();
    MixedGraph out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            EdgeCounts c = count_edges(micro_cpdag, p, i, j);
            if (c.total() == 0) continue;
            const int d_ij = c.dir_ij, d_ji = c.dir_ji, u = c.undir;
            if (mode == EdgeAggregation::majority) {
                if (u > d_ij && u > d_ji) out.add_undirected(i, j);
                else if (d_ij > d_ji && d_ij >= u) out.add_directed(i, j);
                else if (d_ji > d_ij && d_ji >= u) out.add_directed(j, i);
                else out.add_conflict(i, j);
            } else {
                if (d_ij > 0 && d_ji > 0) out.add_conflict(i, j);
                else if (d_ij > 0) {
                    if (d_ij >= u) out.add_directed(i, j);
                    else out.add_undirected(i, j);
                } else if (d_ji > 0) {
                    if (d_ji >= u) out.add_directed(j, i);
                    else out.add_undirected(i, j);
                } else if (u > 0) out.add_undirected(i, j);
                else out.add_conflict(i, j);
            }
        }
    }
    return out;
}

ComponentwiseResult s2v(const CiTester& micro_tester, const Partition& p, EdgeAggregation mode,
                        const PcOptions& opt) {
    if (micro_tester.n_variables() != p.n_micro()) {
        throw std::invalid_argument("s2v: tester does not cover the micro columns");
    }
    ComponentwiseResult out;
    if (p.n_micro() == 1) {
        out.micro.graph = MixedGraph(1);
    } else {
        out.micro = pc_stable(micro_tester, opt);
    }
    out.graph = aggregate_edges(out.micro.graph, p, mode);
    return out;
}

MixedGraph s2v(const Dataset& ds, const CiConfig& cfg, EdgeAggregation mode) {
    DataCiTester tester(ds.micro_view(), cfg);
    return s2v(tester, ds.partition, mode).graph;
}

ComponentwiseResult s2v2(const CiTester& micro_tester, const Partition& p, const PcOptions& opt) {
    if (micro_tester.n_variables() != p.n_micro()) {
        throw std::invalid_argument("s2v2: tester does not cover the micro columns");
    }
    ComponentwiseResult out;
    Skeleton sk = p.n_micro() > 1 ? pc_skeleton(micro_tester, opt)
                                  : Skeleton{MixedGraph(1), {}, {}};
    MixedGraph macro = coarsen(sk.graph, p);
    const int n = p.n_macro();

    std::vector<std::array<int, 3>> colliders;
    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            if (macro.adjacent(i, k)) continue;
            for (int j = 0; j < n; ++j) {
                if (!macro.adjacent(i, j) || !macro.adjacent(k, j)) continue;
                const auto middle = p.columns(j);
                bool all_independent = true;
                for (int a : p.columns(i)) {
                    for (int b : p.columns(k)) {
                        auto it = sk.sepsets.find({std::min(a, b), std::max(a, b)});
                        if (it == sk.sepsets.end()) {
                            // pairs excluded by temporal knowledge were never tested
                            if (!opt.lag.empty()) {
                                all_independent = false;
                                break;
                            }
                            throw std::logic_error("s2v2: missing micro sepset");
                        }
                        std::vector<int> stripped;
                        for (int v : it->second) {
                            if (std::find(middle.begin(), middle.end(), v) == middle.end()) {
                                stripped.push_back(v);
                            }
                        }
                        if (stripped.size() == it->second.size()) continue;
                        TestRecord rec = micro_tester.test(a, b, stripped);
                        bool indep = rec.decided_independent;
                        sk.log.push_back(std::move(rec));
                        if (!indep) {
                            all_independent = false;
                            break;
                        }
                    }
                    if (!all_independent) break;
                }
                if (all_independent) colliders.push_back({i, j, k});
            }
        }
    }
    PcOptions macro_opt;
    macro_opt.collider_mode = opt.collider_mode;
    if (!opt.lag.empty()) {
        // all columns of a block share its lag
        for (int i = 0; i < n; ++i) macro_opt.lag.push_back(opt.lag.at(p.offset(i)));
        for (const auto& e : macro.edges()) {
            if (macro_opt.lag[e.i] > macro_opt.lag[e.j]) macro.add_directed(e.i, e.j);
            else if (macro_opt.lag[e.i] < macro_opt.lag[e.j]) macro.add_directed(e.j, e.i);
        }
    }
    orient_colliders(macro, colliders, opt.collider_mode, macro_opt);
    apply_meek_rules_in_place(macro);

    out.graph = std::move(macro);
    out.micro.graph = std::move(sk.graph);
    out.micro.sepsets = std::move(sk.sepsets);
    out.micro.log = std::move(sk.log);
    return out;
}

MixedGraph s2v2(const Dataset& ds, const CiConfig& cfg) {
    DataCiTester tester(ds.micro_view(), cfg);
    return s2v2(tester, ds.partition).graph;
}

}  // namespace vcd
