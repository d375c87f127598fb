#include "vectorcd/graph_algorithms.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>

namespace vcd {

namespace {

std::vector<bool> mask_of(int n, const NodeSet& s) {
    std::vector<bool> m(n, false);
    for (int v : s) {
        if (v < 0 || v >= n) throw std::out_of_range("node index out of range");
        m[v] = true;
    }
    return m;
}

bool is_arrow(Mark m) { return m == Mark::arrow; }

}  // namespace

std::vector<bool> ancestor_mask(const MixedGraph& g, const NodeSet& targets) {
    const int n = g.n_nodes();
    std::vector<bool> anc = mask_of(n, targets);
    std::vector<int> stack(targets.begin(), targets.end());
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < n; ++u) {
            if (!anc[u] && g.is_directed(u, v)) {
                anc[u] = true;
                stack.push_back(u);
            }
        }
    }
    return anc;
}

bool m_separated(const MixedGraph& g, const NodeSet& i_set, const NodeSet& j_set,
                 const NodeSet& s) {
    const int n = g.n_nodes();
    auto in_i = mask_of(n, i_set);
    auto in_j = mask_of(n, j_set);
    auto in_s = mask_of(n, s);
    for (int v = 0; v < n; ++v) {
        if ((in_i[v] && in_j[v]) || (in_i[v] && in_s[v]) || (in_j[v] && in_s[v])) {
            throw std::invalid_argument("m_separated: node sets overlap");
        }
    }
    auto anc = ancestor_mask(g, s);

    // State: (node, arrived with an arrowhead at node).
    std::vector<char> seen(2 * static_cast<std::size_t>(n), 0);
    std::deque<std::pair<int, bool>> queue;
    for (int x : i_set) {
        for (int w : g.neighbors(x)) {
            bool head = is_arrow(g.mark_at(x, w));
            if (in_j[w]) return false;
            if (!seen[2 * w + head]) {
                seen[2 * w + head] = 1;
                queue.emplace_back(w, head);
            }
        }
    }
    while (!queue.empty()) {
        auto [v, in_head] = queue.front();
        queue.pop_front();
        if (in_i[v]) continue;
        for (int w : g.neighbors(v)) {
            bool out_head = is_arrow(g.mark_at(w, v));
            bool collider = in_head && out_head;
            bool pass = collider ? anc[v] : !in_s[v];
            if (!pass) continue;
            bool head = is_arrow(g.mark_at(v, w));
            if (in_j[w]) return false;
            if (!seen[2 * w + head]) {
                seen[2 * w + head] = 1;
                queue.emplace_back(w, head);
            }
        }
    }
    return true;
}

MixedGraph coarsen(const MixedGraph& g, const Partition& p) {
    if (g.n_nodes() != p.n_micro()) {
        throw std::invalid_argument("coarsen: graph size does not match partition");
    }
    const int m = p.n_macro();
    // 0 none, 1 all a->b, 2 all b->a, 3 mixed
    std::vector<int> state(static_cast<std::size_t>(m) * m, 0);
    for (const auto& e : g.edges()) {
        int a = p.macro_of(e.i), b = p.macro_of(e.j);
        if (a == b) continue;
        int kind = 3;
        if (e.mark_i == Mark::tail && e.mark_j == Mark::arrow) kind = 1;
        if (e.mark_i == Mark::arrow && e.mark_j == Mark::tail) kind = 2;
        if (a > b) {
            std::swap(a, b);
            if (kind == 1 || kind == 2) kind = 3 - kind;
        }
        int& st = state[static_cast<std::size_t>(a) * m + b];
        st = (st == 0 || st == kind) ? kind : 3;
    }
    MixedGraph out(m);
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            int st = state[static_cast<std::size_t>(a) * m + b];
            if (st == 1) out.add_directed(a, b);
            else if (st == 2) out.add_directed(b, a);
            else if (st == 3) out.add_undirected(a, b);
        }
    }
    return out;
}

bool apply_meek_rules_in_place(MixedGraph& g) {
    const int n = g.n_nodes();
    bool any = false;
    while (true) {
        std::vector<std::pair<int, int>> proposals;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (a == b || !g.is_undirected(a, b)) continue;
                bool fire = false;
                // R1: c -> a - b, c and b nonadjacent
                for (int c = 0; c < n && !fire; ++c) {
                    fire = c != b && g.is_directed(c, a) && !g.adjacent(c, b);
                }
                // R2: a -> c -> b
                for (int c = 0; c < n && !fire; ++c) {
                    fire = g.is_directed(a, c) && g.is_directed(c, b);
                }
                // R3: a - c -> b, a - d -> b, c and d nonadjacent
                for (int c = 0; c < n && !fire; ++c) {
                    if (!g.is_undirected(a, c) || !g.is_directed(c, b)) continue;
                    for (int d = c + 1; d < n && !fire; ++d) {
                        fire = g.is_undirected(a, d) && g.is_directed(d, b) && !g.adjacent(c, d);
                    }
                }
                // R4: a - c -> d -> b, a adj d, c and b nonadjacent
                for (int c = 0; c < n && !fire; ++c) {
                    if (c == b || !g.is_undirected(a, c) || g.adjacent(c, b)) continue;
                    for (int d = 0; d < n && !fire; ++d) {
                        fire = g.is_directed(c, d) && g.is_directed(d, b) && g.adjacent(a, d);
                    }
                }
                if (fire) proposals.emplace_back(a, b);
            }
        }
        if (proposals.empty()) break;
        any = true;
        std::sort(proposals.begin(), proposals.end());
        for (auto [a, b] : proposals) {
            bool both = std::binary_search(proposals.begin(), proposals.end(), std::pair{b, a});
            if (both) {
                g.add_conflict(a, b);
            } else {
                g.add_directed(a, b);
            }
        }
    }
    return any;
}

MixedGraph apply_meek_rules(const MixedGraph& g) {
    MixedGraph out = g;
    apply_meek_rules_in_place(out);
    return out;
}

MixedGraph cpdag_of(const MixedGraph& dag) {
    if (!dag.is_dag()) throw std::invalid_argument("cpdag_of: input is not a DAG");
    const int n = dag.n_nodes();
    MixedGraph out = dag.skeleton();
    for (int c = 0; c < n; ++c) {
        auto pa = dag.parents(c);
        for (std::size_t x = 0; x < pa.size(); ++x) {
            for (std::size_t y = x + 1; y < pa.size(); ++y) {
                if (!dag.adjacent(pa[x], pa[y])) {
                    out.add_directed(pa[x], c);
                    out.add_directed(pa[y], c);
                }
            }
        }
    }
    apply_meek_rules_in_place(out);
    return out;
}

std::vector<std::vector<int>> strongly_connected_components(const MixedGraph& g) {
    const int n = g.n_nodes();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> out;
    int counter = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w = 0; w < n; ++w) {
            if (!g.is_directed(v, w)) continue;
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<int> c;
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                c.push_back(w);
            } while (w != v);
            std::sort(c.begin(), c.end());
            out.push_back(std::move(c));
        }
    };
    for (int v = 0; v < n; ++v) {
        if (index[v] < 0) visit(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

MixedGraph acyclify(const MixedGraph& g) {
    const int n = g.n_nodes();
    auto comps = strongly_connected_components(g);
    std::vector<int> comp_of(n, -1);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
    }
    MixedGraph out(n);
    // Non-directed edges carry over (bidirected confounding, etc.).
    for (const auto& e : g.edges()) {
        bool directed = (e.mark_i == Mark::tail && e.mark_j == Mark::arrow) ||
                        (e.mark_i == Mark::arrow && e.mark_j == Mark::tail);
        if (!directed) out.add_edge(e.i, e.j, e.mark_i, e.mark_j);
    }
    for (const auto& c : comps) {
        for (std::size_t a = 0; a < c.size(); ++a) {
            for (std::size_t b = a + 1; b < c.size(); ++b) out.add_bidirected(c[a], c[b]);
        }
    }
    // Directed edges win over a pre-existing bidirected edge on the same pair.
    for (int v = 0; v < n; ++v) {
        for (int w2 = 0; w2 < n; ++w2) {
            if (!g.is_directed(v, w2) || comp_of[v] == comp_of[w2]) continue;
            for (int w : comps[comp_of[w2]]) out.add_directed(v, w);
        }
    }
    return out;
}

MixedGraph acyclify(int n_nodes, const std::vector<std::pair<int, int>>& arcs) {
    const auto n = static_cast<std::size_t>(n_nodes);
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t v = 0; v < n; ++v) reach[v][v] = true;
    for (const auto& [a, b] : arcs) {
        if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes) throw std::out_of_range("arc out of range");
        if (a == b) throw std::invalid_argument("acyclify: self loop");
        reach[a][b] = true;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[k][j]) reach[i][j] = true;
            }
        }
    }
    auto same = [&](std::size_t a, std::size_t b) { return reach[a][b] && reach[b][a]; };
    MixedGraph out(n_nodes);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (same(a, b)) out.add_bidirected(static_cast<int>(a), static_cast<int>(b));
        }
    }
    for (const auto& [v, w2] : arcs) {
        if (same(v, w2)) continue;
        for (std::size_t w = 0; w < n; ++w) {
            if (same(w, w2)) out.add_directed(v, static_cast<int>(w));
        }
    }
    return out;
}

bool inducing_path_exists(const MixedGraph& g, int x, int y, const NodeSet& latents) {
    const int n = g.n_nodes();
    if (x == y) throw std::invalid_argument("inducing_path_exists: x == y");
    if (x < 0 || y < 0 || x >= n || y >= n) throw std::out_of_range("node out of range");
    auto latent = mask_of(n, latents);
    auto anc = ancestor_mask(g, {x, y});
    std::vector<bool> on_path(n, false);
    on_path[x] = true;

    // Depth-first over simple paths; `prev -> cur` is the last edge.
    std::function<bool(int, int)> extend = [&](int prev, int cur) -> bool {
        for (int nxt : g.neighbors(cur)) {
            if (on_path[nxt]) continue;
            if (prev >= 0) {
                bool collider = is_arrow(g.mark_at(prev, cur)) && is_arrow(g.mark_at(nxt, cur));
                bool ok = collider ? anc[cur] : latent[cur];
                if (!ok) continue;
            }
            if (nxt == y) return true;
            on_path[nxt] = true;
            bool found = extend(cur, nxt);
            on_path[nxt] = false;
            if (found) return true;
        }
        return false;
    };
    return extend(-1, x);
}

NodeSet possible_dsep_set(const MixedGraph& g, int x, int z) {
    const int n = g.n_nodes();
    std::vector<bool> in_set(n, false), on_path(n, false);
    on_path[x] = true;
    std::function<void(int, int)> extend = [&](int prev, int cur) {
        in_set[cur] = true;
        for (int nxt : g.neighbors(cur)) {
            if (on_path[nxt]) continue;
            Mark m_in = g.mark_at(prev, cur);
            Mark m_out = g.mark_at(nxt, cur);
            bool collider = is_arrow(m_in) && is_arrow(m_out);
            bool definite_noncollider = m_in == Mark::tail || m_out == Mark::tail;
            bool triangle = g.adjacent(prev, nxt);
            if (!(collider || (!definite_noncollider && triangle))) continue;
            on_path[nxt] = true;
            extend(cur, nxt);
            on_path[nxt] = false;
        }
    };
    for (int w : g.neighbors(x)) {
        on_path[w] = true;
        extend(x, w);
        on_path[w] = false;
    }
    NodeSet out;
    for (int v = 0; v < n; ++v) {
        if (in_set[v] && v != x && v != z) out.push_back(v);
    }
    return out;
}

std::vector<int> topological_order(const MixedGraph& g) {
    const int n = g.n_nodes();
    std::vector<int> indeg(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) indeg[j] += g.is_directed(i, j) ? 1 : 0;
    }
    std::vector<int> order;
    std::vector<bool> done(n, false);
    while (static_cast<int>(order.size()) < n) {
        int pick = -1;
        for (int v = 0; v < n; ++v) {
            if (!done[v] && indeg[v] == 0) {
                pick = v;
                break;
            }
        }
        if (pick < 0) throw std::invalid_argument("topological_order: directed cycle");
        done[pick] = true;
        order.push_back(pick);
        for (int w = 0; w < n; ++w) indeg[w] -= g.is_directed(pick, w) ? 1 : 0;
    }
    return order;
}

MixedGraph dag_extension(const MixedGraph& cpdag) {
    const int n = cpdag.n_nodes();
    std::vector<bool> removed(n, false);
    std::vector<int> elimination;  // sinks first
    auto directed_out = [&](int v) {
        for (int w = 0; w < n; ++w) {
            if (!removed[w] && cpdag.is_directed(v, w)) return true;
        }
        return false;
    };
    auto loose = [&](int v, int w) {  // treated as undirected
        return cpdag.adjacent(v, w) && !cpdag.is_directed(v, w) && !cpdag.is_directed(w, v);
    };
    for (int step = 0; step < n; ++step) {
        int pick = -1;
        for (int v = 0; v < n && pick < 0; ++v) {
            if (removed[v] || directed_out(v)) continue;
            std::vector<int> adj;
            for (int w = 0; w < n; ++w) {
                if (!removed[w] && cpdag.adjacent(v, w)) adj.push_back(w);
            }
            bool ok = true;
            for (int u : adj) {
                if (!loose(v, u)) continue;
                for (int w : adj) {
                    if (w != u && !cpdag.adjacent(u, w)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) pick = v;
        }
        // Imperfect input: relax the clique condition, then the sink condition.
        for (int v = 0; v < n && pick < 0; ++v) {
            if (!removed[v] && !directed_out(v)) pick = v;
        }
        for (int v = 0; v < n && pick < 0; ++v) {
            if (!removed[v]) pick = v;
        }
        removed[pick] = true;
        elimination.push_back(pick);
    }
    std::vector<int> rank(n);
    for (int k = 0; k < n; ++k) rank[elimination[k]] = k;
    MixedGraph dag(n);
    for (const auto& e : cpdag.edges()) {
        if (rank[e.i] > rank[e.j]) dag.add_directed(e.i, e.j);
        else dag.add_directed(e.j, e.i);
    }
    return dag;
}

}  // namespace vcd
