#include "vectorcd/discovery.hpp"

#include "vectorcd/graph_algorithms.hpp"
#include "vectorcd/parallel.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace vcd {

namespace {

void combinations(const std::vector<int>& pool, int k, std::vector<int>& cur, std::size_t start,
                  std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t x = start; x < pool.size(); ++x) {
        cur.push_back(pool[x]);
        combinations(pool, k, cur, x + 1, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> subsets_of_size(const std::vector<int>& pool, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    if (k <= static_cast<int>(pool.size())) combinations(pool, k, cur, 0, out);
    return out;
}

std::vector<int> without(const std::vector<int>& v, int x) {
    std::vector<int> out;
    for (int e : v) {
        if (e != x) out.push_back(e);
    }
    return out;
}

std::string describe(int i, int j, const std::vector<int>& cond) {
    std::string s = "(" + std::to_string(i) + "," + std::to_string(j) + " | {";
    for (std::size_t k = 0; k < cond.size(); ++k) s += (k ? "," : "") + std::to_string(cond[k]);
    return s + "})";
}

bool time_fixed(const PcOptions& opt, int u, int v) {
    return !opt.lag.empty() && opt.lag[u] != opt.lag[v];
}

}  // namespace

const std::vector<int>* DiscoveryResult::sepset(int i, int j) const {
    auto it = sepsets.find({std::min(i, j), std::max(i, j)});
    return it == sepsets.end() ? nullptr : &it->second;
}

Skeleton pc_skeleton(const CiTester& tester, const PcOptions& opt) {
    const int n = tester.n_variables();
    if (!opt.lag.empty() && static_cast<int>(opt.lag.size()) != n) {
        throw std::invalid_argument("pc: lag vector does not match variable count");
    }
    auto candidate = [&](int u, int v) {
        if (opt.lag.empty()) return true;
        bool u0 = opt.lag[u] == 0, v0 = opt.lag[v] == 0;
        if (!u0 && !v0) return false;
        if (u0 && v0) return opt.contemporaneous;
        return true;
    };

    Skeleton sk;
    sk.graph = MixedGraph(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (candidate(i, j)) sk.graph.add_undirected(i, j);
        }
    }

    for (int depth = 0; opt.max_depth < 0 || depth <= opt.max_depth; ++depth) {
        std::vector<std::vector<int>> adj(n);
        for (int v = 0; v < n; ++v) adj[v] = sk.graph.neighbors(v);

        struct Task {
            int i, j;
            std::vector<std::vector<int>> subsets;
            std::vector<TestRecord> records;
        };
        std::vector<Task> tasks;
        for (const auto& e : sk.graph.edges()) {
            std::set<std::vector<int>> subsets;
            for (const auto& s : subsets_of_size(without(adj[e.i], e.j), depth)) subsets.insert(s);
            for (const auto& s : subsets_of_size(without(adj[e.j], e.i), depth)) subsets.insert(s);
            if (subsets.empty()) continue;
            tasks.push_back({e.i, e.j, {subsets.begin(), subsets.end()}, {}});
        }
        if (tasks.empty()) break;

        parallel_for(tasks.size(), opt.threads, [&](std::size_t t) {
            auto& task = tasks[t];
            for (const auto& s : task.subsets) {
                try {
                    task.records.push_back(tester.test(task.i, task.j, s));
                } catch (const std::exception& ex) {
                    throw std::runtime_error("CI test " + describe(task.i, task.j, s) +
                                             " failed: " + ex.what());
                }
            }
        });

        for (auto& task : tasks) {
            const TestRecord* best = nullptr;
            for (const auto& rec : task.records) {
                if (!rec.decided_independent) continue;
                if (!best || rec.p_value > best->p_value) best = &rec;
            }
            if (best) {
                sk.sepsets[{task.i, task.j}] = best->cond;
            }
            for (auto& rec : task.records) sk.log.push_back(std::move(rec));
        }
        for (const auto& task : tasks) {
            if (sk.sepsets.count({task.i, task.j})) sk.graph.remove_edge(task.i, task.j);
        }
    }
    return sk;
}

void orient_colliders(MixedGraph& g, const std::vector<std::array<int, 3>>& triples,
                      ColliderMode mode, const PcOptions& opt) {
    if (mode == ColliderMode::standard) {
        for (const auto& [a, c, b] : triples) {
            if (!time_fixed(opt, a, c)) g.add_directed(a, c);
            if (!time_fixed(opt, b, c)) g.add_directed(b, c);
        }
        return;
    }
    const int n = g.n_nodes();
    std::vector<char> head(static_cast<std::size_t>(n) * n, 0);  // head[u*n+v]: arrow at v
    for (const auto& [a, c, b] : triples) {
        if (!time_fixed(opt, a, c)) head[static_cast<std::size_t>(a) * n + c] = 1;
        if (!time_fixed(opt, b, c)) head[static_cast<std::size_t>(b) * n + c] = 1;
    }
    for (const auto& e : g.edges()) {
        bool at_j = head[static_cast<std::size_t>(e.i) * n + e.j];
        bool at_i = head[static_cast<std::size_t>(e.j) * n + e.i];
        if (at_i && at_j) g.add_conflict(e.i, e.j);
        else if (at_j) g.add_directed(e.i, e.j);
        else if (at_i) g.add_directed(e.j, e.i);
    }
}

MixedGraph orient_skeleton(const MixedGraph& skeleton, const Sepsets& sepsets,
                           const PcOptions& opt) {
    MixedGraph g = skeleton;
    const int n = g.n_nodes();
    if (!opt.lag.empty()) {
        for (const auto& e : skeleton.edges()) {
            if (opt.lag[e.i] > opt.lag[e.j]) g.add_directed(e.i, e.j);
            else if (opt.lag[e.i] < opt.lag[e.j]) g.add_directed(e.j, e.i);
        }
    }
    std::vector<std::array<int, 3>> triples;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (skeleton.adjacent(a, b)) continue;
            auto it = sepsets.find({a, b});
            if (it == sepsets.end()) continue;
            const auto& s = it->second;
            for (int c = 0; c < n; ++c) {
                if (!skeleton.adjacent(a, c) || !skeleton.adjacent(b, c)) continue;
                if (std::find(s.begin(), s.end(), c) == s.end()) triples.push_back({a, c, b});
            }
        }
    }
    orient_colliders(g, triples, opt.collider_mode, opt);
    apply_meek_rules_in_place(g);
    return g;
}

DiscoveryResult pc_stable(const CiTester& tester, const PcOptions& opt) {
    Skeleton sk = pc_skeleton(tester, opt);
    DiscoveryResult res;
    res.graph = orient_skeleton(sk.graph, sk.sepsets, opt);
    res.sepsets = std::move(sk.sepsets);
    res.log = std::move(sk.log);
    return res;
}

DiscoveryResult pc_stable(const Dataset& ds, const CiConfig& cfg, ColliderMode mode) {
    if (ds.n_samples() < 10) throw std::invalid_argument("pc_stable needs n >= 10");
    DataCiTester tester(ds, cfg);
    PcOptions opt;
    opt.collider_mode = mode;
    return pc_stable(tester, opt);
}

DiscoveryResult vectorized_pc(const Dataset& ds, const CiConfig& cfg) {
    if (!ds.partition.all_univariate() && cfg.test_kind == TestKind::parcorr) {
        throw std::invalid_argument("vectorized_pc: a multivariate test is required");
    }
    return pc_stable(ds, cfg, ColliderMode::conflict);
}

PcOptions LaggedDataset::pc_options(bool contemporaneous) const {
    PcOptions opt;
    if (tau_max > 0) opt.lag = lag;
    opt.contemporaneous = contemporaneous;
    return opt;
}

LaggedDataset lag_expand(const Dataset& ds, int tau_max) {
    if (tau_max < 0) throw std::invalid_argument("lag_expand: negative tau_max");
    if (ds.n_samples() <= tau_max) throw std::invalid_argument("lag_expand: n <= tau_max");
    LaggedDataset out;
    out.tau_max = tau_max;
    const int n_macro = ds.n_macro();
    if (tau_max == 0) {
        out.data = ds;
        out.lag.assign(n_macro, 0);
        for (int i = 0; i < n_macro; ++i) out.base.push_back(i);
        return out;
    }
    const int rows = ds.n_samples() - tau_max;
    std::vector<int> sizes;
    std::vector<std::string> names;
    for (int tau = 0; tau <= tau_max; ++tau) {
        for (int i = 0; i < n_macro; ++i) {
            sizes.push_back(ds.partition.size(i));
            names.push_back(tau == 0 ? ds.names[i] : ds.names[i] + "_lag" + std::to_string(tau));
            out.lag.push_back(tau);
            out.base.push_back(i);
        }
    }
    Eigen::MatrixXd x(rows, ds.n_micro() * (tau_max + 1));
    for (int tau = 0; tau <= tau_max; ++tau) {
        x.middleCols(static_cast<Eigen::Index>(tau) * ds.n_micro(), ds.n_micro()) =
            ds.data.middleRows(tau_max - tau, rows);
    }
    out.data = Dataset(std::move(x), Partition(sizes), std::move(names));
    return out;
}

}  // namespace vcd
