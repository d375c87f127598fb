#include "vectorcd/aggregation.hpp"

#include "vectorcd/graph_algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <tuple>

namespace vcd {

namespace {

using Key = std::tuple<int, int, std::vector<int>>;

Key key_of(int i, int j, std::vector<int> cond) {
    std::sort(cond.begin(), cond.end());
    return {std::min(i, j), std::max(i, j), std::move(cond)};
}

double finish(ScorePart& part) {
    const int total = part.total();
    part.score = total == 0 ? 1.0 : static_cast<double>(part.consistent.size()) / total;
    return part.score;
}

void add(ScorePart& part, Statement st) {
    if (st.consistent) part.consistent.push_back(std::move(st));
    else part.inconsistent.push_back(std::move(st));
}

bool is_candidate(const PcOptions& pc, int u, int v) {
    if (pc.lag.empty()) return true;
    const bool u0 = pc.lag[u] == 0, v0 = pc.lag[v] == 0;
    if (!u0 && !v0) return false;
    if (u0 && v0) return pc.contemporaneous;
    return true;
}

std::vector<std::vector<int>> all_subsets(const std::vector<int>& pool) {
    std::vector<std::vector<int>> out;
    const std::size_t n = pool.size();
    for (std::size_t size = 0; size <= n; ++size) {
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
        do {
            std::vector<int> s;
            for (std::size_t k = 0; k < n; ++k) {
                if (pick[k]) s.push_back(pool[k]);
            }
            out.push_back(std::move(s));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return out;
}

void check_testers(const CiTester& x, const DiscoveryResult& agg) {
    if (x.n_variables() != agg.graph.n_nodes()) {
        throw std::invalid_argument("score: vector tester and aggregate graph disagree in size");
    }
}

}  // namespace

std::vector<MarkovPiece> local_markov_pieces(const MixedGraph& dag) {
    const std::vector<int> order = topological_order(dag);
    std::vector<MarkovPiece> out;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int v = order[k];
        std::vector<int> cond = dag.parents(v);
        for (std::size_t q = 0; q < k; ++q) {
            const int r = order[q];
            if (std::find(cond.begin(), cond.end(), r) != cond.end()) continue;
            std::vector<int> sorted = cond;
            std::sort(sorted.begin(), sorted.end());
            out.push_back({v, r, std::move(sorted)});
            cond.push_back(r);
        }
    }
    return out;
}

ScorePart c_ind_score(const CiTester& x_tester, const DiscoveryResult& agg,
                      const CiTester* z_tester, bool augment, const PcOptions& pc) {
    check_testers(x_tester, agg);
    ScorePart part;
    std::set<Key> tested;
    std::set<Key> scored;
    for (const auto& rec : agg.log) tested.insert(key_of(rec.i, rec.j, rec.cond));

    auto verify = [&](int i, int j, const std::vector<int>& cond, double p_agg, const char* src) {
        TestRecord x = x_tester.test(i, j, cond);
        add(part, {i, j, cond, p_agg, x.p_value, x.decided_independent, src});
    };

    for (const auto& rec : agg.log) {
        if (!rec.decided_independent) continue;
        if (!scored.insert(key_of(rec.i, rec.j, rec.cond)).second) continue;
        verify(rec.i, rec.j, rec.cond, rec.p_value, "log");
    }
    if (augment) {
        if (!z_tester) throw std::invalid_argument("c_ind_score: augmentation needs a z tester");
        const MixedGraph dag = dag_extension(agg.graph);
        for (const auto& piece : local_markov_pieces(dag)) {
            if (!is_candidate(pc, piece.v, piece.r)) continue;
            Key k = key_of(piece.v, piece.r, piece.cond);
            if (tested.count(k)) continue;
            tested.insert(k);
            const int i = std::min(piece.v, piece.r), j = std::max(piece.v, piece.r);
            TestRecord z = z_tester->test(i, j, piece.cond);
            if (!z.decided_independent) continue;
            scored.insert(k);
            verify(i, j, piece.cond, z.p_value, "augmented");
        }
    }
    finish(part);
    return part;
}

ScorePart c_ind_score(const Dataset& vec_data, const DiscoveryResult& agg_result,
                      const TunableAggregationMap& map, const CiConfig& cfg, bool augment) {
    if (!(vec_data.partition == map.input)) {
        throw std::invalid_argument("c_ind_score: dataset partition does not match map");
    }
    DataCiTester x(vec_data, cfg);
    if (!augment) return c_ind_score(x, agg_result, nullptr, false);
    DataCiTester z(apply_map(map, vec_data), cfg);
    return c_ind_score(x, agg_result, &z, true);
}

ScorePart meta_c_dep_score(const CiTester& x_tester, const CiTester& z_tester,
                           const DiscoveryResult& agg, DepStrategy dep, CondStrategy cond,
                           SortStrategy sort) {
    check_testers(x_tester, agg);
    const int n = agg.graph.n_nodes();
    if (cond == CondStrategy::all && n > kExhaustiveLimit) {
        throw std::invalid_argument("meta_c_dep_score: 'all' conditioning needs at most " +
                                    std::to_string(kExhaustiveLimit) + " variables");
    }
    std::vector<std::pair<int, int>> pairs;
    if (dep == DepStrategy::adjacency) {
        for (const auto& e : agg.graph.edges()) pairs.emplace_back(e.i, e.j);
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        }
    }

    ScorePart part;
    for (const auto& [i, j] : pairs) {
        struct Candidate {
            std::vector<int> cond;
            double p;
        };
        std::vector<Candidate> list;
        std::set<std::vector<int>> seen;
        if (cond == CondStrategy::tested) {
            for (const auto& rec : agg.log) {
                if (std::min(rec.i, rec.j) != i || std::max(rec.i, rec.j) != j) continue;
                if (rec.decided_independent) continue;
                std::vector<int> c = rec.cond;
                std::sort(c.begin(), c.end());
                if (!seen.insert(c).second) continue;
                list.push_back({std::move(c), rec.p_value});
            }
        } else {
            std::vector<int> others;
            for (int v = 0; v < n; ++v) {
                if (v != i && v != j) others.push_back(v);
            }
            for (auto& s : all_subsets(others)) {
                TestRecord z = z_tester.test(i, j, s);
                if (z.decided_independent) continue;
                list.push_back({std::move(s), z.p_value});
            }
        }

        if (list.empty()) {
            if (dep == DepStrategy::adjacency && cond == CondStrategy::tested) {
                TestRecord x = x_tester.test(i, j, {});
                add(part, {i, j, {}, std::numeric_limits<double>::quiet_NaN(), x.p_value,
                           !x.decided_independent, "fallback"});
            }
            continue;
        }
        if (sort == SortStrategy::min_p) {
            auto best = list.begin();
            for (auto it = list.begin(); it != list.end(); ++it) {
                if (it->p < best->p) best = it;
            }
            list = {*best};
        }
        const char* src = cond == CondStrategy::all ? "exhaustive" : "log";
        for (const auto& c : list) {
            TestRecord x = x_tester.test(i, j, c.cond);
            add(part, {i, j, c.cond, c.p, x.p_value, !x.decided_independent, src});
        }
    }
    finish(part);
    return part;
}

ScorePart meta_c_dep_score(const Dataset& vec_data, const DiscoveryResult& agg_result,
                           const TunableAggregationMap& map, const CiConfig& cfg,
                           DepStrategy dep, CondStrategy cond, SortStrategy sort) {
    if (!(vec_data.partition == map.input)) {
        throw std::invalid_argument("meta_c_dep_score: dataset partition does not match map");
    }
    DataCiTester x(vec_data, cfg);
    DataCiTester z(apply_map(map, vec_data), cfg);
    return meta_c_dep_score(x, z, agg_result, dep, cond, sort);
}

ScorePart effective_c_dep_score(const CiTester& x_tester, const DiscoveryResult& agg) {
    // The z tester is never queried under the tested conditioning strategy.
    return meta_c_dep_score(x_tester, x_tester, agg, DepStrategy::adjacency, CondStrategy::tested,
                            SortStrategy::min_p);
}

ScorePart effective_c_dep_score(const Dataset& vec_data, const DiscoveryResult& agg_result,
                                const TunableAggregationMap& map, const CiConfig& cfg) {
    if (!(vec_data.partition == map.input)) {
        throw std::invalid_argument("effective_c_dep_score: dataset partition does not match map");
    }
    DataCiTester x(vec_data, cfg);
    return effective_c_dep_score(x, agg_result);
}

double ac_score(double c_ind, double c_dep) {
    if (!(c_ind >= 0.0 && c_ind <= 1.0) || !(c_dep >= 0.0 && c_dep <= 1.0)) {
        throw std::invalid_argument("ac_score: scores must lie in [0, 1]");
    }
    return (c_ind + c_dep) / 2.0;
}

std::string to_string(ScoreKind k) {
    switch (k) {
    case ScoreKind::c_ind: return "cind";
    case ScoreKind::c_dep_eff: return "cdep";
    case ScoreKind::ac: return "ac";
    }
    return "?";
}

ScoreKind parse_score_kind(const std::string& s) {
    if (s == "cind" || s == "c_ind") return ScoreKind::c_ind;
    if (s == "cdep" || s == "c_dep" || s == "c_dep_eff") return ScoreKind::c_dep_eff;
    if (s == "ac") return ScoreKind::ac;
    throw std::invalid_argument("unknown score: " + s);
}

ConsistencyReport consistency_report(const CiTester& x_tester, const CiTester& z_tester,
                                     const DiscoveryResult& agg, bool augment, bool complete_dep,
                                     const PcOptions& pc) {
    if (complete_dep && !pc.lag.empty()) {
        throw std::invalid_argument("consistency_report: complete strategy on lag windows");
    }
    ConsistencyReport r;
    r.ind = c_ind_score(x_tester, agg, &z_tester, augment, pc);
    if (complete_dep) {
        r.dep = meta_c_dep_score(x_tester, z_tester, agg, DepStrategy::connection,
                                 CondStrategy::all, SortStrategy::none);
        r.dep_strategy = "complete";
    } else {
        r.dep = effective_c_dep_score(x_tester, agg);
    }
    r.c_ind = r.ind.score;
    r.c_dep = r.dep.score;
    r.ac = ac_score(r.c_ind, r.c_dep);
    return r;
}

}  // namespace vcd
