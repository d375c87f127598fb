#include "vectorcd/experiment.hpp"

#include "vectorcd/discovery.hpp"
#include "vectorcd/graph_algorithms.hpp"
#include "vectorcd/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace vcd {

namespace {

std::string method_name(MethodKind k) {
    switch (k) {
        case MethodKind::vec: return "vec";
        case MethodKind::avg: return "avg";
        case MethodKind::pca: return "pca";
        case MethodKind::s2v: return "s2v";
        case MethodKind::s2v2: return "s2v2";
        case MethodKind::adag: return "adag";
    }
    return "?";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string short_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

ConsistencyReport aggregate_scores(const Dataset& x, const Dataset& z, const CiConfig& ci,
                                   const DiscoveryResult& agg, int tau_max,
                                   const PcOptions& pc) {
    if (tau_max > 0) {
        DataCiTester xt(lag_expand(x, tau_max).data, ci);
        DataCiTester zt(lag_expand(z, tau_max).data, ci);
        return consistency_report(xt, zt, agg, false, false, pc);
    }
    DataCiTester xt(x, ci);
    DataCiTester zt(z, ci);
    return consistency_report(xt, zt, agg, false, false, pc);
}

}  // namespace

std::string MethodSpec::label() const {
    if (kind != MethodKind::adag) return method_name(kind);
    return "adag-" + to_string(map) + "-" + to_string(q) + "-" + short_double(alpha_q);
}

MethodSpec parse_method(const std::string& s) {
    const auto parts = split(s, '-');
    if (parts.empty()) throw std::invalid_argument("empty method");
    MethodSpec m;
    const std::string& head = parts[0];
    if (head == "vec") m.kind = MethodKind::vec;
    else if (head == "avg" || head == "wavg") m.kind = MethodKind::avg;
    else if (head == "pca") m.kind = MethodKind::pca;
    else if (head == "s2v") m.kind = MethodKind::s2v;
    else if (head == "s2v2") m.kind = MethodKind::s2v2;
    else if (head == "adag") m.kind = MethodKind::adag;
    else throw std::invalid_argument("unknown method: " + s);
    if (m.kind != MethodKind::adag) {
        if (parts.size() != 1) throw std::invalid_argument("unknown method: " + s);
        return m;
    }
    // adag[-map[-score[-alpha]]]
    if (parts.size() > 4) throw std::invalid_argument("unknown method: " + s);
    if (parts.size() > 1) m.map = parse_map_kind(parts[1]);
    if (parts.size() > 2) m.q = parse_score_kind(parts[2]);
    if (parts.size() > 3) {
        m.alpha_q = parse_double(parts[3]);
        if (!(m.alpha_q >= 0.0 && m.alpha_q <= 1.0)) {
            throw std::invalid_argument("adag threshold must lie in [0, 1]: " + s);
        }
    }
    return m;
}

int ExperimentConfig::tau_max() const {
    return generator == GeneratorKind::savar ? savar.tau_max() : scm.tau_max;
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("experiment: no methods");
    if (repetitions < 1) throw std::invalid_argument("experiment: repetitions must be >= 1");
    ci.validate();
    if (generator == GeneratorKind::savar) savar.validate();
    else scm.validate();
}

MixedGraph evaluation_target(const MixedGraph& truth, int n_base, int tau_max) {
    MixedGraph target = cpdag_of(truth);
    if (tau_max == 0) return target;
    if (truth.n_nodes() != n_base * (tau_max + 1)) {
        throw std::invalid_argument("evaluation_target: truth is not a window graph");
    }
    bool changed = false;
    for (const auto& e : truth.edges()) {
        const int lag_i = e.i / n_base, lag_j = e.j / n_base;
        if (lag_i == lag_j) continue;
        // the older endpoint is the cause
        const int from = lag_i > lag_j ? e.i : e.j;
        const int to = lag_i > lag_j ? e.j : e.i;
        if (!target.is_directed(from, to)) {
            target.add_directed(from, to);
            changed = true;
        }
    }
    if (changed) apply_meek_rules_in_place(target);
    return target;
}

MethodOutput run_method(const MethodSpec& method, const Dataset& data, const CiConfig& ci,
                        int tau_max, bool contemporaneous, bool scores) {
    const auto start = std::chrono::steady_clock::now();
    MethodOutput out;
    auto lagged_pc = [&](const Dataset& ds, Dataset& expanded) {
        LaggedDataset l = lag_expand(ds, tau_max);
        expanded = std::move(l.data);
        return l.pc_options(contemporaneous);
    };

    switch (method.kind) {
        case MethodKind::vec: {
            Dataset x;
            PcOptions pc = lagged_pc(data, x);
            out.graph = pc_stable(DataCiTester(x, ci), pc).graph;
            break;
        }
        case MethodKind::avg:
        case MethodKind::pca: {
            std::vector<int> m(data.n_macro(), 1);
            TunableAggregationMap map = method.kind == MethodKind::avg
                                            ? weighted_average_map(data.partition, m)
                                            : fit_pca(data, m);
            Dataset z = apply_map(map, data);
            Dataset zx;
            PcOptions pc = lagged_pc(z, zx);
            DiscoveryResult agg = pc_stable(DataCiTester(zx, ci), pc);
            out.graph = agg.graph;
            out.m = m;
            if (scores) {
                out.report = aggregate_scores(data, z, ci, agg, tau_max, pc);
                out.has_scores = true;
            }
            break;
        }
        case MethodKind::s2v:
        case MethodKind::s2v2: {
            Dataset micro;
            PcOptions pc = lagged_pc(data.micro_view(), micro);
            const Partition p = lag_expand(data, tau_max).data.partition;
            DataCiTester tester(micro, ci);
            out.graph = method.kind == MethodKind::s2v
                            ? s2v(tester, p, EdgeAggregation::majority, pc).graph
                            : s2v2(tester, p, pc).graph;
            break;
        }
        case MethodKind::adag: {
            AdagOptions opt;
            opt.map_kind = method.map;
            opt.q = method.q;
            opt.alpha_q = method.alpha_q;
            opt.tau_max = tau_max;
            opt.pc.contemporaneous = contemporaneous;
            AdagResult r = adag(data, ci, opt);
            out.graph = r.graph;
            out.m = r.m;
            out.report = r.report;
            out.has_scores = true;
            break;
        }
    }
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int tau = cfg.tau_max();
    std::vector<std::vector<RunRecord>> per_rep(cfg.repetitions);
    std::vector<bool> failed(cfg.repetitions, false);
    std::mutex mu;
    std::string first_error;

    parallel_for(static_cast<std::size_t>(cfg.repetitions), cfg.threads, [&](std::size_t k) {
        const int rep = static_cast<int>(k);
        const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(rep);
        try {
            Dataset data;
            MixedGraph truth;
            if (cfg.generator == GeneratorKind::savar) {
                SavarSpec s = cfg.savar;
                s.seed = seed;
                SavarResult r = gen_savar(s);
                data = std::move(r.data);
                truth = std::move(r.truth);
            } else {
                VectorScmSpec s = cfg.scm;
                s.seed = seed;
                SimResult r = gen_vector_scm(s);
                data = std::move(r.data);
                truth = std::move(r.truth);
            }
            const MixedGraph target = evaluation_target(truth, data.n_macro(), tau);
            CiConfig ci = cfg.ci;
            ci.rng_seed = cfg.ci.rng_seed + seed;

            std::vector<RunRecord> rows;
            for (const auto& method : cfg.methods) {
                const std::string label = method.label();
                MethodOutput o = run_method(method, data, ci, tau, cfg.contemporaneous,
                                            cfg.scores);
                const Metrics met = evaluate_graph(o.graph, target);
                auto add = [&](const std::string& metric, double v) {
                    rows.push_back({rep, label, metric, v, o.seconds});
                };
                add("adj_precision", met.adj_precision);
                add("adj_recall", met.adj_recall);
                add("edgemark_precision", met.edgemark_precision);
                add("edgemark_recall", met.edgemark_recall);
                add("shd", met.shd);
                if (o.has_scores && (cfg.scores || method.kind == MethodKind::adag)) {
                    add("c_ind", o.report.c_ind);
                    add("c_dep", o.report.c_dep);
                    add("ac", o.report.ac);
                }
                if (!o.m.empty()) {
                    double total = 0.0;
                    for (int v : o.m) total += v;
                    add("m_mean", total / static_cast<double>(o.m.size()));
                }
            }
            per_rep[k] = std::move(rows);
        } catch (const std::exception& e) {
            per_rep[k] = {{rep, "-", "failed", 1.0, 0.0}};
            std::lock_guard<std::mutex> lock(mu);
            failed[k] = true;
            if (first_error.empty()) first_error = e.what();
        }
    });

    const auto n_failed = std::count(failed.begin(), failed.end(), true);
    if (5 * n_failed > cfg.repetitions) {
        throw std::runtime_error("experiment: " + std::to_string(n_failed) + " of " +
                                 std::to_string(cfg.repetitions) +
                                 " repetitions failed; first error: " + first_error);
    }
    std::vector<RunRecord> out;
    for (auto& rows : per_rep) {
        for (auto& r : rows) out.push_back(std::move(r));
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    // keep first-seen order of methods and metrics
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::vector<double>> values;
    for (const auto& r : records) {
        auto key = std::make_pair(r.method, r.metric);
        auto it = values.find(key);
        if (it == values.end()) {
            order.push_back(key);
            it = values.emplace(key, std::vector<double>{}).first;
        }
        it->second.push_back(r.value);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& v = values[key];
        SummaryRow row;
        row.method = key.first;
        row.metric = key.second;
        row.count = static_cast<int>(v.size());
        double sum = 0.0;
        for (double x : v) sum += x;
        row.mean = sum / row.count;
        if (row.count > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - row.mean) * (x - row.mean);
            row.stderr_ = std::sqrt(ss / (row.count - 1)) / std::sqrt(static_cast<double>(row.count));
        }
        out.push_back(row);
    }
    return out;
}

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "rep,method,metric,value,seconds\n";
    for (const auto& r : records) {
        os << r.rep << ',' << r.method << ',' << r.metric << ',' << format_double(r.value) << ','
           << format_double(r.seconds) << '\n';
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty records file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "rep,method,metric,value,seconds") {
        throw std::invalid_argument("unexpected records header in " + path);
    }
    std::vector<RunRecord> out;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw std::invalid_argument("malformed record: " + line);
        RunRecord r;
        r.rep = std::stoi(f[0]);
        r.method = f[1];
        r.metric = f[2];
        r.value = parse_double(f[3]);
        r.seconds = parse_double(f[4]);
        out.push_back(std::move(r));
    }
    return out;
}

void emit_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "method,metric,mean,stderr,count\n";
    for (const auto& r : rows) {
        os << r.method << ',' << r.metric << ',' << format_double(r.mean) << ','
           << format_double(r.stderr_) << ',' << r.count << '\n';
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace vcd
