#include "test_support.hpp"

#include "vectorcd/dataset.hpp"
#include "vectorcd/experiment.hpp"
#include "vectorcd/graph_algorithms.hpp"
#include "vectorcd/metrics.hpp"
#include "vectorcd/parallel.hpp"
#include "vectorcd/serialize.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

using namespace vcd;
using namespace vcd::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("vectorcd_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.scm.d_macro = 3;
    cfg.scm.d_micro = 2;
    cfg.scm.n = 200;
    cfg.methods = {parse_method("vec"), parse_method("avg"), parse_method("s2v")};
    cfg.ci.test_kind = TestKind::maxcorr;
    cfg.repetitions = 4;
    cfg.seed_base = 10;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST_CASE("graph metrics on a worked example") {
    MixedGraph truth(3);
    truth.add_directed(0, 1);
    truth.add_directed(2, 1);
    MixedGraph pred(3);
    pred.add_directed(0, 1);
    pred.add_undirected(1, 2);
    pred.add_undirected(0, 2);
    Metrics m = evaluate_graph(pred, truth);
    CHECK(m.adj_precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.adj_recall == 1.0);
    CHECK(m.edgemark_recall == doctest::Approx(0.75));
    CHECK(m.edgemark_precision == 1.0);
    CHECK(m.shd == 2);

    MixedGraph conflict(3);
    conflict.add_conflict(0, 1);
    Metrics c = evaluate_graph(conflict, truth);
    CHECK(c.adj_precision == 1.0);
    CHECK(c.adj_recall == 0.5);
    CHECK(c.edgemark_precision == 0.0);
    CHECK(c.edgemark_recall == 0.0);
    CHECK(c.shd == 2);

    Metrics empty = evaluate_graph(MixedGraph(3), truth);
    CHECK(empty.adj_precision == 1.0);
    CHECK(empty.adj_recall == 0.0);
    CHECK(empty.edgemark_precision == 1.0);
    CHECK(empty.edgemark_recall == 1.0);
    CHECK(empty.shd == 2);
    CHECK_THROWS_AS(evaluate_graph(MixedGraph(2), truth), std::invalid_argument);
}

TEST_CASE("graph metric properties") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = uniform_int(rng, 2, 6);
        MixedGraph a = cpdag_of(random_dag(n, 0.5, rng));
        MixedGraph b = cpdag_of(random_dag(n, 0.5, rng));
        Metrics self = evaluate_graph(a, a);
        CHECK(self.adj_precision == 1.0);
        CHECK(self.adj_recall == 1.0);
        CHECK(self.edgemark_recall == 1.0);
        CHECK(self.edgemark_precision == 1.0);
        CHECK(self.shd == 0);
        Metrics ab = evaluate_graph(a, b), ba = evaluate_graph(b, a);
        CHECK(ab.shd == ba.shd);
        CHECK(ab.adj_precision == ba.adj_recall);
        for (double v : {ab.adj_precision, ab.adj_recall, ab.edgemark_precision, ab.edgemark_recall}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(ab.shd <= n * (n - 1) / 2);
    }
}

TEST_CASE("evaluation target") {
    MixedGraph dag(3);
    dag.add_directed(0, 1);
    dag.add_directed(1, 2);
    CHECK(evaluation_target(dag, 3, 0) == cpdag_of(dag));

    // x0 at lag 1 drives x0 now, which drives x1 now
    MixedGraph window(4);
    window.add_directed(2, 0);
    window.add_directed(0, 1);
    REQUIRE(cpdag_of(window).is_undirected(0, 2));
    MixedGraph t = evaluation_target(window, 2, 1);
    CHECK(t.is_directed(2, 0));
    CHECK(t.is_directed(0, 1));
    CHECK(t.n_edges() == 2);
    CHECK_THROWS_AS(evaluation_target(window, 3, 1), std::invalid_argument);
}

TEST_CASE("method names") {
    for (const std::string s : {"vec", "avg", "pca", "s2v", "s2v2", "adag-pca-cind-0.8",
                                "adag-wavg-ac-0.9", "adag-pca-cdep-1"}) {
        CHECK(parse_method(s).label() == s);
    }
    CHECK(parse_method("wavg").kind == MethodKind::avg);
    MethodSpec a = parse_method("adag");
    CHECK(a.kind == MethodKind::adag);
    CHECK(a.map == MapKind::pca);
    CHECK(a.q == ScoreKind::c_ind);
    CHECK(a.alpha_q == 0.8);
    CHECK(parse_method("adag-wavg").label() == "adag-wavg-cind-0.8");
    for (const std::string bad : {"", "pc", "vec-1", "adag-pca-cind-1.5", "adag-pca-cind-0.8-x",
                                  "adag-svd"}) {
        CHECK_THROWS_AS(parse_method(bad), std::invalid_argument);
    }
}

TEST_CASE("numbers and csv datasets") {
    for (double v : {0.0, -1.5, 1e-300, 0.1, 123456.789, 2.0 / 3.0}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(parse_double(" +2.5") == 2.5);
    CHECK_THROWS_AS(parse_double("1.0x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);

    fs::path dir = scratch("csv");
    Rng rng(1);
    Eigen::MatrixXd x(7, 4);
    for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 4; ++c) x(r, c) = uniform(rng, -3, 3);
    }
    Dataset ds(x, Partition({1, 3}), {"temp", "wind"});
    write_csv(ds, (dir / "d.csv").string());
    Dataset back = read_csv((dir / "d.csv").string());
    CHECK(back.data == x);
    CHECK(back.partition == ds.partition);
    CHECK(back.names == ds.names);
    CHECK(read_text_file((dir / "d.csv").string()).rfind("temp:0,wind:0,wind:1,wind:2\n", 0) == 0);

    write_text_file((dir / "split.csv").string(), "a:0,b:0,a:1\n1,2,3\n");
    CHECK_THROWS_AS(read_csv((dir / "split.csv").string()), std::invalid_argument);
    write_text_file((dir / "short.csv").string(), "a:0,b:0\n1\n");
    CHECK_THROWS_AS(read_csv((dir / "short.csv").string()), std::invalid_argument);
    write_text_file((dir / "plain.csv").string(), "a,b\n1,2\n");
    CHECK_THROWS_AS(read_csv((dir / "plain.csv").string()), std::invalid_argument);
    CHECK_THROWS_AS(read_csv((dir / "missing.csv").string()), std::runtime_error);

    Dataset micro = ds.micro_view();
    CHECK(micro.partition == Partition::singletons(4));
    CHECK(micro.names == std::vector<std::string>{"temp:0", "wind:0", "wind:1", "wind:2"});
    std::vector<int> pick = {1, 0};
    Eigen::MatrixXd g = ds.gather(pick);
    CHECK(g.leftCols(3) == x.rightCols(3));
    CHECK(g.col(3) == x.col(0));
    CHECK(Dataset(x, Partition({2, 2})).names == std::vector<std::string>{"X1", "X2"});
    CHECK_THROWS_AS(Dataset(x, Partition({2, 1})), std::invalid_argument);
    CHECK_THROWS_AS(Dataset(x, Partition({2, 2}), {"a"}), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("test records round trip through json") {
    TestRecord r;
    r.i = 2;
    r.j = 5;
    r.cond = {0, 3};
    r.p_value = 0.0123;
    r.statistic = 4.5;
    r.decided_independent = false;
    r.level = 0.05;
    r.test = TestKind::gcm;
    r.ridge = true;
    r.excluded = 3;
    TestRecord back = record_from_json(record_to_json(r));
    CHECK(back.i == r.i);
    CHECK(back.j == r.j);
    CHECK(back.cond == r.cond);
    CHECK(back.p_value == r.p_value);
    CHECK(back.statistic == r.statistic);
    CHECK(back.decided_independent == r.decided_independent);
    CHECK(back.level == r.level);
    CHECK(back.test == r.test);
    CHECK(back.ridge);
    CHECK_FALSE(back.saturated);
    CHECK(back.excluded == 3);

    r.statistic = std::numeric_limits<double>::quiet_NaN();
    const std::string line = record_to_json(r);
    CHECK(line.find("null") != std::string::npos);
    CHECK(std::isnan(record_from_json(line).statistic));

    std::vector<TestRecord> log = {r, back, TestRecord{}};
    auto again = log_from_jsonl(log_to_jsonl(log));
    REQUIRE(again.size() == 3);
    CHECK(again[1].cond == back.cond);
    CHECK(log_from_jsonl("").empty());
    CHECK_THROWS_AS(record_from_json("{not json"), std::invalid_argument);
}

TEST_CASE("reports, maps and discovery results round trip") {
    ConsistencyReport rep;
    rep.ind.consistent.push_back({0, 1, {2}, 0.4, 0.6, true, "log"});
    rep.ind.inconsistent.push_back({1, 2, {}, 0.3, 0.001, false, "augmented"});
    rep.dep.consistent.push_back({0, 2, {}, std::nan(""), 0.0, true, "fallback"});
    rep.ind.score = rep.c_ind = 0.5;
    rep.dep.score = rep.c_dep = 1.0;
    rep.ac = 0.75;
    rep.dep_strategy = "complete";
    ConsistencyReport rb = report_from_json(report_to_json(rep));
    CHECK(rb.c_ind == 0.5);
    CHECK(rb.c_dep == 1.0);
    CHECK(rb.ac == 0.75);
    CHECK(rb.dep_strategy == "complete");
    REQUIRE(rb.ind.inconsistent.size() == 1);
    CHECK(rb.ind.inconsistent[0].source == "augmented");
    CHECK(rb.ind.inconsistent[0].p_vector == 0.001);
    CHECK(rb.ind.consistent[0].cond == std::vector<int>{2});
    CHECK(std::isnan(rb.dep.consistent.at(0).p_aggregate));

    TunableAggregationMap wavg = weighted_average_map(Partition({2, 3}), {1, 2});
    TunableAggregationMap wb = map_from_json(map_to_json(wavg));
    CHECK(wb.kind == MapKind::weighted_average);
    CHECK(wb.m == wavg.m);
    CHECK(wb.input == wavg.input);
    CHECK(wb.linear_operator().isApprox(wavg.linear_operator(), 1e-15));

    Eigen::MatrixXd cov(3, 3);
    cov << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 1;
    TunableAggregationMap pca = fit_pca_covariance(cov, Partition({1, 2}), {1, 1});
    TunableAggregationMap pb = map_from_json(map_to_json(pca));
    CHECK(pb.kind == MapKind::pca);
    CHECK(pb.linear_operator().isApprox(pca.linear_operator(), 1e-15));
    CHECK(pb.eigenvalues[1].isApprox(pca.eigenvalues[1]));
    CHECK(pb.means.size() == 2);

    DiscoveryResult d;
    d.graph = MixedGraph(4);
    d.graph.add_directed(0, 1);
    d.graph.add_conflict(2, 3);
    d.graph.add_undirected(1, 2);
    d.sepsets[{0, 2}] = {1};
    d.sepsets[{0, 3}] = {};
    TestRecord t;
    t.i = 0;
    t.j = 2;
    t.cond = {1};
    d.log = {t};
    DiscoveryResult db = discovery_from_json(discovery_to_json(d));
    CHECK(db.graph == d.graph);
    CHECK(db.sepsets == d.sepsets);

    fs::path dir = scratch("disc");
    write_discovery(dir.string(), d);
    CHECK(fs::exists(dir / "graph.txt"));
    CHECK(MixedGraph::from_text(read_text_file((dir / "graph.txt").string())) == d.graph);
    DiscoveryResult dd = read_discovery(dir.string());
    CHECK(dd.graph == d.graph);
    CHECK(dd.sepsets == d.sepsets);
    REQUIRE(dd.log.size() == 1);
    CHECK(dd.log[0].cond == std::vector<int>{1});
    CHECK_THROWS_AS(read_text_file((dir / "nothing.json").string()), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("generator specs from json") {
    VectorScmSpec s;
    s.d_macro = 4;
    s.d_micro = 3;
    s.internal_kind = InternalKind::latent;
    s.coef_low = -0.25;
    s.tau_max = 2;
    s.seed = 99;
    VectorScmSpec b = scm_spec_from_json(scm_spec_to_json(s));
    CHECK(b.d_macro == 4);
    CHECK(b.d_micro == 3);
    CHECK(b.internal_kind == InternalKind::latent);
    CHECK(b.coef_low == -0.25);
    CHECK(b.tau_max == 2);
    CHECK(b.seed == 99);
    CHECK_THROWS_AS(scm_spec_from_json(R"({"d_macro": 1})"), std::invalid_argument);

    SavarSpec sv = savar_spec_from_json(R"({"d_micro": 16, "links": [{"from": 0, "to": 1, "coef": 0.3}]})");
    CHECK(sv.d_micro == 16);
    CHECK(sv.noise_width == SavarSpec{}.noise_width);
    CHECK(savar_spec_from_json(R"({"noise_width": 0.8})").noise_width == 0.8);
    REQUIRE(sv.links.size() == 1);
    CHECK(sv.links[0].lag == 1);
    CHECK(sv.links[0].coef == 0.3);
    CHECK(savar_spec_from_json("{}").links.size() == SavarSpec::three_mode_chain().links.size());
    CHECK_THROWS_AS(savar_spec_from_json(R"({"d_micro": 10})"), std::invalid_argument);

    ExperimentConfig cfg = experiment_config_from_json(R"({
        "generator": "vector_scm",
        "spec": {"d_macro": 3, "d_micro": 2, "n": 100},
        "methods": ["vec", "adag-wavg-ac-0.9"],
        "ci": {"alpha": 0.05, "test": "maxcorr", "bootstrap_reps": 199, "seed": 3},
        "repetitions": 7, "seed_base": 100, "scores": true, "threads": 2, "output": "out"
    })");
    CHECK(cfg.scm.d_macro == 3);
    CHECK(cfg.methods.size() == 2);
    CHECK(cfg.methods[1].label() == "adag-wavg-ac-0.9");
    CHECK(cfg.ci.alpha == 0.05);
    CHECK(cfg.ci.test_kind == TestKind::maxcorr);
    CHECK(cfg.ci.bootstrap_reps == 199);
    CHECK(cfg.ci.rng_seed == 3);
    CHECK(cfg.repetitions == 7);
    CHECK(cfg.seed_base == 100);
    CHECK(cfg.scores);
    CHECK(cfg.threads == 2);
    CHECK(cfg.output == "out");
    CHECK(cfg.tau_max() == 0);

    ExperimentConfig sav = experiment_config_from_json(R"({"generator": "savar", "methods": ["pca"]})");
    CHECK(sav.generator == GeneratorKind::savar);
    CHECK(sav.tau_max() == 1);
    CHECK_THROWS_AS(experiment_config_from_json(R"({"generator": "other", "methods": ["vec"]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(experiment_config_from_json(R"({"methods": []})"), std::invalid_argument);
    CHECK_THROWS(experiment_config_from_json(R"({"spec": {}})"));
}

TEST_CASE("parallel_for") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k] += static_cast<int>(k); });
    for (std::size_t k = 0; k < hits.size(); ++k) CHECK(hits[k] == static_cast<int>(k));
    std::atomic<int> calls{0};
    parallel_for(0, 3, [&](std::size_t) { ++calls; });
    CHECK(calls == 0);
    CHECK_THROWS_AS(parallel_for(10, 2,
                                 [](std::size_t k) {
                                     if (k == 7) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    CHECK(default_threads() >= 1);
    setenv("VECTORCD_THREADS", "1", 1);
    CHECK(default_threads() == 1);
    unsetenv("VECTORCD_THREADS");
}

TEST_CASE("run_method covers every method") {
    VectorScmSpec spec;
    spec.d_macro = 3;
    spec.d_micro = 2;
    spec.n = 200;
    spec.seed = 5;
    SimResult sim = gen_vector_scm(spec);
    CiConfig ci;
    ci.test_kind = TestKind::maxcorr;
    for (const std::string s : {"vec", "avg", "pca", "s2v", "s2v2", "adag-pca-cind-0.8"}) {
        MethodOutput o = run_method(parse_method(s), sim.data, ci, 0, true, true);
        CAPTURE(s);
        CHECK(o.graph.n_nodes() == 3);
        CHECK(o.seconds >= 0.0);
        const bool aggregate = s == "avg" || s == "pca" || s.rfind("adag", 0) == 0;
        CHECK(o.has_scores == aggregate);
        CHECK(o.m.empty() != aggregate);
        if (o.has_scores) CHECK(o.report.ac == doctest::Approx((o.report.c_ind + o.report.c_dep) / 2));
    }
    spec.tau_max = 1;
    SimResult lagged = gen_vector_scm(spec);
    for (const std::string s : {"vec", "avg", "s2v", "s2v2", "adag-pca-cind-0.8"}) {
        MethodOutput o = run_method(parse_method(s), lagged.data, ci, 1, false, false);
        CAPTURE(s);
        CHECK(o.graph.n_nodes() == 6);
        for (int u = 0; u < 3; ++u) {
            for (int v = 0; v < 3; ++v) {
                if (u != v) CHECK_FALSE(o.graph.adjacent(u, v));
            }
        }
    }
}

TEST_CASE("experiment runs are reproducible") {
    ExperimentConfig cfg = small_config();
    auto a = run_experiment(cfg);
    cfg.threads = 3;
    auto b = run_experiment(cfg);
    REQUIRE(a.size() == b.size());
    // three methods, five metrics each, plus m_mean for the aggregate one
    CHECK(a.size() == 4u * 16u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].rep == b[k].rep);
        CHECK(a[k].method == b[k].method);
        CHECK(a[k].metric == b[k].metric);
        CHECK(a[k].value == b[k].value);
    }
    cfg.scores = true;
    auto s = run_experiment(cfg);
    CHECK(std::count_if(s.begin(), s.end(), [](const RunRecord& r) { return r.metric == "c_ind"; }) == 4);

    ExperimentConfig broken = small_config();
    broken.scm.n = 2;  // too few samples to fit principal components
    broken.methods = {parse_method("pca")};
    CHECK_THROWS_AS(run_experiment(broken), std::runtime_error);
    ExperimentConfig none = small_config();
    none.methods.clear();
    CHECK_THROWS_AS(run_experiment(none), std::invalid_argument);
}

TEST_CASE("summaries and csv output") {
    std::vector<RunRecord> recs = {
        {0, "vec", "shd", 2, 0.1}, {0, "avg", "shd", 4, 0.2}, {1, "vec", "shd", 3, 0.1},
        {2, "vec", "shd", 7, 0.1}, {1, "avg", "shd", 4, 0.3}, {0, "vec", "adj_recall", 0.5, 0.1},
    };
    auto rows = summarize(recs);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].method == "vec");
    CHECK(rows[0].metric == "shd");
    CHECK(rows[1].method == "avg");
    CHECK(rows[2].metric == "adj_recall");
    CHECK(rows[0].count == 3);
    CHECK(rows[0].mean == doctest::Approx(4.0));
    // sd of {2, 3, 7} is sqrt(7), so stderr is sqrt(7 / 3)
    CHECK(rows[0].stderr_ == doctest::Approx(std::sqrt(7.0 / 3.0)));
    CHECK(rows[1].stderr_ == 0.0);
    CHECK(rows[2].count == 1);
    CHECK(rows[2].stderr_ == 0.0);

    fs::path dir = scratch("records");
    emit_csv(recs, (dir / "r.csv").string());
    CHECK(read_records_csv((dir / "r.csv").string()) == recs);
    emit_summary_csv(rows, (dir / "s.csv").string());
    const std::string text = read_text_file((dir / "s.csv").string());
    CHECK(text.rfind("method,metric,mean,stderr,count\nvec,shd,4,", 0) == 0);
    write_text_file((dir / "bad.csv").string(), "rep,method\n");
    CHECK_THROWS_AS(read_records_csv((dir / "bad.csv").string()), std::invalid_argument);
    write_text_file((dir / "short.csv").string(), "rep,method,metric,value,seconds\n1,vec\n");
    CHECK_THROWS_AS(read_records_csv((dir / "short.csv").string()), std::invalid_argument);
    fs::remove_all(dir);
}
