#include "vectorcd/aggregation.hpp"
#include "vectorcd/discovery.hpp"
#include "vectorcd/experiment.hpp"
#include "vectorcd/parallel.hpp"
#include "vectorcd/serialize.hpp"
#include "vectorcd/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

struct CommonCi {
    double alpha = 0.01;
    std::string test = "gcm";
    int reps = 499;
    std::uint64_t seed = 0;

    vcd::CiConfig config() const {
        vcd::CiConfig cfg;
        cfg.alpha = alpha;
        cfg.test_kind = vcd::parse_test_kind(test);
        cfg.bootstrap_reps = reps;
        cfg.rng_seed = seed;
        cfg.validate();
        return cfg;
    }
};

void add_ci_flags(CLI::App* app, CommonCi& ci) {
    app->add_option("--alpha", ci.alpha, "CI test level")->capture_default_str();
    app->add_option("--test", ci.test, "CI test")
        ->check(CLI::IsMember({"parcorr", "maxcorr", "gcm"}))
        ->capture_default_str();
    app->add_option("--bootstrap", ci.reps, "GCM bootstrap repetitions")->capture_default_str();
    app->add_option("--ci-seed", ci.seed, "GCM bootstrap seed")->capture_default_str();
}

void write_sim(const std::string& out, const vcd::SimResult& sim) {
    vcd::write_csv(sim.data, join(out, "dataset.csv"));
    vcd::write_text_file(join(out, "truth.graph"), sim.truth.to_text());
    if (sim.micro_truth.n_nodes() > 0) {
        vcd::write_text_file(join(out, "micro_truth.graph"), sim.micro_truth.to_text());
    }
}

int cmd_simulate(const std::string& spec_path, const std::string& out) {
    const std::string text = vcd::read_text_file(spec_path);
    const json j = json::parse(text);
    const std::string gen = j.value("generator", std::string("vector_scm"));
    fs::create_directories(out);
    if (gen == "vector_scm") {
        write_sim(out, vcd::gen_vector_scm(vcd::scm_spec_from_json(text)));
    } else if (gen == "savar") {
        vcd::SavarResult r = vcd::gen_savar(vcd::savar_spec_from_json(text));
        vcd::write_csv(r.data, join(out, "dataset.csv"));
        vcd::write_text_file(join(out, "truth.graph"), r.truth.to_text());
    } else if (gen == "determinism") {
        write_sim(out, vcd::gen_determinism(j.value("n", 500), j.value("seed", 0ULL)));
    } else if (gen == "counterexample") {
        const std::string which = j.value("example", std::string("faithfulness"));
        vcd::CounterexampleKind k;
        if (which == "faithfulness") k = vcd::CounterexampleKind::agg_faithfulness;
        else if (which == "sufficiency") k = vcd::CounterexampleKind::agg_sufficiency;
        else throw std::invalid_argument("unknown counterexample: " + which);
        vcd::Counterexample c = vcd::gen_counterexample(k, j.value("n", 1000), j.value("seed", 0ULL),
                                                        j.value("alpha", 0.7), j.value("beta", 0.4));
        write_sim(out, c.sim);
        vcd::write_text_file(join(out, "map.json"), vcd::map_to_json(c.map));
    } else if (gen == "confounder") {
        const json& zi = j.contains("z_int") ? j.at("z_int") : json("none");
        const std::string z_int = zi.is_number() ? std::to_string(zi.get<int>()) : zi.get<std::string>();
        vcd::Dataset ds = vcd::gen_confounder_xyz(
            j.value("d_xy", 2), j.value("d_z", 2), j.value("coef", 0.0), z_int,
            j.value("n_conf", std::string("low")), j.value("n", 500), j.value("seed", 0ULL));
        vcd::write_csv(ds, join(out, "dataset.csv"));
    } else {
        throw std::invalid_argument("unknown generator: " + gen);
    }
    return 0;
}

int cmd_discover(const std::string& data_path, const std::string& method_name, const CommonCi& ci,
                 int tau_max, bool no_contemporaneous, int threads, const std::string& out) {
    const vcd::Dataset x = vcd::read_csv(data_path);
    const vcd::CiConfig cfg = ci.config();
    const vcd::MethodSpec method = vcd::parse_method(method_name);
    fs::create_directories(out);

    auto lagged = [&](const vcd::Dataset& ds, vcd::Dataset& expanded) {
        vcd::LaggedDataset l = vcd::lag_expand(ds, tau_max);
        expanded = std::move(l.data);
        vcd::PcOptions pc = l.pc_options(!no_contemporaneous);
        pc.threads = threads;
        return pc;
    };

    vcd::DiscoveryResult result;
    switch (method.kind) {
        case vcd::MethodKind::vec: {
            vcd::Dataset e;
            const vcd::PcOptions pc = lagged(x, e);
            result = vcd::pc_stable(vcd::DataCiTester(e, cfg), pc);
            break;
        }
        case vcd::MethodKind::avg:
        case vcd::MethodKind::pca: {
            std::vector<int> m(x.n_macro(), 1);
            vcd::TunableAggregationMap map = method.kind == vcd::MethodKind::avg
                                                 ? vcd::weighted_average_map(x.partition, m)
                                                 : vcd::fit_pca(x, m);
            vcd::Dataset e;
            const vcd::PcOptions pc = lagged(vcd::apply_map(map, x), e);
            result = vcd::pc_stable(vcd::DataCiTester(e, cfg), pc);
            vcd::write_text_file(join(out, "map.json"), vcd::map_to_json(map));
            break;
        }
        case vcd::MethodKind::s2v:
        case vcd::MethodKind::s2v2: {
            vcd::Dataset micro;
            const vcd::PcOptions pc = lagged(x.micro_view(), micro);
            const vcd::Partition p = vcd::lag_expand(x, tau_max).data.partition;
            vcd::DataCiTester tester(micro, cfg);
            vcd::ComponentwiseResult r =
                method.kind == vcd::MethodKind::s2v
                    ? vcd::s2v(tester, p, vcd::EdgeAggregation::majority, pc)
                    : vcd::s2v2(tester, p, pc);
            // sepsets of the micro run refer to micro columns; only the log is kept
            result.graph = r.graph;
            result.log = std::move(r.micro.log);
            break;
        }
        case vcd::MethodKind::adag:
            throw std::invalid_argument("use the adag subcommand");
    }
    vcd::write_discovery(out, result);
    std::cout << result.graph.to_text();
    return 0;
}

int cmd_adag(const std::string& data_path, const std::string& score, double target,
             const std::string& map_kind, const CommonCi& ci, int tau_max, bool no_contemporaneous,
             bool augment, bool complete_dep, int threads, const std::string& out) {
    const vcd::Dataset x = vcd::read_csv(data_path);
    vcd::AdagOptions opt;
    opt.map_kind = vcd::parse_map_kind(map_kind);
    opt.q = vcd::parse_score_kind(score);
    opt.alpha_q = target;
    opt.augment = augment;
    opt.complete_dep = complete_dep;
    opt.tau_max = tau_max;
    opt.pc.contemporaneous = !no_contemporaneous;
    opt.pc.threads = threads;
    vcd::AdagResult r = vcd::adag(x, ci.config(), opt);
    fs::create_directories(out);
    vcd::write_discovery(out, r.aggregate);
    vcd::write_text_file(join(out, "report.json"), vcd::report_to_json(r.report));
    vcd::write_text_file(join(out, "trace.csv"), vcd::trace_csv(r.trace));
    vcd::write_text_file(join(out, "map.json"), vcd::map_to_json(r.map));
    std::cout << r.graph.to_text();
    return 0;
}

int cmd_scores(const std::string& data_path, const std::string& agg_dir, const std::string& map_path,
               const CommonCi& ci, int tau_max, bool augment, bool complete_dep) {
    const vcd::Dataset x = vcd::read_csv(data_path);
    const vcd::DiscoveryResult agg = vcd::read_discovery(agg_dir);
    const vcd::TunableAggregationMap map = vcd::map_from_json(vcd::read_text_file(map_path));
    if (!(map.input == x.partition)) {
        throw std::invalid_argument("map block sizes do not match the data");
    }
    const vcd::CiConfig cfg = ci.config();
    const vcd::Dataset z = vcd::apply_map(map, x);
    vcd::PcOptions pc;
    vcd::ConsistencyReport report;
    if (tau_max > 0) {
        vcd::LaggedDataset lz = vcd::lag_expand(z, tau_max);
        pc = lz.pc_options();
        vcd::DataCiTester xt(vcd::lag_expand(x, tau_max).data, cfg);
        vcd::DataCiTester zt(lz.data, cfg);
        report = vcd::consistency_report(xt, zt, agg, augment, complete_dep, pc);
    } else {
        vcd::DataCiTester xt(x, cfg);
        vcd::DataCiTester zt(z, cfg);
        report = vcd::consistency_report(xt, zt, agg, augment, complete_dep, pc);
    }
    const std::string text = vcd::report_to_json(report);
    vcd::write_text_file(join(agg_dir, "report.json"), text);
    std::cout << text;
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, int threads) {
    vcd::ExperimentConfig cfg = vcd::experiment_config_from_json(vcd::read_text_file(config_path));
    if (threads > 0) cfg.threads = threads;
    const auto records = vcd::run_experiment(cfg);
    fs::create_directories(out);
    vcd::emit_csv(records, join(out, "records.csv"));
    const auto summary = vcd::summarize(records);
    vcd::emit_summary_csv(summary, join(out, "summary.csv"));
    for (const auto& row : summary) {
        std::cout << row.method << ' ' << row.metric << ' ' << row.mean << " +- " << row.stderr_
                  << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal discovery over vector-valued variables"};
    app.require_subcommand(1);

    std::string spec, out, data, method = "vec", score = "cind", map_kind = "pca", agg_dir,
                                  map_path, config;
    double target = 0.8;
    int tau_max = 0, threads = 0;
    bool no_contemp = false, augment = false, complete_dep = false;
    CommonCi ci;

    auto* sim = app.add_subcommand("simulate", "Generate a dataset and its ground truth");
    sim->add_option("--spec", spec, "Generator spec (json)")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "Output directory")->required();

    auto* disc = app.add_subcommand("discover", "Run one discovery strategy");
    disc->add_option("--data", data, "Dataset csv")->required()->check(CLI::ExistingFile);
    disc->add_option("--method", method, "Strategy")
        ->required()
        ->check(CLI::IsMember({"vec", "avg", "pca", "s2v", "s2v2"}));
    add_ci_flags(disc, ci);
    disc->add_option("--tau-max", tau_max, "Maximum lag for time series")->check(CLI::NonNegativeNumber);
    disc->add_flag("--no-contemporaneous", no_contemp, "Forbid lag-0 links");
    disc->add_option("--threads", threads, "Workers per PC depth");
    disc->add_option("--out", out, "Output directory")->required();

    auto* ad = app.add_subcommand("adag", "Consistency-guided aggregation");
    ad->add_option("--data", data, "Dataset csv")->required()->check(CLI::ExistingFile);
    ad->add_option("--score", score, "Score to reach")
        ->check(CLI::IsMember({"cind", "cdep", "ac"}))
        ->capture_default_str();
    ad->add_option("--target", target, "Score threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    ad->add_option("--map", map_kind, "Aggregation map")
        ->check(CLI::IsMember({"pca", "wavg"}))
        ->capture_default_str();
    add_ci_flags(ad, ci);
    ad->add_option("--tau-max", tau_max, "Maximum lag for time series")->check(CLI::NonNegativeNumber);
    ad->add_flag("--no-contemporaneous", no_contemp, "Forbid lag-0 links");
    ad->add_flag("--augment", augment, "Complete the causal inputs of the independence score");
    ad->add_flag("--complete-dep", complete_dep, "Use the complete dependence score");
    ad->add_option("--threads", threads, "Workers per PC depth");
    ad->add_option("--out", out, "Output directory")->required();

    auto* sc = app.add_subcommand("scores", "Consistency scores of an aggregate result");
    sc->add_option("--data", data, "Vector dataset csv")->required()->check(CLI::ExistingFile);
    sc->add_option("--agg-result", agg_dir, "Directory written by discover")
        ->required()
        ->check(CLI::ExistingDirectory);
    sc->add_option("--map", map_path, "Aggregation map (json)")->required()->check(CLI::ExistingFile);
    add_ci_flags(sc, ci);
    sc->add_option("--tau-max", tau_max, "Maximum lag for time series")->check(CLI::NonNegativeNumber);
    sc->add_flag("--augment", augment, "Complete the causal inputs of the independence score");
    sc->add_flag("--complete-dep", complete_dep, "Use the complete dependence score");

    auto* be = app.add_subcommand("bench", "Run a benchmark experiment");
    be->add_option("--config", config, "Experiment config (json)")->required()->check(CLI::ExistingFile);
    be->add_option("--out", out, "Output directory")->required();
    be->add_option("--threads", threads, "Repetitions in parallel (0: default)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return cmd_simulate(spec, out);
        if (*disc) return cmd_discover(data, method, ci, tau_max, no_contemp, threads, out);
        if (*ad) {
            return cmd_adag(data, score, target, map_kind, ci, tau_max, no_contemp, augment,
                            complete_dep, threads, out);
        }
        if (*sc) return cmd_scores(data, agg_dir, map_path, ci, tau_max, augment, complete_dep);
        if (*be) return cmd_bench(config, out, be->count("--threads") ? threads : 0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
