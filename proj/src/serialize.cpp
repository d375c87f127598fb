#include "vectorcd/serialize.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vcd {

using nlohmann::json;

namespace {

json number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double number_of(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

json statement_json(const Statement& s) {
    return {{"i", s.i}, {"j", s.j}, {"cond", s.cond}, {"p_aggregate", number(s.p_aggregate)},
            {"p_vector", number(s.p_vector)}, {"consistent", s.consistent}, {"source", s.source}};
}

Statement statement_of(const json& j) {
    Statement s;
    s.i = j.at("i").get<int>();
    s.j = j.at("j").get<int>();
    s.cond = j.at("cond").get<std::vector<int>>();
    s.p_aggregate = number_of(j.at("p_aggregate"));
    s.p_vector = number_of(j.at("p_vector"));
    s.consistent = j.at("consistent").get<bool>();
    s.source = j.value("source", "");
    return s;
}

json part_json(const ScorePart& p) {
    json c = json::array(), i = json::array();
    for (const auto& s : p.consistent) c.push_back(statement_json(s));
    for (const auto& s : p.inconsistent) i.push_back(statement_json(s));
    return {{"score", p.score}, {"consistent", c}, {"inconsistent", i}};
}

ScorePart part_of(const json& j) {
    ScorePart p;
    p.score = j.at("score").get<double>();
    for (const auto& s : j.at("consistent")) p.consistent.push_back(statement_of(s));
    for (const auto& s : j.at("inconsistent")) p.inconsistent.push_back(statement_of(s));
    return p;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_of(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) {
            throw std::invalid_argument("matrix rows differ in length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json vector_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_of(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string(what) + ": " + e.what());
    }
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string record_to_json(const TestRecord& r) {
    json j = {{"i", r.i},
              {"j", r.j},
              {"cond", r.cond},
              {"p_value", number(r.p_value)},
              {"statistic", number(r.statistic)},
              {"independent", r.decided_independent},
              {"level", r.level},
              {"test", to_string(r.test)},
              {"ridge", r.ridge},
              {"saturated", r.saturated},
              {"degenerate", r.degenerate},
              {"excluded", r.excluded}};
    return j.dump();
}

TestRecord record_from_json(const std::string& line) {
    json j = parse(line, "test record");
    TestRecord r;
    r.i = j.at("i").get<int>();
    r.j = j.at("j").get<int>();
    r.cond = j.at("cond").get<std::vector<int>>();
    r.p_value = number_of(j.at("p_value"));
    r.statistic = number_of(j.at("statistic"));
    r.decided_independent = j.at("independent").get<bool>();
    r.level = j.at("level").get<double>();
    r.test = parse_test_kind(j.at("test").get<std::string>());
    r.ridge = j.value("ridge", false);
    r.saturated = j.value("saturated", false);
    r.degenerate = j.value("degenerate", false);
    r.excluded = j.value("excluded", 0);
    return r;
}

std::string log_to_jsonl(const std::vector<TestRecord>& log) {
    std::string out;
    for (const auto& r : log) out += record_to_json(r) + "\n";
    return out;
}

std::vector<TestRecord> log_from_jsonl(const std::string& text) {
    std::vector<TestRecord> log;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        log.push_back(record_from_json(line));
    }
    return log;
}

std::string report_to_json(const ConsistencyReport& r) {
    json j = {{"c_ind", r.c_ind},
              {"c_dep", r.c_dep},
              {"ac", r.ac},
              {"dep_strategy", r.dep_strategy},
              {"independence", part_json(r.ind)},
              {"dependence", part_json(r.dep)}};
    return j.dump(2) + "\n";
}

ConsistencyReport report_from_json(const std::string& text) {
    json j = parse(text, "report");
    ConsistencyReport r;
    r.c_ind = j.at("c_ind").get<double>();
    r.c_dep = j.at("c_dep").get<double>();
    r.ac = j.at("ac").get<double>();
    r.dep_strategy = j.value("dep_strategy", "effective");
    r.ind = part_of(j.at("independence"));
    r.dep = part_of(j.at("dependence"));
    return r;
}

std::string map_to_json(const TunableAggregationMap& map) {
    json j = {{"kind", to_string(map.kind)},
              {"block_sizes", map.input.macro_sizes()},
              {"m", map.m}};
    json blocks = json::array();
    for (int i = 0; i < map.input.n_macro(); ++i) {
        json b;
        if (map.kind == MapKind::weighted_average) {
            b["weights"] = matrix_json(map.weights.at(i));
        } else if (map.fitted()) {
            b["basis"] = matrix_json(map.basis.at(i));
            if (i < static_cast<int>(map.means.size())) b["mean"] = vector_json(map.means[i]);
            if (i < static_cast<int>(map.eigenvalues.size())) {
                b["eigenvalues"] = vector_json(map.eigenvalues[i]);
            }
        }
        blocks.push_back(b);
    }
    j["blocks"] = blocks;
    return j.dump(2) + "\n";
}

TunableAggregationMap map_from_json(const std::string& text) {
    json j = parse(text, "aggregation map");
    TunableAggregationMap map;
    map.kind = parse_map_kind(j.at("kind").get<std::string>());
    map.input = Partition(j.at("block_sizes").get<std::vector<int>>());
    map.m = j.at("m").get<std::vector<int>>();
    const json& blocks = j.at("blocks");
    if (static_cast<int>(blocks.size()) != map.input.n_macro()) {
        throw std::invalid_argument("aggregation map: one entry per block required");
    }
    for (const auto& b : blocks) {
        if (map.kind == MapKind::weighted_average) {
            map.weights.push_back(matrix_of(b.at("weights")));
        } else if (b.contains("basis")) {
            map.basis.push_back(matrix_of(b.at("basis")));
            const auto d = map.basis.back().rows();
            map.means.push_back(b.contains("mean") ? vector_of(b.at("mean"))
                                                   : Eigen::VectorXd::Zero(d));
            if (b.contains("eigenvalues")) map.eigenvalues.push_back(vector_of(b.at("eigenvalues")));
        }
    }
    map.validate();
    return map;
}

std::string discovery_to_json(const DiscoveryResult& r) {
    json seps = json::array();
    for (const auto& [key, s] : r.sepsets) seps.push_back({{"i", key.first}, {"j", key.second}, {"set", s}});
    json j = {{"nodes", r.graph.n_nodes()}, {"graph", r.graph.to_text()}, {"sepsets", seps}};
    return j.dump(2) + "\n";
}

DiscoveryResult discovery_from_json(const std::string& text) {
    json j = parse(text, "discovery result");
    DiscoveryResult r;
    r.graph = MixedGraph::from_text(j.at("graph").get<std::string>());
    for (const auto& s : j.at("sepsets")) {
        int a = s.at("i").get<int>(), b = s.at("j").get<int>();
        r.sepsets[{std::min(a, b), std::max(a, b)}] = s.at("set").get<std::vector<int>>();
    }
    return r;
}

void write_discovery(const std::string& dir, const DiscoveryResult& r) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path d(dir);
    write_text_file((d / "graph.txt").string(), r.graph.to_text());
    write_text_file((d / "result.json").string(), discovery_to_json(r));
    write_text_file((d / "log.jsonl").string(), log_to_jsonl(r.log));
}

DiscoveryResult read_discovery(const std::string& dir) {
    const std::filesystem::path d(dir);
    DiscoveryResult r = discovery_from_json(read_text_file((d / "result.json").string()));
    const auto log_path = d / "log.jsonl";
    if (std::filesystem::exists(log_path)) r.log = log_from_jsonl(read_text_file(log_path.string()));
    return r;
}

namespace {

VectorScmSpec scm_of(const json& j) {
    VectorScmSpec s;
    s.d_macro = j.value("d_macro", s.d_macro);
    s.d_micro = j.value("d_micro", s.d_micro);
    s.ext_density = j.value("ext_density", s.ext_density);
    s.int_density = j.value("int_density", s.int_density);
    s.coef_low = j.value("coef_low", s.coef_low);
    s.coef_high = j.value("coef_high", s.coef_high);
    if (j.contains("internal_kind")) {
        s.internal_kind = parse_internal_kind(j.at("internal_kind").get<std::string>());
    }
    s.pc_weight = j.value("pc_weight", s.pc_weight);
    s.tau_max = j.value("tau_max", s.tau_max);
    s.n = j.value("n", s.n);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
}

SavarSpec savar_of(const json& j) {
    SavarSpec s = SavarSpec::three_mode_chain();
    s.d_macro = j.value("d_macro", s.d_macro);
    s.d_micro = j.value("d_micro", s.d_micro);
    s.bump_width = j.value("bump_width", s.bump_width);
    s.noise_width = j.value("noise_width", s.noise_width);
    s.noise_scale = j.value("noise_scale", s.noise_scale);
    s.n = j.value("n", s.n);
    s.seed = j.value("seed", s.seed);
    if (j.contains("links")) {
        s.links.clear();
        for (const auto& l : j.at("links")) {
            s.links.push_back({l.at("from").get<int>(), l.at("to").get<int>(), l.value("lag", 1),
                               l.at("coef").get<double>()});
        }
    }
    s.validate();
    return s;
}

}  // namespace

VectorScmSpec scm_spec_from_json(const std::string& text) {
    return scm_of(parse(text, "generator spec"));
}

std::string scm_spec_to_json(const VectorScmSpec& s) {
    json j = {{"generator", "vector_scm"},
              {"d_macro", s.d_macro},
              {"d_micro", s.d_micro},
              {"ext_density", s.ext_density},
              {"int_density", s.int_density},
              {"coef_low", s.coef_low},
              {"coef_high", s.coef_high},
              {"internal_kind", to_string(s.internal_kind)},
              {"pc_weight", s.pc_weight},
              {"tau_max", s.tau_max},
              {"n", s.n},
              {"seed", s.seed}};
    return j.dump(2) + "\n";
}

SavarSpec savar_spec_from_json(const std::string& text) {
    return savar_of(parse(text, "savar spec"));
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json j = parse(text, "experiment config");
    ExperimentConfig cfg;
    const std::string gen = j.value("generator", std::string("vector_scm"));
    const json spec = j.value("spec", json::object());
    if (gen == "vector_scm") {
        cfg.generator = GeneratorKind::vector_scm;
        cfg.scm = scm_of(spec);
    } else if (gen == "savar") {
        cfg.generator = GeneratorKind::savar;
        cfg.savar = savar_of(spec);
    } else {
        throw std::invalid_argument("unknown generator: " + gen);
    }
    for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    if (j.contains("ci")) {
        const json& ci = j.at("ci");
        cfg.ci.alpha = ci.value("alpha", cfg.ci.alpha);
        if (ci.contains("test")) cfg.ci.test_kind = parse_test_kind(ci.at("test").get<std::string>());
        cfg.ci.bootstrap_reps = ci.value("bootstrap_reps", cfg.ci.bootstrap_reps);
        cfg.ci.rng_seed = ci.value("seed", cfg.ci.rng_seed);
    }
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    cfg.seed_base = j.value("seed_base", cfg.seed_base);
    cfg.contemporaneous = j.value("contemporaneous", cfg.contemporaneous);
    cfg.scores = j.value("scores", cfg.scores);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.output = j.value("output", cfg.output);
    cfg.validate();
    return cfg;
}

}  // namespace vcd
