#include "vectorcd/aggregation.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace vcd {

namespace {

TunableAggregationMap make_map(const Dataset& vec_data, const std::vector<int>& m,
                               const AdagOptions& opt) {
    if (opt.map_kind == MapKind::weighted_average) return weighted_average_map(vec_data.partition, m);
    if (opt.population_cov) return fit_pca_covariance(*opt.population_cov, vec_data.partition, m);
    return fit_pca(vec_data, m);
}

ScorePart dep_part(const CiTester& x, const CiTester& z, const DiscoveryResult& agg,
                   const AdagOptions& opt) {
    if (opt.complete_dep) {
        return meta_c_dep_score(x, z, agg, DepStrategy::connection, CondStrategy::all,
                                SortStrategy::none);
    }
    return effective_c_dep_score(x, agg);
}

}  // namespace

AdagResult adag(const Dataset& vec_data, const CiTester& x_tester, const ZTesterFactory& make_z,
                const AdagOptions& opt) {
    if (!(opt.alpha_q >= 0.0 && opt.alpha_q <= 1.0)) {
        throw std::invalid_argument("adag: alpha_q must lie in [0, 1]");
    }
    if (opt.tau_max < 0) throw std::invalid_argument("adag: negative tau_max");
    if (opt.population_cov && opt.tau_max > 0) {
        throw std::invalid_argument("adag: population covariance only for static data");
    }
    if (opt.complete_dep && opt.tau_max > 0) {
        throw std::invalid_argument("adag: complete dependence strategy only for static data");
    }
    const Partition& p = vec_data.partition;
    const int expected = p.n_macro() * (opt.tau_max + 1);
    if (x_tester.n_variables() != expected) {
        throw std::invalid_argument("adag: vector tester does not match the data");
    }

    AdagResult out;
    std::vector<int> m(p.n_macro(), 1);
    for (int iteration = 0;; ++iteration) {
        TunableAggregationMap map = make_map(vec_data, m, opt);
        Dataset z;
        if (opt.population_cov) {
            int cols = 0;
            for (int v : m) cols += v;
            z = Dataset(Eigen::MatrixXd(0, cols), map.output_partition(), vec_data.names);
        } else {
            z = apply_map(map, vec_data);
        }
        PcOptions pc = opt.pc;
        if (opt.tau_max > 0) {
            LaggedDataset lagged = lag_expand(z, opt.tau_max);
            pc.lag = lagged.lag;
            z = std::move(lagged.data);
        }
        std::unique_ptr<CiTester> z_tester = make_z(z, map);
        DiscoveryResult agg = opt.algo ? opt.algo(*z_tester, pc) : pc_stable(*z_tester, pc);

        ConsistencyReport report;
        bool have_ind = false, have_dep = false;
        double score = 0.0;
        if (opt.q == ScoreKind::c_ind || opt.q == ScoreKind::ac) {
            report.ind = c_ind_score(x_tester, agg, z_tester.get(), opt.augment, pc);
            have_ind = true;
        }
        if (opt.q == ScoreKind::c_dep_eff || opt.q == ScoreKind::ac) {
            report.dep = dep_part(x_tester, *z_tester, agg, opt);
            have_dep = true;
        }
        if (opt.q == ScoreKind::c_ind) score = report.ind.score;
        else if (opt.q == ScoreKind::c_dep_eff) score = report.dep.score;
        else score = ac_score(report.ind.score, report.dep.score);

        out.trace.push_back({iteration, m, score, agg.graph.n_edges()});
        const bool done = score >= opt.alpha_q || map.is_maximal();
        if (done) {
            if (!have_ind) report.ind = c_ind_score(x_tester, agg, z_tester.get(), opt.augment, pc);
            if (!have_dep) report.dep = dep_part(x_tester, *z_tester, agg, opt);
            report.c_ind = report.ind.score;
            report.c_dep = report.dep.score;
            report.ac = ac_score(report.c_ind, report.c_dep);
            report.dep_strategy = opt.complete_dep ? "complete" : "effective";
            out.graph = agg.graph;
            out.report = std::move(report);
            out.m = m;
            out.aggregate = std::move(agg);
            out.map = std::move(map);
            return out;
        }
        for (int i = 0; i < p.n_macro(); ++i) m[i] = std::min(m[i] + 1, p.size(i));
    }
}

AdagResult adag(const Dataset& vec_data, const CiConfig& cfg, const AdagOptions& opt) {
    cfg.validate();
    ZTesterFactory make_z = [cfg](const Dataset& z, const TunableAggregationMap&) {
        return std::make_unique<DataCiTester>(z, cfg);
    };
    if (opt.tau_max > 0) {
        DataCiTester x(lag_expand(vec_data, opt.tau_max).data, cfg);
        return adag(vec_data, x, make_z, opt);
    }
    DataCiTester x(vec_data, cfg);
    return adag(vec_data, x, make_z, opt);
}

AdagResult adag(const Dataset& vec_data, const CiConfig& cfg, MapKind map_kind, ScoreKind q,
                double alpha_q) {
    AdagOptions opt;
    opt.map_kind = map_kind;
    opt.q = q;
    opt.alpha_q = alpha_q;
    return adag(vec_data, cfg, opt);
}

std::string trace_csv(const std::vector<AdagTraceRow>& trace) {
    std::ostringstream os;
    os << "iteration,m,score,edges\n";
    for (const auto& row : trace) {
        os << row.iteration << ',';
        for (std::size_t k = 0; k < row.m.size(); ++k) os << (k ? ";" : "") << row.m[k];
        os << ',' << format_double(row.score) << ',' << row.edges << '\n';
    }
    return os.str();
}

}  // namespace vcd
