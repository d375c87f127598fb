#include "vectorcd/ci_tester.hpp"

#include "vectorcd/graph_algorithms.hpp"

#include <cmath>
#include <stdexcept>

namespace vcd {

namespace {

TestRecord oracle_record(int i, int j, const std::vector<int>& cond, bool independent,
                         double alpha) {
    TestRecord rec;
    rec.i = i;
    rec.j = j;
    rec.cond = cond;
    rec.test = TestKind::oracle;
    rec.p_value = independent ? 1.0 : 0.0;
    rec.statistic = independent ? 0.0 : 1.0;
    rec.decide(alpha);
    return rec;
}

void check_query(int n, int i, int j, const std::vector<int>& cond) {
    auto valid = [&](int v) { return v >= 0 && v < n; };
    if (!valid(i) || !valid(j) || i == j) throw std::invalid_argument("CI query: bad pair");
    for (int c : cond) {
        if (!valid(c) || c == i || c == j) {
            throw std::invalid_argument("CI query: conditioning set must exclude the pair");
        }
    }
}

}  // namespace

DataCiTester::DataCiTester(Dataset ds, CiConfig cfg) : ds_(std::move(ds)), cfg_(cfg) {
    cfg_.validate();
}

TestRecord DataCiTester::test(int i, int j, const std::vector<int>& cond) const {
    return ci_dispatch(ds_, i, j, cond, cfg_);
}

SeparationOracle::SeparationOracle(MixedGraph g, double alpha)
    : SeparationOracle(g, Partition::singletons(g.n_nodes()), alpha) {}

SeparationOracle::SeparationOracle(MixedGraph g, Partition blocks, double alpha)
    : g_(std::move(g)), blocks_(std::move(blocks)), alpha_(alpha) {
    if (blocks_.n_micro() != g_.n_nodes()) {
        throw std::invalid_argument("SeparationOracle: partition does not cover the graph");
    }
}

TestRecord SeparationOracle::test(int i, int j, const std::vector<int>& cond) const {
    check_query(n_variables(), i, j, cond);
    bool sep = m_separated(g_, blocks_.columns(i), blocks_.columns(j), blocks_.columns(cond));
    return oracle_record(i, j, cond, sep, alpha_);
}

GaussianOracle::GaussianOracle(Eigen::MatrixXd cov, Partition blocks, double alpha,
                               double tolerance)
    : cov_(std::move(cov)), blocks_(std::move(blocks)), alpha_(alpha), tol_(tolerance) {
    if (cov_.rows() != cov_.cols() || cov_.rows() != blocks_.n_micro()) {
        throw std::invalid_argument("GaussianOracle: covariance does not match partition");
    }
}

TestRecord GaussianOracle::test(int i, int j, const std::vector<int>& cond) const {
    check_query(n_variables(), i, j, cond);
    auto a = blocks_.columns(i);
    auto b = blocks_.columns(j);
    auto c = blocks_.columns(cond);
    auto sub = [&](const std::vector<int>& r, const std::vector<int>& s) {
        Eigen::MatrixXd m(r.size(), s.size());
        for (std::size_t x = 0; x < r.size(); ++x) {
            for (std::size_t y = 0; y < s.size(); ++y) m(x, y) = cov_(r[x], s[y]);
        }
        return m;
    };
    Eigen::MatrixXd ab = sub(a, b);
    if (!c.empty()) {
        Eigen::MatrixXd cc = sub(c, c);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(cc);
        cod.setThreshold(1e-12);
        ab -= sub(a, c) * cod.solve(sub(c, b));
    }
    double scale = std::sqrt(sub(a, a).diagonal().maxCoeff() * sub(b, b).diagonal().maxCoeff());
    bool independent = ab.cwiseAbs().maxCoeff() <= tol_ * std::max(scale, 1e-300);
    return oracle_record(i, j, cond, independent, alpha_);
}

}  // namespace vcd
