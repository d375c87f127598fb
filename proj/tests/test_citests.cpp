#include "test_support.hpp"

#include "vectorcd/ci_tester.hpp"
#include "vectorcd/citest.hpp"
#include "vectorcd/dataset.hpp"
#include "vectorcd/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vcd;

namespace {

Eigen::MatrixXd gaussian(int n, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd m(n, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < n; ++r) m(r, c) = nd(rng);
    }
    return m;
}

CiConfig config(double alpha, TestKind kind = TestKind::gcm, std::uint64_t seed = 0) {
    CiConfig cfg;
    cfg.alpha = alpha;
    cfg.test_kind = kind;
    cfg.rng_seed = seed;
    return cfg;
}

// Two-sided band of +-2 binomial standard errors around p.
bool within_two_se(double rate, double p, int trials) {
    const double se = std::sqrt(p * (1.0 - p) / trials);
    return std::abs(rate - p) <= 2.0 * se;
}

}  // namespace

TEST_CASE("config validation and kind names") {
    CHECK_NOTHROW(config(0.05).validate());
    CHECK_THROWS(config(0.0).validate());
    CHECK_THROWS(config(1.0).validate());
    CiConfig few = config(0.05);
    few.bootstrap_reps = 99;
    CHECK_THROWS(few.validate());
    for (auto k : {TestKind::parcorr, TestKind::maxcorr, TestKind::gcm, TestKind::oracle}) {
        CHECK(parse_test_kind(to_string(k)) == k);
    }
    CHECK_THROWS(parse_test_kind("hsic"));
}

TEST_CASE("record decision follows the level") {
    TestRecord r;
    r.p_value = 0.02;
    r.decide(0.05);
    CHECK_FALSE(r.decided_independent);
    r.decide(0.01);
    CHECK(r.decided_independent);
    CHECK(r.level == 0.01);
    r.p_value = 0.01;
    r.decide(0.01);
    CHECK_FALSE(r.decided_independent);
}

TEST_CASE("residualize") {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd z = gaussian(60, 1, rng);
    Eigen::MatrixXd y = 2.0 * z;
    CHECK(residualize(y, z).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXd y3 = gaussian(50, 3, rng);
    Eigen::MatrixXd empty(50, 0);
    Eigen::MatrixXd centered = y3.rowwise() - y3.colwise().mean();
    CHECK((residualize(y3, empty) - centered).cwiseAbs().maxCoeff() < 1e-14);

    Eigen::MatrixXd z2 = gaussian(50, 2, rng);
    Eigen::MatrixXd r = residualize(y3, z2);
    Eigen::MatrixXd zc = z2.rowwise() - z2.colwise().mean();
    CHECK((zc.transpose() * r).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);

    // duplicated regressor takes the ridge path
    Eigen::MatrixXd zdup(50, 2);
    zdup << z2.col(0), z2.col(0);
    auto res = residualize_ex(y3, zdup);
    CHECK(res.ridge);
    Eigen::MatrixXd single(50, 1);
    single << z2.col(0);
    CHECK((res.r - residualize(y3, single)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_THROWS(residualize(y3, gaussian(49, 1, rng)));
}

TEST_CASE("partial correlation statistic") {
    std::mt19937_64 rng(2);
    Eigen::MatrixXd d = gaussian(200, 3, rng);
    Eigen::VectorXd x = d.col(0) + 0.3 * d.col(2);
    Eigen::VectorXd y = d.col(1) + 0.3 * d.col(2) + 0.2 * d.col(0);
    Eigen::MatrixXd z = d.col(2);
    TestRecord rec = fisher_z_parcorr(x, y, z, config(0.05));
    Eigen::MatrixXd rx = residualize(x, z), ry = residualize(y, z);
    const double r = rx.col(0).dot(ry.col(0)) / (rx.norm() * ry.norm());
    const double stat = std::sqrt(200.0 - 1.0 - 3.0) * std::abs(std::atanh(r));
    CHECK(rec.statistic == doctest::Approx(stat).epsilon(1e-12));
    CHECK(rec.p_value == doctest::Approx(std::erfc(stat / std::sqrt(2.0))).epsilon(1e-12));
    CHECK(rec.test == TestKind::parcorr);

    TestRecord same = fisher_z_parcorr(x, x, Eigen::MatrixXd(200, 0), config(0.05));
    CHECK(same.p_value == 0.0);
    CHECK(same.saturated);
    CHECK_FALSE(same.decided_independent);

    CHECK_THROWS(fisher_z_parcorr(x.head(4), y.head(4), z.topRows(4), config(0.05)));
}

TEST_CASE("normal tail") {
    CHECK(normal_two_sided_p(0.0) == doctest::Approx(1.0));
    CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(normal_two_sided_p(-2.5758293035489) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("partial correlation is calibrated") {
    const int seeds = 1000;
    const double alpha = 0.05;
    int reject_null = 0, keep_conditional = 0;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(1000 + s);
        Eigen::MatrixXd d = gaussian(10000, 3, rng);
        if (!fisher_z_parcorr(d.col(0), d.col(1), Eigen::MatrixXd(10000, 0), config(alpha))
                 .decided_independent) {
            ++reject_null;
        }
        Eigen::VectorXd x = d.col(2) + d.col(0);
        Eigen::VectorXd y = d.col(2) + d.col(1);
        if (fisher_z_parcorr(x, y, d.col(2), config(alpha)).decided_independent) ++keep_conditional;
    }
    CHECK(within_two_se(reject_null / double(seeds), alpha, seeds));
    CHECK(within_two_se(keep_conditional / double(seeds), 1.0 - alpha, seeds));
}

TEST_CASE("max-corr reduces to partial correlation for scalar blocks") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::MatrixXd d = gaussian(80, 4, rng);
        Eigen::VectorXd x = d.col(0) + 0.2 * d.col(2);
        Eigen::VectorXd y = d.col(1) + 0.1 * (rep % 5) * d.col(0);
        Eigen::MatrixXd z = d.rightCols(2);
        auto a = max_corr_test(x, y, z, config(0.05, TestKind::maxcorr));
        auto b = fisher_z_parcorr(x, y, z, config(0.05));
        CHECK(a.decided_independent == b.decided_independent);
        CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-12));
    }
}

TEST_CASE("max-corr Bonferroni bound") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd x = gaussian(100, 3, rng), y = gaussian(100, 2, rng), z = gaussian(100, 2, rng);
        y.col(1) += 0.2 * x.col(0);
        auto rec = max_corr_test(x, y, z, config(0.05, TestKind::maxcorr));
        Eigen::MatrixXd rx = residualize(x, z), ry = residualize(y, z);
        double min_p = 1.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 2; ++b) {
                auto pr = fisher_z_parcorr(x.col(a), y.col(b), z, config(0.05));
                min_p = std::min(min_p, pr.p_value);
            }
        }
        CHECK(rec.p_value >= min_p);
        CHECK(rec.p_value == doctest::Approx(std::min(1.0, 6.0 * min_p)).epsilon(1e-12));
    }
}

TEST_CASE("gcm statistic for scalar blocks is the normalised residual covariance") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd d = gaussian(300, 3, rng);
    Eigen::MatrixXd x = d.col(0), y = d.col(1) + 0.1 * d.col(0), z = d.col(2);
    auto rec = gcm_test(x, y, z, config(0.05));
    Eigen::VectorXd prod = residualize(x, z).col(0).cwiseProduct(residualize(y, z).col(0));
    const double mean = prod.mean();
    const double sd = std::sqrt((prod.array() - mean).square().mean());
    CHECK(rec.statistic == doctest::Approx(std::sqrt(300.0) * std::abs(mean) / sd).epsilon(1e-12));
    CHECK(rec.p_value > 0.0);
    CHECK(rec.p_value <= 1.0);
}

TEST_CASE("gcm is seed deterministic") {
    std::mt19937_64 rng(6);
    Eigen::MatrixXd x = gaussian(200, 2, rng), y = gaussian(200, 3, rng), z = gaussian(200, 2, rng);
    auto a = gcm_test(x, y, z, config(0.05, TestKind::gcm, 9), 4);
    auto b = gcm_test(x, y, z, config(0.05, TestKind::gcm, 9), 4);
    CHECK(a.p_value == b.p_value);
    CHECK(a.statistic == b.statistic);
    auto c = gcm_test(x, y, z, config(0.05, TestKind::gcm, 10), 4);
    CHECK(c.statistic == a.statistic);
}

TEST_CASE("gcm drops constant products") {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd x = gaussian(100, 2, rng), y = gaussian(100, 1, rng);
    x.col(1).setConstant(3.0);
    auto rec = gcm_test(x, y, Eigen::MatrixXd(100, 0), config(0.05));
    CHECK(rec.excluded == 1);
    Eigen::MatrixXd c(100, 1);
    c.setConstant(1.0);
    auto none = gcm_test(c, y, Eigen::MatrixXd(100, 0), config(0.05));
    CHECK(none.degenerate);
    CHECK(none.p_value == 1.0);
    CHECK(none.decided_independent);
}

TEST_CASE("multivariate tests on the confounder generator") {
    const int seeds = 150;
    const double alpha = 0.05;
    int maxcorr_null = 0, gcm_null = 0, maxcorr_alt = 0, gcm_alt = 0;
    for (int s = 0; s < seeds; ++s) {
        Dataset null = gen_confounder_xyz(5, 20, 0.0, "high", "high", 1000, 5000 + s);
        Dataset alt = gen_confounder_xyz(5, 20, 0.5, "high", "high", 1000, 9000 + s);
        const std::vector<int> z{2};
        if (!ci_dispatch(null, 0, 1, z, config(alpha, TestKind::maxcorr)).decided_independent) ++maxcorr_null;
        if (!ci_dispatch(null, 0, 1, z, config(alpha, TestKind::gcm, s)).decided_independent) ++gcm_null;
        if (!ci_dispatch(alt, 0, 1, z, config(alpha, TestKind::maxcorr)).decided_independent) ++maxcorr_alt;
        if (!ci_dispatch(alt, 0, 1, z, config(alpha, TestKind::gcm, s)).decided_independent) ++gcm_alt;
    }
    CHECK(maxcorr_null / double(seeds) <= 0.07);
    CHECK(gcm_null / double(seeds) >= 0.01);
    CHECK(gcm_null / double(seeds) <= 0.12);
    CHECK(maxcorr_alt / double(seeds) >= 0.95);
    CHECK(gcm_alt / double(seeds) >= 0.9);
}

TEST_CASE("dispatch picks the test from block widths") {
    std::mt19937_64 rng(8);
    Dataset uni(gaussian(100, 3, rng), Partition::singletons(3));
    CHECK(ci_dispatch(uni, 0, 1, {2}, config(0.05, TestKind::gcm)).test == TestKind::parcorr);
    Dataset vec(gaussian(100, 5, rng), Partition({2, 1, 2}));
    auto rec = ci_dispatch(vec, 0, 2, {1}, config(0.05, TestKind::gcm));
    CHECK(rec.test == TestKind::gcm);
    CHECK(rec.i == 0);
    CHECK(rec.j == 2);
    CHECK(rec.cond == std::vector<int>{1});
    CHECK(ci_dispatch(vec, 0, 2, {1}, config(0.05, TestKind::maxcorr)).test == TestKind::maxcorr);
    CHECK_THROWS(ci_dispatch(vec, 0, 2, {1}, config(0.05, TestKind::parcorr)));
    CHECK_THROWS(ci_dispatch(vec, 0, 0, {}, config(0.05)));
    CHECK_THROWS(ci_dispatch(vec, 0, 2, {2}, config(0.05)));

    // a record replays to the same p-value
    auto again = ci_dispatch(vec, rec.i, rec.j, rec.cond, config(0.05, TestKind::gcm));
    CHECK(again.p_value == rec.p_value);
    // and does not depend on the order of the conditioning set
    Dataset four(gaussian(100, 6, rng), Partition({2, 1, 2, 1}));
    CHECK(ci_dispatch(four, 0, 2, {1, 3}, config(0.05)).p_value ==
          ci_dispatch(four, 2, 0, {3, 1}, config(0.05)).p_value);
}

TEST_CASE("oracles") {
    MixedGraph g(3);
    g.add_directed(0, 1);
    g.add_directed(1, 2);
    SeparationOracle o(g, 0.01);
    CHECK(o.n_variables() == 3);
    CHECK(o.test(0, 2, {1}).decided_independent);
    CHECK_FALSE(o.test(0, 2, {}).decided_independent);
    CHECK(o.test(0, 2, {}).test == TestKind::oracle);
    CHECK_THROWS(o.test(0, 1, {1}));

    SeparationOracle blocks(vcd::testing::latent_confounding_micro(),
                            vcd::testing::latent_confounding_partition());
    CHECK(blocks.test(0, 2, {1}).decided_independent);
    CHECK_FALSE(blocks.test(0, 2, {}).decided_independent);

    // X -> Y -> Z with unit coefficients and unit noises
    Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
    b(1, 0) = 1.0;
    b(2, 1) = 1.0;
    Eigen::Matrix3d a = (Eigen::Matrix3d::Identity() - b).inverse();
    Eigen::MatrixXd cov = a * a.transpose();
    GaussianOracle go(cov, Partition::singletons(3));
    CHECK(go.test(0, 2, {1}).decided_independent);
    CHECK_FALSE(go.test(0, 2, {}).decided_independent);
    CHECK_FALSE(go.test(0, 1, {2}).decided_independent);
    CHECK_THROWS(GaussianOracle(cov, Partition({2, 2})));
}

TEST_CASE("data tester forwards to dispatch") {
    std::mt19937_64 rng(9);
    Dataset ds(gaussian(100, 3, rng), Partition::singletons(3));
    DataCiTester t(ds, config(0.05));
    CHECK(t.n_variables() == 3);
    CHECK(t.alpha() == 0.05);
    CHECK(t.test(0, 1, {2}).p_value == ci_dispatch(ds, 0, 1, {2}, config(0.05)).p_value);
    CHECK_THROWS(DataCiTester(ds, config(2.0)));
}
