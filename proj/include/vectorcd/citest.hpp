#pragma once

#include "vectorcd/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace vcd {

enum class TestKind { parcorr, maxcorr, gcm, oracle };

std::string to_string(TestKind k);
TestKind parse_test_kind(const std::string& s);

struct CiConfig {
    double alpha = 0.01;
    TestKind test_kind = TestKind::gcm;
    int bootstrap_reps = 499;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct TestRecord {
    int i = -1;
    int j = -1;
    std::vector<int> cond;
    double p_value = 1.0;
    double statistic = 0.0;
    bool decided_independent = true;
    double level = 0.01;
    TestKind test = TestKind::parcorr;
    // diagnostics
    bool ridge = false;       // rank-deficient conditioning block, ridge used
    bool saturated = false;   // |r| = 1
    bool degenerate = false;  // a residual vanished: x or y is a function of z
    int excluded = 0;         // GCM product columns dropped for zero variance

    void decide(double alpha) {
        level = alpha;
        decided_independent = p_value > alpha;
    }
};

struct Residuals {
    Eigen::MatrixXd r;
    bool ridge = false;
    std::vector<bool> degenerate;  // per column: residual is numerically zero
};

constexpr double kRidgePenalty = 1e-8;

Residuals residualize_ex(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z);
Eigen::MatrixXd residualize(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z);

double normal_two_sided_p(double z);

TestRecord fisher_z_parcorr(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& z, const CiConfig& cfg);
TestRecord max_corr_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                         const Eigen::MatrixXd& z, const CiConfig& cfg);
// `stream` is mixed into the bootstrap seed so that distinct queries draw
// distinct multipliers; ci_dispatch derives it from (pair, cond).
TestRecord gcm_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                    const CiConfig& cfg, std::uint64_t stream = 0);

std::uint64_t query_stream(int i, int j, const std::vector<int>& cond);

TestRecord ci_dispatch(const Dataset& ds, int i, int j, const std::vector<int>& cond,
                       const CiConfig& cfg);

}  // namespace vcd
