#pragma once

#include "vectorcd/citest.hpp"
#include "vectorcd/dataset.hpp"
#include "vectorcd/graph.hpp"
#include "vectorcd/partition.hpp"

#include <Eigen/Dense>

#include <vector>

namespace vcd {

// A conditional-independence backend over variables 0..n_variables()-1.
// Implementations must be safe to call concurrently.
class CiTester {
public:
    virtual ~CiTester() = default;
    virtual int n_variables() const = 0;
    virtual double alpha() const = 0;
    virtual TestRecord test(int i, int j, const std::vector<int>& cond) const = 0;
};

class DataCiTester : public CiTester {
public:
    DataCiTester(Dataset ds, CiConfig cfg);
    int n_variables() const override { return ds_.n_macro(); }
    double alpha() const override { return cfg_.alpha; }
    TestRecord test(int i, int j, const std::vector<int>& cond) const override;
    const Dataset& dataset() const { return ds_; }
    const CiConfig& config() const { return cfg_; }

private:
    Dataset ds_;
    CiConfig cfg_;
};

// m-separation in a known graph. Variable v maps to the node block v of
// `blocks` (singletons by default), so a micro graph can answer macro queries.
class SeparationOracle : public CiTester {
public:
    explicit SeparationOracle(MixedGraph g, double alpha = 0.01);
    SeparationOracle(MixedGraph g, Partition blocks, double alpha = 0.01);
    int n_variables() const override { return blocks_.n_macro(); }
    double alpha() const override { return alpha_; }
    TestRecord test(int i, int j, const std::vector<int>& cond) const override;

private:
    MixedGraph g_;
    Partition blocks_;
    double alpha_;
};

// Exact Gaussian conditional independence from a population covariance:
// blocks A, B are independent given C iff the partial cross-covariance
// S_AB - S_AC S_CC^+ S_CB vanishes.
class GaussianOracle : public CiTester {
public:
    GaussianOracle(Eigen::MatrixXd cov, Partition blocks, double alpha = 0.01,
                   double tolerance = 1e-9);
    int n_variables() const override { return blocks_.n_macro(); }
    double alpha() const override { return alpha_; }
    TestRecord test(int i, int j, const std::vector<int>& cond) const override;
    const Eigen::MatrixXd& covariance() const { return cov_; }

private:
    Eigen::MatrixXd cov_;
    Partition blocks_;
    double alpha_;
    double tol_;
};

}  // namespace vcd
