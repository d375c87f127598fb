#pragma once

#include "vectorcd/aggregation.hpp"
#include "vectorcd/dataset.hpp"
#include "vectorcd/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace vcd {

using Rng = std::mt19937_64;

enum class InternalKind { mrf, dag, latent, cyclic, deterministic };

std::string to_string(InternalKind k);
InternalKind parse_internal_kind(const std::string& s);

struct VectorScmSpec {
    int d_macro = 5;
    int d_micro = 5;
    double ext_density = 0.5;
    double int_density = 0.5;
    double coef_low = 0.0;   // c in [-0.5, 0]
    double coef_high = 0.5;
    InternalKind internal_kind = InternalKind::mrf;
    double pc_weight = 0.0;
    int tau_max = 0;
    int n = 500;
    std::uint64_t seed = 0;

    void validate() const;
};

constexpr double kCoefDeadZone = 0.05;

// Uniform on [low, high] with (-kCoefDeadZone, kCoefDeadZone) removed.
double draw_coefficient(Rng& rng, double low, double high);

// X_t = sum_tau b[tau] X_{t-tau} + e_t, e_t ~ N(0, noise_cov). b[0] holds the
// contemporaneous part and may be cyclic as long as I - b[0] is invertible.
struct LinearModel {
    std::vector<Eigen::MatrixXd> b;
    Eigen::MatrixXd noise_cov;

    int dim() const { return static_cast<int>(noise_cov.rows()); }
    int tau_max() const { return static_cast<int>(b.size()) - 1; }
    // Stationary covariance of the static model (tau_max == 0).
    Eigen::MatrixXd covariance() const;
    Eigen::MatrixXd sample(int n, Rng& rng, int burn_in = 100) const;
};

struct SimResult {
    Dataset data;
    MixedGraph truth;        // macro; a lag window graph when tau_max > 0
    MixedGraph micro_truth;  // micro; same layout as truth
    LinearModel model;
};

MixedGraph random_macro_dag(const VectorScmSpec& spec, Rng& rng);
MixedGraph random_macro_dag(const VectorScmSpec& spec);

// Window graph of a lagged model over (tau_max + 1) * dim nodes, node
// tau * dim + v standing for v at t - tau; only links into the present.
MixedGraph window_graph(const std::vector<Eigen::MatrixXd>& b, double tol = 0.0);

SimResult gen_vector_scm(const VectorScmSpec& spec);

// Example "Determinism": X = (eta, 2 eta), Y = 0.5 X_1 + 0.5 X_2 + eta_Y.
SimResult gen_determinism(int n, std::uint64_t seed);

struct Counterexample {
    SimResult sim;
    TunableAggregationMap map;  // the violating map
};

enum class CounterexampleKind { agg_faithfulness, agg_sufficiency };

Counterexample gen_counterexample(CounterexampleKind which, int n, std::uint64_t seed,
                                  double alpha = 0.7, double beta = 0.4);

// Confounded X <- Z -> Y with X -> Y of strength `coef`. `z_int` is "none",
// "low", "high" or a component count; `n_conf` is "low" or "high".
Dataset gen_confounder_xyz(int d_xy, int d_z, double coef, const std::string& z_int,
                           const std::string& n_conf, int n, std::uint64_t seed);

struct SavarLink {
    int from = 0;
    int to = 0;
    int lag = 1;
    double coef = 0.0;
};

struct SavarSpec {
    int d_macro = 3;
    int d_micro = 49;  // perfect square: each mode lives on a side x side grid
    std::vector<SavarLink> links;
    double bump_width = 0.3;  // Gaussian sd relative to the grid side
    double noise_width = 0.3;  // grid-noise correlation length relative to the side
    double noise_scale = 1.0;
    int n = 200;
    std::uint64_t seed = 0;

    int tau_max() const;
    void validate() const;
    // Three modes with lag-1 self links and a 0 -> 1 -> 2 chain.
    static SavarSpec three_mode_chain();
};

struct SavarResult {
    Dataset data;
    MixedGraph truth;        // window graph over (tau_max + 1) * d_macro nodes
    Eigen::MatrixXd weights;  // d_macro x (d_macro * d_micro), rows unit norm
    Eigen::MatrixXd modes;    // n x d_macro, weights applied to the signal part
};

SavarResult gen_savar(const SavarSpec& spec);

}  // namespace vcd
