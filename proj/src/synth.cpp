#include "vectorcd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vcd {

std::string to_string(InternalKind k) {
    switch (k) {
    case InternalKind::mrf: return "mrf";
    case InternalKind::dag: return "dag";
    case InternalKind::latent: return "latent";
    case InternalKind::cyclic: return "cyclic";
    case InternalKind::deterministic: return "deterministic";
    }
    return "?";
}

InternalKind parse_internal_kind(const std::string& s) {
    if (s == "mrf") return InternalKind::mrf;
    if (s == "dag") return InternalKind::dag;
    if (s == "latent" || s == "latent_confounded") return InternalKind::latent;
    if (s == "cyclic") return InternalKind::cyclic;
    if (s == "deterministic") return InternalKind::deterministic;
    throw std::invalid_argument("unknown internal kind: " + s);
}

void VectorScmSpec::validate() const {
    if (d_macro < 2) throw std::invalid_argument("spec: d_macro must be at least 2");
    if (d_micro < 1) throw std::invalid_argument("spec: d_micro must be positive");
    if (!(ext_density >= 0 && ext_density <= 1) || !(int_density >= 0 && int_density <= 1)) {
        throw std::invalid_argument("spec: densities must lie in [0, 1]");
    }
    if (!(coef_low >= -0.5 && coef_low <= 0.0)) {
        throw std::invalid_argument("spec: coef_low must lie in [-0.5, 0]");
    }
    if (!(coef_high > kCoefDeadZone)) throw std::invalid_argument("spec: coef_high too small");
    if (!(pc_weight >= 0)) throw std::invalid_argument("spec: pc_weight must be >= 0");
    if (tau_max < 0) throw std::invalid_argument("spec: tau_max must be >= 0");
    if (n < 1) throw std::invalid_argument("spec: n must be positive");
}

double draw_coefficient(Rng& rng, double low, double high) {
    if (!(low <= high)) throw std::invalid_argument("draw_coefficient: empty interval");
    const double lo_part = std::max(0.0, std::min(high, -kCoefDeadZone) - low);
    const double hi_part = std::max(0.0, high - std::max(low, kCoefDeadZone));
    if (lo_part + hi_part <= 0) throw std::invalid_argument("draw_coefficient: interval inside dead zone");
    std::uniform_real_distribution<double> u(0.0, lo_part + hi_part);
    const double x = u(rng);
    if (x < lo_part) return low + x;
    return std::max(low, kCoefDeadZone) + (x - lo_part);
}

namespace {

Eigen::MatrixXd sqrt_factor(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal();
}

Eigen::MatrixXd standard_normal(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = g(rng);
    }
    return m;
}

bool coin(Rng& rng, double p) {
    return std::bernoulli_distribution(p)(rng);
}

double signed_magnitude(Rng& rng, double lo, double hi) {
    double mag = std::uniform_real_distribution<double>(lo, hi)(rng);
    return coin(rng, 0.5) ? mag : -mag;
}

Eigen::VectorXd first_eigenvector(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd v = es.eigenvectors().col(cov.rows() - 1);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    return v;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXd LinearModel::covariance() const {
    if (tau_max() != 0) throw std::logic_error("covariance: only defined for static models");
    const int d = dim();
    Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(d, d) - b[0]).inverse();
    return inv * noise_cov * inv.transpose();
}

Eigen::MatrixXd LinearModel::sample(int n, Rng& rng, int burn_in) const {
    const int d = dim();
    const Eigen::MatrixXd root = sqrt_factor(noise_cov);
    Eigen::PartialPivLU<Eigen::MatrixXd> solve(Eigen::MatrixXd::Identity(d, d) - b[0]);
    if (tau_max() == 0) {
        Eigen::MatrixXd e = standard_normal(n, d, rng) * root.transpose();
        return solve.solve(e.transpose()).transpose();
    }
    const int tau = tau_max();
    const int total = n + burn_in + tau;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, d);
    for (int t = tau; t < total; ++t) {
        Eigen::VectorXd rhs = root * standard_normal(d, 1, rng);
        for (int l = 1; l <= tau; ++l) rhs += b[l] * x.row(t - l).transpose();
        x.row(t) = solve.solve(rhs).transpose();
    }
    return x.bottomRows(n);
}

MixedGraph random_macro_dag(const VectorScmSpec& spec, Rng& rng) {
    const int n = spec.d_macro;
    MixedGraph g(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const double p = n > 1 ? 1.0 / (n - 1) : 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (coin(rng, p)) g.add_directed(order[a], order[b]);
        }
    }
    return g;
}

MixedGraph random_macro_dag(const VectorScmSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    return random_macro_dag(spec, rng);
}

MixedGraph window_graph(const std::vector<Eigen::MatrixXd>& b, double tol) {
    const int d = static_cast<int>(b.at(0).rows());
    const int tau = static_cast<int>(b.size()) - 1;
    MixedGraph g((tau + 1) * d);
    for (int l = 0; l <= tau; ++l) {
        for (int to = 0; to < d; ++to) {
            for (int from = 0; from < d; ++from) {
                if (l == 0 && from == to) continue;
                if (std::abs(b[l](to, from)) > tol) g.add_directed(l * d + from, to);
            }
        }
    }
    return g;
}

SimResult gen_vector_scm(const VectorScmSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int n_macro = spec.d_macro, d = spec.d_micro, dim = n_macro * d;
    const Partition p = Partition::uniform(n_macro, d);
    MixedGraph dag = random_macro_dag(spec, rng);

    LinearModel model;
    model.b.assign(spec.tau_max + 1, Eigen::MatrixXd::Zero(dim, dim));
    model.noise_cov = Eigen::MatrixXd::Zero(dim, dim);
    MixedGraph internal(dim);  // within-block structure of the micro truth

    std::vector<Eigen::MatrixXd> block_cov(n_macro);
    for (int i = 0; i < n_macro; ++i) {
        const int o = p.offset(i);
        Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
        Eigen::MatrixXd bint = Eigen::MatrixXd::Zero(d, d);
        switch (spec.internal_kind) {
        case InternalKind::mrf: {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
            for (int u = 0; u < d; ++u) {
                for (int v = u + 1; v < d; ++v) {
                    if (!coin(rng, spec.int_density)) continue;
                    a(u, v) = a(v, u) = coin(rng, 0.5) ? 1.0 : -1.0;
                    internal.add_undirected(o + u, o + v);
                }
            }
            // Coupling halved until the precision is well conditioned.
            for (double lambda = 1.0;; lambda /= 2) {
                Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(d, d) + lambda * a;
                Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(prec).eigenvalues();
                if (ev.minCoeff() > 0 && ev.maxCoeff() / ev.minCoeff() <= 100.0) {
                    cov = prec.inverse();
                    break;
                }
            }
            break;
        }
        case InternalKind::dag: {
            std::vector<int> order(d);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            for (int x = 0; x < d; ++x) {
                for (int y = x + 1; y < d; ++y) {
                    if (!coin(rng, spec.int_density)) continue;
                    bint(order[y], order[x]) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
                    internal.add_directed(o + order[x], o + order[y]);
                }
            }
            break;
        }
        case InternalKind::latent: {
            for (int u = 0; u < d; ++u) {
                for (int v = u + 1; v < d; ++v) {
                    if (!coin(rng, spec.int_density)) continue;
                    Eigen::VectorXd l = Eigen::VectorXd::Zero(d);
                    l(u) = signed_magnitude(rng, 0.5, 1.0);
                    l(v) = signed_magnitude(rng, 0.5, 1.0);
                    cov += l * l.transpose();
                    internal.add_bidirected(o + u, o + v);
                }
            }
            break;
        }
        case InternalKind::cyclic: {
            for (int u = 0; u < d; ++u) {
                for (int v = u + 1; v < d; ++v) {
                    if (!coin(rng, spec.int_density)) continue;
                    const bool forward = coin(rng, 0.5);
                    const int from = forward ? u : v, to = forward ? v : u;
                    bint(to, from) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
                }
            }
            const double rho = spectral_radius(bint);
            if (rho >= 0.9) bint *= 0.89 / rho;
            for (int u = 0; u < d; ++u) {
                for (int v = 0; v < d; ++v) {
                    if (bint(v, u) != 0) internal.add_directed(o + u, o + v);
                }
            }
            break;
        }
        case InternalKind::deterministic: {
            cov = Eigen::MatrixXd::Zero(d, d);
            cov(0, 0) = 1.0;
            for (int k = 1; k < d; ++k) {
                bint(k, 0) = signed_magnitude(rng, 0.5, 2.0);
                internal.add_directed(o, o + k);
            }
            break;
        }
        }
        model.b[0].block(o, o, d, d) = bint;
        model.noise_cov.block(o, o, d, d) = cov;
        block_cov[i] = cov;
    }

    const int tau = spec.tau_max;
    MixedGraph truth((tau + 1) * n_macro);
    MixedGraph micro((tau + 1) * dim);
    for (const auto& e : internal.edges()) {
        micro.add_edge(e.i, e.j, e.mark_i, e.mark_j);
    }
    for (const auto& e : dag.edges()) {
        const int a = dag.is_directed(e.i, e.j) ? e.i : e.j;
        const int b = a == e.i ? e.j : e.i;
        const int lag = tau > 0 ? std::uniform_int_distribution<int>(0, tau)(rng) : 0;
        truth.add_directed(lag * n_macro + a, b);

        std::vector<int> targets;
        if (spec.internal_kind == InternalKind::deterministic) targets = {0};
        else for (int v = 0; v < d; ++v) targets.push_back(v);
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);  // (child comp, parent comp)
        int count = 0;
        for (int u = 0; u < d; ++u) {
            for (int v : targets) {
                if (!coin(rng, spec.ext_density)) continue;
                c(v, u) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
                ++count;
            }
        }
        if (count == 0) {
            const int u = std::uniform_int_distribution<int>(0, d - 1)(rng);
            const int v = targets[std::uniform_int_distribution<int>(0, static_cast<int>(targets.size()) - 1)(rng)];
            c(v, u) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
        }
        if (spec.pc_weight > 0) {
            c += spec.pc_weight * first_eigenvector(block_cov[b]) *
                 first_eigenvector(block_cov[a]).transpose();
        }
        model.b[lag].block(p.offset(b), p.offset(a), d, d) = c;
        for (int u = 0; u < d; ++u) {
            for (int v = 0; v < d; ++v) {
                if (c(v, u) != 0) micro.add_directed(lag * dim + p.offset(a) + u, p.offset(b) + v);
            }
        }
    }

    SimResult out;
    out.data = Dataset(model.sample(spec.n, rng), p);
    out.truth = std::move(truth);
    out.micro_truth = std::move(micro);
    out.model = std::move(model);
    return out;
}

SimResult gen_determinism(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_determinism: n must be positive");
    Rng rng(seed);
    LinearModel model;
    model.b = {Eigen::MatrixXd::Zero(3, 3)};
    model.b[0](1, 0) = 2.0;
    model.b[0](2, 0) = 0.5;
    model.b[0](2, 1) = 0.5;
    model.noise_cov = Eigen::Vector3d(1.0, 0.0, 1.0).asDiagonal();
    SimResult out;
    out.data = Dataset(model.sample(n, rng), Partition({2, 1}), {"X", "Y"});
    out.truth = MixedGraph(2);
    out.truth.add_directed(0, 1);
    out.micro_truth = MixedGraph(3);
    out.micro_truth.add_directed(0, 1);
    out.micro_truth.add_directed(0, 2);
    out.micro_truth.add_directed(1, 2);
    out.model = std::move(model);
    return out;
}

Counterexample gen_counterexample(CounterexampleKind which, int n, std::uint64_t seed,
                                  double alpha, double beta) {
    if (n < 100) throw std::invalid_argument("gen_counterexample: n must be at least 100");
    Rng rng(seed);
    Counterexample out;
    LinearModel& model = out.sim.model;
    if (which == CounterexampleKind::agg_faithfulness) {
        // X2 = (alpha, beta) X1 + eta; Z2 = -beta X2_1 + alpha X2_2 cancels X1.
        model.b = {Eigen::MatrixXd::Zero(3, 3)};
        model.b[0](1, 0) = alpha;
        model.b[0](2, 0) = beta;
        model.noise_cov = Eigen::MatrixXd::Identity(3, 3);
        Partition p({1, 2});
        out.sim.data = Dataset(model.sample(n, rng), p);
        out.sim.truth = MixedGraph(2);
        out.sim.truth.add_directed(0, 1);
        out.sim.micro_truth = MixedGraph(3);
        out.sim.micro_truth.add_directed(0, 1);
        out.sim.micro_truth.add_directed(0, 2);
        Eigen::MatrixXd w2(2, 2);
        w2 << -beta, alpha, alpha, beta;
        out.map = fixed_weight_map(p, {Eigen::MatrixXd::Ones(1, 1), w2}, {1, 1});
    } else {
        // X2 = X3 = X1_1 + 2 X1_2 + noise; Z1 = X1_1 + X1_2 loses the driver.
        model.b = {Eigen::MatrixXd::Zero(4, 4)};
        model.b[0](2, 0) = 1.0;
        model.b[0](2, 1) = 2.0;
        model.b[0](3, 0) = 1.0;
        model.b[0](3, 1) = 2.0;
        model.noise_cov = Eigen::MatrixXd::Identity(4, 4);
        Partition p({2, 1, 1});
        out.sim.data = Dataset(model.sample(n, rng), p);
        out.sim.truth = MixedGraph(3);
        out.sim.truth.add_directed(0, 1);
        out.sim.truth.add_directed(0, 2);
        out.sim.micro_truth = MixedGraph(4);
        for (int u : {0, 1}) {
            for (int v : {2, 3}) out.sim.micro_truth.add_directed(u, v);
        }
        Eigen::MatrixXd w1(2, 2);
        w1 << 1.0, 1.0, 1.0, -1.0;
        out.map = fixed_weight_map(p, {w1, Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)},
                                   {1, 1, 1});
    }
    return out;
}

Dataset gen_confounder_xyz(int d_xy, int d_z, double coef, const std::string& z_int,
                           const std::string& n_conf, int n, std::uint64_t seed) {
    if (d_xy < 1 || n < 1) throw std::invalid_argument("gen_confounder_xyz: dimensions must be positive");
    if (d_z < 1) throw std::invalid_argument("dim_z must be greater than zero for confounder data");
    Rng rng(seed);
    Eigen::MatrixXd data = standard_normal(n, 2 * d_xy + d_z, rng);
    Eigen::VectorXd confounder = standard_normal(n, 1, rng);
    const int z0 = 2 * d_xy;

    int connected = 0;
    if (z_int == "high") connected = d_z;
    else if (z_int == "low") connected = d_z / 3;
    else if (z_int != "none" && !z_int.empty()) {
        std::size_t used = 0;
        connected = std::stoi(z_int, &used);
        if (used != z_int.size() || connected < 0) {
            throw std::invalid_argument("z_int should be none, low, high or a count");
        }
        connected = std::min(connected, d_z);
    }
    data.middleCols(z0, connected).colwise() += confounder;

    int conf = 0;
    if (n_conf == "high") conf = d_z;
    else if (n_conf == "low") conf = d_z > 2 ? d_z / 3 : 1;
    else throw std::invalid_argument("n_conf should be in [\"high\", \"low\"]");

    Eigen::VectorXd zmean = data.middleCols(z0, conf).rowwise().mean();
    data.leftCols(d_xy).colwise() += zmean;
    data.middleCols(d_xy, d_xy).colwise() += zmean;
    data.middleCols(d_xy, d_xy) += coef * data.leftCols(d_xy);
    return Dataset(std::move(data), Partition({d_xy, d_xy, d_z}), {"X", "Y", "Z"});
}

}  // namespace vcd
