#include "vectorcd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vcd {

namespace {

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

int SavarSpec::tau_max() const {
    int t = 1;
    for (const auto& l : links) t = std::max(t, l.lag);
    return t;
}

void SavarSpec::validate() const {
    if (d_macro < 1) throw std::invalid_argument("savar: d_macro must be positive");
    const int side = static_cast<int>(std::lround(std::sqrt(d_micro)));
    if (side * side != d_micro) throw std::invalid_argument("savar: d_micro must be a perfect square");
    if (n < 1) throw std::invalid_argument("savar: n must be positive");
    for (const auto& l : links) {
        if (l.from < 0 || l.from >= d_macro || l.to < 0 || l.to >= d_macro || l.lag < 1) {
            throw std::invalid_argument("savar: invalid link");
        }
    }
    const int tau = tau_max();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(tau * d_macro, tau * d_macro);
    for (const auto& l : links) companion(l.to, (l.lag - 1) * d_macro + l.from) += l.coef;
    for (int k = 1; k < tau; ++k) {
        companion.block(k * d_macro, (k - 1) * d_macro, d_macro, d_macro).setIdentity();
    }
    if (spectral_radius(companion) >= 1.0) throw std::invalid_argument("savar: unstable VAR");
}

SavarSpec SavarSpec::three_mode_chain() {
    SavarSpec s;
    s.links = {{0, 0, 1, 0.5}, {1, 1, 1, 0.5}, {2, 2, 1, 0.5}, {0, 1, 1, 0.4}, {1, 2, 1, 0.4}};
    return s;
}

SavarResult gen_savar(const SavarSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int n_modes = spec.d_macro, d = spec.d_micro, dim = n_modes * d;
    const int side = static_cast<int>(std::lround(std::sqrt(d)));
    const int tau = spec.tau_max();

    // One Gaussian bump per mode over its own grid block, unit norm.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_modes, dim);
    Eigen::MatrixXd noise_cov = Eigen::MatrixXd::Zero(dim, dim);
    const double sd = std::max(1e-3, spec.bump_width * side);
    const double noise_sd = std::max(1e-3, spec.noise_width * side);
    std::normal_distribution<double> jitter(0.0, 0.1 * side);
    for (int i = 0; i < n_modes; ++i) {
        const double cx = (side - 1) / 2.0 + jitter(rng);
        const double cy = (side - 1) / 2.0 + jitter(rng);
        Eigen::VectorXd bump(d);
        for (int k = 0; k < d; ++k) {
            const double dx = k % side - cx, dy = k / side - cy;
            bump(k) = std::exp(-(dx * dx + dy * dy) / (2 * sd * sd));
        }
        w.block(i, i * d, 1, d) = bump.normalized().transpose();
    }
    // Spatially smooth grid noise: a squared-exponential kernel plus nugget on
    // one shared grid, block i occupying columns [i * side, (i + 1) * side), so
    // noise is correlated across neighbouring blocks.
    const double s2 = spec.noise_scale * spec.noise_scale;
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            const double dx = (a / d) * side + (a % d) % side - (b / d) * side - (b % d) % side;
            const double dy = (a % d) / side - (b % d) / side;
            const double k = std::exp(-(dx * dx + dy * dy) / (2 * noise_sd * noise_sd));
            noise_cov(a, b) = s2 * (k + (a == b ? 0.1 : 0.0));
        }
    }
    const Eigen::MatrixXd w_pinv = w.transpose();  // rows orthonormal

    std::vector<Eigen::MatrixXd> phi(tau + 1, Eigen::MatrixXd::Zero(n_modes, n_modes));
    for (const auto& l : spec.links) phi[l.lag](l.to, l.from) += l.coef;

    LinearModel grid;
    grid.b.assign(tau + 1, Eigen::MatrixXd::Zero(dim, dim));
    for (int l = 1; l <= tau; ++l) grid.b[l] = w_pinv * phi[l] * w;
    grid.noise_cov = noise_cov;

    SavarResult out;
    Eigen::MatrixXd x = grid.sample(spec.n, rng, 200);
    out.modes = x * w.transpose();
    out.data = Dataset(std::move(x), Partition::uniform(n_modes, d));
    out.truth = window_graph(phi);
    out.weights = std::move(w);
    return out;
}

}  // namespace vcd
