#include "vectorcd/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vcd {

std::string to_string(MapKind k) {
    return k == MapKind::pca ? "pca" : "wavg";
}

MapKind parse_map_kind(const std::string& s) {
    if (s == "pca") return MapKind::pca;
    if (s == "wavg" || s == "avg" || s == "weighted_average") return MapKind::weighted_average;
    throw std::invalid_argument("unknown map kind: " + s);
}

namespace {

void check_m(const Partition& p, const std::vector<int>& m) {
    if (static_cast<int>(m.size()) != p.n_macro()) {
        throw std::invalid_argument("aggregation map: tuning vector has wrong length");
    }
    for (int i = 0; i < p.n_macro(); ++i) {
        if (m[i] < 1 || m[i] > p.size(i)) {
            throw std::invalid_argument("aggregation map: m_i must lie in [1, d_i]");
        }
    }
}

Eigen::MatrixXd weight_stack(int d) {
    Eigen::MatrixXd w(d, d);
    for (int l = 0; l < d; ++l) w(0, l) = 1.0 / d;
    for (int k = 1; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
            w(k, l) = 0.5 + 0.45 * std::cos(std::numbers::pi * k * (l + 0.5) / d);
        }
    }
    return w;
}

// Eigenvectors of a symmetric matrix, descending eigenvalue, ties kept in
// index order, sign fixed so the largest-magnitude loading is positive.
void sorted_eigen(const Eigen::MatrixXd& cov, Eigen::MatrixXd& basis, Eigen::VectorXd& values) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("pca: eigendecomposition failed");
    const int d = static_cast<int>(cov.rows());
    std::vector<int> order(d);
    for (int k = 0; k < d; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });
    basis.resize(d, d);
    values.resize(d);
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd v = es.eigenvectors().col(order[k]);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        basis.col(k) = v;
        values(k) = std::max(0.0, es.eigenvalues()(order[k]));
    }
}

}  // namespace

bool TunableAggregationMap::fitted() const {
    if (kind == MapKind::pca) return static_cast<int>(basis.size()) == input.n_macro();
    return static_cast<int>(weights.size()) == input.n_macro();
}

Partition TunableAggregationMap::output_partition() const {
    return Partition(m);
}

Eigen::MatrixXd TunableAggregationMap::block_operator(int i) const {
    if (!fitted()) throw std::logic_error("aggregation map: pca basis not fitted");
    if (kind == MapKind::pca) return basis.at(i).leftCols(m.at(i)).transpose();
    return weights.at(i).topRows(m.at(i));
}

Eigen::MatrixXd TunableAggregationMap::linear_operator() const {
    int rows = 0;
    for (int v : m) rows += v;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, input.n_micro());
    int r = 0;
    for (int i = 0; i < input.n_macro(); ++i) {
        a.block(r, input.offset(i), m[i], input.size(i)) = block_operator(i);
        r += m[i];
    }
    return a;
}

bool TunableAggregationMap::is_maximal() const {
    for (int i = 0; i < input.n_macro(); ++i) {
        if (m[i] < input.size(i)) return false;
    }
    return true;
}

void TunableAggregationMap::validate() const {
    check_m(input, m);
    if (!fitted()) throw std::logic_error("aggregation map: pca basis not fitted");
    for (int i = 0; i < input.n_macro(); ++i) {
        const int d = input.size(i);
        if (kind == MapKind::weighted_average) {
            const auto& w = weights[i];
            if (w.rows() != d || w.cols() != d) {
                throw std::invalid_argument("aggregation map: weight stack must be d_i x d_i");
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(w);
            if (lu.rank() < d) throw std::invalid_argument("aggregation map: weight stack is rank deficient");
        } else {
            const auto& b = basis[i];
            if (b.rows() != d || b.cols() != d) {
                throw std::invalid_argument("aggregation map: pca basis must be d_i x d_i");
            }
            if (!(b.transpose() * b).isIdentity(1e-8)) {
                throw std::invalid_argument("aggregation map: pca basis not orthonormal");
            }
        }
    }
}

TunableAggregationMap weighted_average_map(const Partition& p, std::vector<int> m) {
    check_m(p, m);
    TunableAggregationMap map;
    map.kind = MapKind::weighted_average;
    map.input = p;
    map.m = std::move(m);
    for (int i = 0; i < p.n_macro(); ++i) map.weights.push_back(weight_stack(p.size(i)));
    return map;
}

TunableAggregationMap fixed_weight_map(const Partition& p, std::vector<Eigen::MatrixXd> stacks,
                                       std::vector<int> m) {
    check_m(p, m);
    if (static_cast<int>(stacks.size()) != p.n_macro()) {
        throw std::invalid_argument("fixed_weight_map: one stack per block required");
    }
    TunableAggregationMap map;
    map.kind = MapKind::weighted_average;
    map.input = p;
    map.m = std::move(m);
    map.weights = std::move(stacks);
    map.validate();
    return map;
}

TunableAggregationMap pca_map(const Partition& p, std::vector<int> m) {
    check_m(p, m);
    TunableAggregationMap map;
    map.kind = MapKind::pca;
    map.input = p;
    map.m = std::move(m);
    return map;
}

TunableAggregationMap fit_pca(const Dataset& ds, std::vector<int> m) {
    if (ds.n_samples() <= ds.partition.max_size()) {
        throw std::invalid_argument("fit_pca: need more samples than block width");
    }
    TunableAggregationMap map = pca_map(ds.partition, std::move(m));
    for (int i = 0; i < ds.n_macro(); ++i) {
        Eigen::MatrixXd x = ds.block(i);
        Eigen::VectorXd mean = x.colwise().mean().transpose();
        Eigen::MatrixXd c = x.rowwise() - mean.transpose();
        Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
        Eigen::MatrixXd b;
        Eigen::VectorXd ev;
        sorted_eigen(cov, b, ev);
        map.basis.push_back(std::move(b));
        map.eigenvalues.push_back(std::move(ev));
        map.means.push_back(std::move(mean));
    }
    return map;
}

TunableAggregationMap fit_pca_covariance(const Eigen::MatrixXd& cov, const Partition& p,
                                         std::vector<int> m) {
    if (cov.rows() != p.n_micro() || cov.cols() != p.n_micro()) {
        throw std::invalid_argument("fit_pca_covariance: covariance does not match partition");
    }
    TunableAggregationMap map = pca_map(p, std::move(m));
    for (int i = 0; i < p.n_macro(); ++i) {
        Eigen::MatrixXd b;
        Eigen::VectorXd ev;
        sorted_eigen(cov.block(p.offset(i), p.offset(i), p.size(i), p.size(i)), b, ev);
        map.basis.push_back(std::move(b));
        map.eigenvalues.push_back(std::move(ev));
        map.means.push_back(Eigen::VectorXd::Zero(p.size(i)));
    }
    return map;
}

Dataset apply_map(const TunableAggregationMap& map, const Dataset& ds) {
    if (!(ds.partition == map.input)) {
        throw std::invalid_argument("apply_map: dataset partition does not match map");
    }
    if (!map.fitted()) throw std::logic_error("apply_map: pca basis not fitted");
    int cols = 0;
    for (int v : map.m) cols += v;
    Eigen::MatrixXd z(ds.n_samples(), cols);
    int c = 0;
    for (int i = 0; i < ds.n_macro(); ++i) {
        Eigen::MatrixXd x = ds.block(i);
        if (map.kind == MapKind::pca && !map.means.empty()) {
            x.rowwise() -= map.means[i].transpose();
        }
        z.middleCols(c, map.m[i]) = x * map.block_operator(i).transpose();
        c += map.m[i];
    }
    return Dataset(std::move(z), map.output_partition(), ds.names);
}

Eigen::MatrixXd map_covariance(const TunableAggregationMap& map, const Eigen::MatrixXd& cov_x) {
    Eigen::MatrixXd a = map.linear_operator();
    if (a.cols() != cov_x.rows()) {
        throw std::invalid_argument("map_covariance: covariance does not match map input");
    }
    return a * cov_x * a.transpose();
}

}  // namespace vcd
