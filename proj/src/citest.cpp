#include "vectorcd/citest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace vcd {

std::string to_string(TestKind k) {
    switch (k) {
        case TestKind::parcorr: return "parcorr";
        case TestKind::maxcorr: return "maxcorr";
        case TestKind::gcm: return "gcm";
        case TestKind::oracle: return "oracle";
    }
    return "unknown";
}

TestKind parse_test_kind(const std::string& s) {
    if (s == "parcorr") return TestKind::parcorr;
    if (s == "maxcorr" || s == "max_corr") return TestKind::maxcorr;
    if (s == "gcm") return TestKind::gcm;
    if (s == "oracle") return TestKind::oracle;
    throw std::invalid_argument("unknown test kind '" + s + "'");
}

void CiConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (bootstrap_reps < 100) throw std::invalid_argument("bootstrap_reps must be >= 100");
}

namespace {

// Relative variance below which a residual column counts as identically zero.
constexpr double kDegenerateRatio = 1e-10;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

struct PairStat {
    double r = 0.0;
    double p = 1.0;
    double stat = 0.0;
    bool saturated = false;
    bool degenerate = false;
};

PairStat fisher_z(const Eigen::VectorXd& rx, bool dx, const Eigen::VectorXd& ry, bool dy,
                  double n_eff) {
    PairStat s;
    if (dx || dy) {
        s.degenerate = true;
        return s;
    }
    double sxx = rx.squaredNorm(), syy = ry.squaredNorm();
    double r = rx.dot(ry) / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    s.r = r;
    if (std::abs(r) >= 1.0 - 1e-15) {
        s.saturated = true;
        s.p = 0.0;
        s.stat = std::sqrt(n_eff) * std::atanh(1.0 - 1e-15);
        return s;
    }
    s.stat = std::sqrt(n_eff) * std::abs(std::atanh(r));
    s.p = normal_two_sided_p(s.stat);
    return s;
}

void check_shapes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z) {
    if (x.rows() != y.rows() || (z.cols() > 0 && z.rows() != x.rows())) {
        throw std::invalid_argument("CI test blocks have different row counts");
    }
    if (x.cols() == 0 || y.cols() == 0) throw std::invalid_argument("empty test block");
    if (x.rows() <= z.cols() + 3) {
        throw std::invalid_argument("CI test needs n > |z| + 3 (n=" + std::to_string(x.rows()) +
                                    ", |z|=" + std::to_string(z.cols()) + ")");
    }
}

}  // namespace

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

Residuals residualize_ex(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z) {
    if (z.cols() > 0 && z.rows() != y.rows()) {
        throw std::invalid_argument("residualize: row count mismatch");
    }
    Residuals out;
    Eigen::MatrixXd yc = centered(y);
    out.r = yc;
    if (z.cols() > 0) {
        Eigen::MatrixXd zc = centered(z);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zc);
        if (qr.rank() == zc.cols()) {
            out.r = yc - zc * qr.solve(yc);
        } else {
            out.ridge = true;
            Eigen::MatrixXd gram = zc.transpose() * zc;
            double scale = std::max(1.0, gram.diagonal().mean());
            gram.diagonal().array() += kRidgePenalty * scale;
            out.r = yc - zc * gram.ldlt().solve(zc.transpose() * yc);
        }
    }
    out.degenerate.resize(y.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        double base = yc.col(c).squaredNorm();
        double res = out.r.col(c).squaredNorm();
        out.degenerate[c] = base <= std::numeric_limits<double>::min() ||
                            res <= kDegenerateRatio * base;
    }
    return out;
}

Eigen::MatrixXd residualize(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z) {
    return residualize_ex(y, z).r;
}

TestRecord fisher_z_parcorr(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& z, const CiConfig& cfg) {
    check_shapes(x, y, z);
    auto rx = residualize_ex(x, z);
    auto ry = residualize_ex(y, z);
    double n_eff = static_cast<double>(x.rows() - z.cols() - 3);
    auto s = fisher_z(rx.r.col(0), rx.degenerate[0], ry.r.col(0), ry.degenerate[0], n_eff);
    TestRecord rec;
    rec.test = TestKind::parcorr;
    rec.p_value = s.p;
    rec.statistic = s.stat;
    rec.saturated = s.saturated;
    rec.degenerate = s.degenerate;
    rec.ridge = rx.ridge || ry.ridge;
    rec.decide(cfg.alpha);
    return rec;
}

TestRecord max_corr_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                         const Eigen::MatrixXd& z, const CiConfig& cfg) {
    check_shapes(x, y, z);
    auto rx = residualize_ex(x, z);
    auto ry = residualize_ex(y, z);
    double n_eff = static_cast<double>(x.rows() - z.cols() - 3);
    double min_p = 1.0, max_stat = 0.0;
    TestRecord rec;
    rec.test = TestKind::maxcorr;
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
        for (Eigen::Index b = 0; b < y.cols(); ++b) {
            auto s = fisher_z(rx.r.col(a), rx.degenerate[a], ry.r.col(b), ry.degenerate[b], n_eff);
            rec.saturated = rec.saturated || s.saturated;
            if (s.degenerate) {
                ++rec.excluded;
                continue;
            }
            min_p = std::min(min_p, s.p);
            max_stat = std::max(max_stat, s.stat);
        }
    }
    double k = static_cast<double>(x.cols() * y.cols());
    rec.p_value = std::min(1.0, k * min_p);
    rec.statistic = max_stat;
    rec.degenerate = rec.excluded == x.cols() * y.cols();
    rec.ridge = rx.ridge || ry.ridge;
    rec.decide(cfg.alpha);
    return rec;
}

TestRecord gcm_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                    const CiConfig& cfg, std::uint64_t stream) {
    check_shapes(x, y, z);
    auto rx = residualize_ex(x, z);
    auto ry = residualize_ex(y, z);
    const Eigen::Index n = x.rows();
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    TestRecord rec;
    rec.test = TestKind::gcm;
    rec.ridge = rx.ridge || ry.ridge;

    std::vector<Eigen::VectorXd> cols;
    double stat = 0.0;
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
        for (Eigen::Index b = 0; b < y.cols(); ++b) {
            if (rx.degenerate[a] || ry.degenerate[b]) {
                ++rec.excluded;
                continue;
            }
            Eigen::VectorXd prod = rx.r.col(a).cwiseProduct(ry.r.col(b));
            double mean = prod.mean();
            Eigen::VectorXd dev = prod.array() - mean;
            double sd = std::sqrt(dev.squaredNorm() / static_cast<double>(n));
            if (!(sd > 1e-300) || sd <= 1e-12 * std::sqrt(prod.squaredNorm() / n)) {
                ++rec.excluded;
                continue;
            }
            stat = std::max(stat, std::abs(sqrt_n * mean / sd));
            cols.push_back(dev / sd);
        }
    }
    rec.statistic = stat;
    if (cols.empty()) {
        rec.degenerate = true;
        rec.p_value = 1.0;
        rec.decide(cfg.alpha);
        return rec;
    }

    const Eigen::Index k = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd rt(n, k);
    for (Eigen::Index c = 0; c < k; ++c) rt.col(c) = cols[c];

    std::mt19937_64 rng(splitmix64(cfg.rng_seed ^ splitmix64(stream)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const int reps = cfg.bootstrap_reps;
    int exceed = 0;
    // Chunked so the multiplier matrix stays small for large n.
    const int chunk = 64;
    Eigen::MatrixXd e(chunk, n);
    for (int start = 0; start < reps; start += chunk) {
        int rows = std::min(chunk, reps - start);
        for (Eigen::Index t = 0; t < n; ++t) {
            for (int r = 0; r < rows; ++r) e(r, t) = normal(rng);
        }
        Eigen::MatrixXd g = e.topRows(rows) * rt / sqrt_n;
        for (int r = 0; r < rows; ++r) {
            if (g.row(r).cwiseAbs().maxCoeff() >= stat) ++exceed;
        }
    }
    rec.p_value = (1.0 + exceed) / (1.0 + reps);
    rec.decide(cfg.alpha);
    return rec;
}

std::uint64_t query_stream(int i, int j, const std::vector<int>& cond) {
    std::vector<int> s = cond;
    std::sort(s.begin(), s.end());
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(std::min(i, j)) * 1000003ULL +
                                 static_cast<std::uint64_t>(std::max(i, j)));
    for (int v : s) h = splitmix64(h ^ (static_cast<std::uint64_t>(v) + 0x51ED27ULL));
    return h;
}

TestRecord ci_dispatch(const Dataset& ds, int i, int j, const std::vector<int>& cond,
                       const CiConfig& cfg) {
    const int n_macro = ds.n_macro();
    auto valid = [&](int v) { return v >= 0 && v < n_macro; };
    if (!valid(i) || !valid(j) || i == j) throw std::invalid_argument("ci_dispatch: bad pair");
    for (int c : cond) {
        if (!valid(c) || c == i || c == j) {
            throw std::invalid_argument("ci_dispatch: conditioning set must exclude the pair");
        }
    }
    Eigen::MatrixXd x = ds.block(i);
    Eigen::MatrixXd y = ds.block(j);
    Eigen::MatrixXd z = ds.gather(cond);
    TestRecord rec;
    bool univariate = x.cols() == 1 && y.cols() == 1;
    if (univariate) {
        rec = fisher_z_parcorr(x.col(0), y.col(0), z, cfg);
    } else {
        switch (cfg.test_kind) {
            case TestKind::maxcorr: rec = max_corr_test(x, y, z, cfg); break;
            case TestKind::gcm: rec = gcm_test(x, y, z, cfg, query_stream(i, j, cond)); break;
            default:
                throw std::invalid_argument("partial correlation needs univariate blocks; use "
                                            "maxcorr or gcm for vector variables");
        }
    }
    rec.i = i;
    rec.j = j;
    rec.cond = cond;
    return rec;
}

}  // namespace vcd
