#include "vectorcd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace vcd {

Partition::Partition(std::vector<int> macro_sizes) : sizes_(std::move(macro_sizes)) {
    int off = 0;
    offsets_.reserve(sizes_.size());
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] < 1) throw std::invalid_argument("partition block of width < 1");
        offsets_.push_back(off);
        for (int k = 0; k < sizes_[i]; ++k) micro_to_macro_.push_back(static_cast<int>(i));
        off += sizes_[i];
    }
}

Partition Partition::from_micro_to_macro(const std::vector<int>& m2m) {
    std::vector<int> sizes;
    for (std::size_t c = 0; c < m2m.size(); ++c) {
        int b = m2m[c];
        if (b == static_cast<int>(sizes.size())) {
            sizes.push_back(1);
        } else if (b == static_cast<int>(sizes.size()) - 1) {
            ++sizes.back();
        } else {
            throw std::invalid_argument("partition blocks must be contiguous and ordered");
        }
    }
    return Partition(std::move(sizes));
}

std::vector<int> Partition::columns(int i) const {
    std::vector<int> out(size(i));
    for (int k = 0; k < size(i); ++k) out[k] = offset(i) + k;
    return out;
}

std::vector<int> Partition::columns(std::span<const int> macros) const {
    std::vector<int> out;
    for (int i : macros) {
        for (int k = 0; k < size(i); ++k) out.push_back(offset(i) + k);
    }
    return out;
}

bool Partition::all_univariate() const {
    for (int s : sizes_) {
        if (s != 1) return false;
    }
    return true;
}

int Partition::max_size() const {
    int m = 0;
    for (int s : sizes_) m = std::max(m, s);
    return m;
}

std::vector<std::string> default_names(int n_macro) {
    std::vector<std::string> out;
    for (int i = 0; i < n_macro; ++i) out.push_back("X" + std::to_string(i + 1));
    return out;
}

Dataset::Dataset(Eigen::MatrixXd x, Partition p, std::vector<std::string> macro_names)
    : data(std::move(x)), partition(std::move(p)), names(std::move(macro_names)) {
    if (data.cols() != partition.n_micro()) {
        throw std::invalid_argument("dataset: column count does not match partition");
    }
    if (names.empty()) names = default_names(partition.n_macro());
    if (static_cast<int>(names.size()) != partition.n_macro()) {
        throw std::invalid_argument("dataset: one name per macro variable required");
    }
}

Eigen::MatrixXd Dataset::block(int i) const {
    return data.middleCols(partition.offset(i), partition.size(i));
}

Eigen::MatrixXd Dataset::gather(std::span<const int> macros) const {
    int width = 0;
    for (int i : macros) width += partition.size(i);
    Eigen::MatrixXd out(data.rows(), width);
    int c = 0;
    for (int i : macros) {
        out.middleCols(c, partition.size(i)) = block(i);
        c += partition.size(i);
    }
    return out;
}

Dataset Dataset::micro_view() const {
    std::vector<std::string> micro_names;
    for (int i = 0; i < n_macro(); ++i) {
        for (int k = 0; k < partition.size(i); ++k) {
            micro_names.push_back(names[i] + ":" + std::to_string(k));
        }
    }
    return Dataset(data, Partition::singletons(n_micro()), std::move(micro_names));
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        throw std::invalid_argument("cannot parse number '" + s + "'");
    }
    return v;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (int c = 0; c < ds.n_micro(); ++c) {
        int i = ds.partition.macro_of(c);
        if (c) os << ',';
        os << ds.names[i] << ':' << (c - ds.partition.offset(i));
    }
    os << '\n';
    for (int r = 0; r < ds.n_samples(); ++r) {
        for (int c = 0; c < ds.n_micro(); ++c) {
            if (c) os << ',';
            os << format_double(ds.data(r, c));
        }
        os << '\n';
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

Dataset read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty csv " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> names;
    std::vector<int> m2m;
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
        auto colon = cell.rfind(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("header cell '" + cell + "' is not name:component");
        }
        std::string name = cell.substr(0, colon);
        if (names.empty() || names.back() != name) {
            for (const auto& n : names) {
                if (n == name) {
                    throw std::invalid_argument("columns of '" + name + "' are not contiguous");
                }
            }
            names.push_back(name);
        }
        m2m.push_back(static_cast<int>(names.size()) - 1);
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(parse_double(cell));
        if (row.size() != m2m.size()) {
            throw std::invalid_argument("row " + std::to_string(rows.size() + 1) +
                                        " has wrong number of fields");
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd x(rows.size(), m2m.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < m2m.size(); ++c) x(r, c) = rows[r][c];
    }
    return Dataset(std::move(x), Partition::from_micro_to_macro(m2m), std::move(names));
}

}  // namespace vcd
