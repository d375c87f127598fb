#pragma once

#include "vectorcd/partition.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace vcd {

struct Dataset {
    Eigen::MatrixXd data;  // rows = samples, columns grouped by macro block
    Partition partition;
    std::vector<std::string> names;  // one per macro variable

    Dataset() = default;
    Dataset(Eigen::MatrixXd x, Partition p, std::vector<std::string> macro_names = {});

    int n_samples() const { return static_cast<int>(data.rows()); }
    int n_macro() const { return partition.n_macro(); }
    int n_micro() const { return partition.n_micro(); }

    Eigen::MatrixXd block(int i) const;
    Eigen::MatrixXd gather(std::span<const int> macros) const;

    // Every column becomes its own macro variable, named `name:k`.
    Dataset micro_view() const;
};

std::vector<std::string> default_names(int n_macro);

std::string format_double(double v);
double parse_double(const std::string& s);

void write_csv(const Dataset& ds, const std::string& path);
Dataset read_csv(const std::string& path);

}  // namespace vcd
