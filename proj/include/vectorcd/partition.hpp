#pragma once

#include <span>
#include <vector>

namespace vcd {

// Canonical partition of micro columns into contiguous macro blocks.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<int> macro_sizes);

    static Partition from_micro_to_macro(const std::vector<int>& micro_to_macro);
    static Partition singletons(int n) { return Partition(std::vector<int>(n, 1)); }
    static Partition uniform(int n_macro, int width) {
        return Partition(std::vector<int>(n_macro, width));
    }

    int n_macro() const { return static_cast<int>(sizes_.size()); }
    int n_micro() const { return static_cast<int>(micro_to_macro_.size()); }
    int size(int i) const { return sizes_.at(i); }
    int offset(int i) const { return offsets_.at(i); }
    int macro_of(int col) const { return micro_to_macro_.at(col); }
    const std::vector<int>& macro_sizes() const { return sizes_; }
    const std::vector<int>& micro_to_macro() const { return micro_to_macro_; }

    std::vector<int> columns(int i) const;
    std::vector<int> columns(std::span<const int> macros) const;
    bool all_univariate() const;
    int max_size() const;

    bool operator==(const Partition& o) const { return sizes_ == o.sizes_; }

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;
    std::vector<int> micro_to_macro_;
};

}  // namespace vcd
