#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace vcd {

enum class Mark : std::uint8_t { none, tail, arrow, circle, conflict };

struct Edge {
    int i = 0;
    int j = 0;
    Mark mark_i = Mark::tail;
    Mark mark_j = Mark::arrow;

    bool operator==(const Edge&) const = default;
};

// Mixed graph with one edge per unordered pair and a mark at each endpoint.
// Directed i->j is (tail at i, arrow at j); bidirected is (arrow, arrow);
// undirected CPDAG edges are (circle, circle); conflicts are (conflict, conflict).
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(int n_nodes);

    int n_nodes() const { return n_; }

    void add_edge(int i, int j, Mark mark_i, Mark mark_j);
    void add_directed(int from, int to) { add_edge(from, to, Mark::tail, Mark::arrow); }
    void add_undirected(int i, int j) { add_edge(i, j, Mark::circle, Mark::circle); }
    void add_bidirected(int i, int j) { add_edge(i, j, Mark::arrow, Mark::arrow); }
    void add_conflict(int i, int j) { add_edge(i, j, Mark::conflict, Mark::conflict); }
    void remove_edge(int i, int j);

    bool adjacent(int i, int j) const { return at(i, j) != Mark::none; }
    // Mark at node `to` on the edge between `from` and `to`.
    Mark mark_at(int from, int to) const { return at(from, to); }
    void set_mark(int from, int to, Mark m);

    bool is_directed(int from, int to) const {
        return at(to, from) == Mark::tail && at(from, to) == Mark::arrow;
    }
    bool is_undirected(int i, int j) const {
        return at(i, j) == Mark::circle && at(j, i) == Mark::circle;
    }
    bool is_bidirected(int i, int j) const {
        return at(i, j) == Mark::arrow && at(j, i) == Mark::arrow;
    }
    bool is_conflict(int i, int j) const {
        return at(i, j) == Mark::conflict && at(j, i) == Mark::conflict;
    }

    std::vector<int> neighbors(int i) const;
    std::vector<int> parents(int i) const;
    std::vector<int> children(int i) const;
    std::vector<Edge> edges() const;  // i < j, lexicographic
    int n_edges() const;

    // Same adjacencies, every edge (circle, circle).
    MixedGraph skeleton() const;
    bool is_dag() const;
    bool has_directed_cycle() const;

    const std::vector<bool>& latent_flags() const { return latent_; }
    void set_latent(int i, bool flag);

    bool operator==(const MixedGraph& other) const {
        return n_ == other.n_ && end_ == other.end_;
    }

    std::string to_text() const;
    static MixedGraph from_text(const std::string& text);

private:
    Mark at(int from, int to) const { return end_[static_cast<std::size_t>(from) * n_ + to]; }
    Mark& at(int from, int to) { return end_[static_cast<std::size_t>(from) * n_ + to]; }
    void check_node(int i) const;

    int n_ = 0;
    std::vector<Mark> end_;
    std::vector<bool> latent_;
};

std::ostream& operator<<(std::ostream& os, const MixedGraph& g);

char mark_char(Mark m, bool at_first);
Mark parse_mark(char c);

}  // namespace vcd
