#include "vectorcd/graph.hpp"

#include <sstream>
#include <stdexcept>

namespace vcd {

MixedGraph::MixedGraph(int n_nodes) : n_(n_nodes) {
    if (n_nodes < 0) throw std::invalid_argument("negative node count");
    end_.assign(static_cast<std::size_t>(n_) * n_, Mark::none);
}

void MixedGraph::check_node(int i) const {
    if (i < 0 || i >= n_) {
        throw std::out_of_range("node " + std::to_string(i) + " out of range [0," +
                                std::to_string(n_) + ")");
    }
}

void MixedGraph::add_edge(int i, int j, Mark mark_i, Mark mark_j) {
    check_node(i);
    check_node(j);
    if (i == j) throw std::invalid_argument("self loop on node " + std::to_string(i));
    if (mark_i == Mark::none || mark_j == Mark::none) {
        throw std::invalid_argument("edge marks must not be none");
    }
    at(j, i) = mark_i;
    at(i, j) = mark_j;
}

void MixedGraph::remove_edge(int i, int j) {
    check_node(i);
    check_node(j);
    at(i, j) = Mark::none;
    at(j, i) = Mark::none;
}

void MixedGraph::set_mark(int from, int to, Mark m) {
    if (!adjacent(from, to)) throw std::logic_error("set_mark on absent edge");
    if (m == Mark::none) throw std::invalid_argument("use remove_edge to delete");
    at(from, to) = m;
}

std::vector<int> MixedGraph::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n_; ++j) {
        if (at(i, j) != Mark::none) out.push_back(j);
    }
    return out;
}

std::vector<int> MixedGraph::parents(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n_; ++j) {
        if (is_directed(j, i)) out.push_back(j);
    }
    return out;
}

std::vector<int> MixedGraph::children(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n_; ++j) {
        if (is_directed(i, j)) out.push_back(j);
    }
    return out;
}

std::vector<Edge> MixedGraph::edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
            if (adjacent(i, j)) out.push_back({i, j, at(j, i), at(i, j)});
        }
    }
    return out;
}

int MixedGraph::n_edges() const {
    int c = 0;
    for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) c += adjacent(i, j) ? 1 : 0;
    }
    return c;
}

MixedGraph MixedGraph::skeleton() const {
    MixedGraph s(n_);
    for (const auto& e : edges()) s.add_undirected(e.i, e.j);
    return s;
}

bool MixedGraph::has_directed_cycle() const {
    // Kahn's algorithm on the directed part.
    std::vector<int> indeg(n_, 0);
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (is_directed(i, j)) ++indeg[j];
        }
    }
    std::vector<int> stack;
    for (int i = 0; i < n_; ++i) {
        if (indeg[i] == 0) stack.push_back(i);
    }
    int seen = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        ++seen;
        for (int w = 0; w < n_; ++w) {
            if (is_directed(v, w) && --indeg[w] == 0) stack.push_back(w);
        }
    }
    return seen != n_;
}

bool MixedGraph::is_dag() const {
    for (const auto& e : edges()) {
        bool dir = (e.mark_i == Mark::tail && e.mark_j == Mark::arrow) ||
                   (e.mark_i == Mark::arrow && e.mark_j == Mark::tail);
        if (!dir) return false;
    }
    return !has_directed_cycle();
}

void MixedGraph::set_latent(int i, bool flag) {
    check_node(i);
    if (latent_.empty()) latent_.assign(n_, false);
    latent_[i] = flag;
}

char mark_char(Mark m, bool at_first) {
    switch (m) {
        case Mark::tail: return '-';
        case Mark::arrow: return at_first ? '<' : '>';
        case Mark::circle: return 'o';
        case Mark::conflict: return 'x';
        case Mark::none: break;
    }
    throw std::invalid_argument("no character for mark none");
}

Mark parse_mark(char c) {
    switch (c) {
        case '-': return Mark::tail;
        case '>':
        case '<': return Mark::arrow;
        case 'o': return Mark::circle;
        case 'x': return Mark::conflict;
        default: break;
    }
    throw std::invalid_argument(std::string("unknown edge mark '") + c + "'");
}

std::string MixedGraph::to_text() const {
    std::ostringstream os;
    os << "nodes=" << n_ << '\n';
    for (const auto& e : edges()) {
        os << e.i << ' ' << mark_char(e.mark_i, true) << mark_char(e.mark_j, false) << ' ' << e.j
           << '\n';
    }
    return os.str();
}

MixedGraph MixedGraph::from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int n = -1;
    MixedGraph g;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (n < 0) {
            if (line.rfind("nodes=", 0) != 0) {
                throw std::invalid_argument("graph text: expected 'nodes=N' header");
            }
            n = std::stoi(line.substr(6));
            g = MixedGraph(n);
            continue;
        }
        std::istringstream ls(line);
        int i = 0, j = 0;
        std::string marks;
        if (!(ls >> i >> marks >> j) || marks.size() != 2) {
            throw std::invalid_argument("graph text: malformed edge on line " +
                                        std::to_string(lineno));
        }
        g.add_edge(i, j, parse_mark(marks[0]), parse_mark(marks[1]));
    }
    if (n < 0) throw std::invalid_argument("graph text: missing header");
    return g;
}

std::ostream& operator<<(std::ostream& os, const MixedGraph& g) { return os << g.to_text(); }

}  // namespace vcd
