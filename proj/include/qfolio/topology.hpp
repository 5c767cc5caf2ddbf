#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qfolio::topology {

using Edge = std::pair<int, int>;  // stored normalized, first < second

// Qubit-connectivity graph with an optional proper edge coloring. Value type;
// all operations below are pure functions.
struct CouplingGraph {
  int node_count = 0;
  std::vector<Edge> edges;                      // sorted, no duplicates
  std::optional<std::vector<int>> edge_colors;  // parallel to edges, in {0,1,2}

  std::vector<int> degrees() const;
  int max_degree() const;
  bool is_connected() const;
  void validate() const;  // throws on malformed edges or improper coloring
};

// Path 0-1-...-(n-1).
CouplingGraph line_graph(int n);

// Heavy-hex lattice of rows x cols hexagonal cells: the brick-wall hexagonal
// lattice with every edge subdivided by a midpoint node. Node and edge counts
// are closed-form in (rows, cols), see heavy_hex_node_count/edge_count and
// the README.
CouplingGraph heavy_hex_graph(int rows, int cols);
int heavy_hex_node_count(int rows, int cols);
int heavy_hex_edge_count(int rows, int cols);

// Smallest square-ish heavy-hex lattice with at least n nodes.
CouplingGraph heavy_hex_covering(int n);

// Proper edge coloring with at most 3 colors, greedy in edge-index order with
// backtracking. Requires max degree <= 3; throws if 3 colors do not suffice
// (cannot happen for the generated families).
CouplingGraph color_edges(const CouplingGraph& g);

// Iteratively removes a minimum-degree node until n_target nodes remain.
// Ties prefer a node whose removal keeps the graph connected, then the lowest
// index. Surviving nodes are re-indexed 0..n_target-1 preserving order; an
// existing edge coloring is restricted to the surviving edges.
CouplingGraph trim_to_size(const CouplingGraph& g, int n_target);

// Edge-list text format with optional color column (see README).
void write_graph(std::ostream& os, const CouplingGraph& g);
CouplingGraph read_graph(std::istream& is);
std::string to_text(const CouplingGraph& g);

}  // namespace qfolio::topology
