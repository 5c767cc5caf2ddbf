#include "qfolio/topology.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qfolio::topology {

namespace {

Edge normalized(int u, int v) {
  if (u == v) throw std::invalid_argument("graph edge is a self-loop");
  return u < v ? Edge{u, v} : Edge{v, u};
}

std::vector<std::vector<int>> adjacency(const CouplingGraph& g) {
  std::vector<std::vector<int>> adj(g.node_count);
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

bool connected_subset(const std::vector<std::vector<int>>& adj,
                      const std::vector<bool>& alive, int n_alive) {
  if (n_alive == 0) return true;
  int start = -1;
  for (int i = 0; i < static_cast<int>(alive.size()); ++i) {
    if (alive[i]) {
      start = i;
      break;
    }
  }
  std::vector<bool> seen(alive.size(), false);
  std::vector<int> stack{start};
  seen[start] = true;
  int count = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++count;
    for (int v : adj[u]) {
      if (alive[v] && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return count == n_alive;
}

}  // namespace

std::vector<int> CouplingGraph::degrees() const {
  std::vector<int> deg(node_count, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

int CouplingGraph::max_degree() const {
  int best = 0;
  for (int d : degrees()) best = std::max(best, d);
  return best;
}

bool CouplingGraph::is_connected() const {
  if (node_count == 0) return true;
  const auto adj = adjacency(*this);
  std::vector<bool> alive(node_count, true);
  return connected_subset(adj, alive, node_count);
}

void CouplingGraph::validate() const {
  std::set<Edge> seen;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= node_count || v >= node_count) {
      throw std::invalid_argument("graph edge endpoint out of range");
    }
    if (u == v) throw std::invalid_argument("graph edge is a self-loop");
    if (u > v) throw std::invalid_argument("graph edge not normalized");
    if (!seen.insert({u, v}).second) {
      throw std::invalid_argument("duplicate graph edge");
    }
  }
  if (edge_colors) {
    if (edge_colors->size() != edges.size()) {
      throw std::invalid_argument("edge color list size mismatch");
    }
    std::vector<std::vector<int>> at_node(node_count);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int c = (*edge_colors)[e];
      if (c < 0 || c > 2) throw std::invalid_argument("edge color not in {0,1,2}");
      for (int node : {edges[e].first, edges[e].second}) {
        auto& colors = at_node[node];
        if (std::find(colors.begin(), colors.end(), c) != colors.end()) {
          throw std::invalid_argument("incident edges share a color");
        }
        colors.push_back(c);
      }
    }
  }
}

CouplingGraph line_graph(int n) {
  if (n < 2) throw std::invalid_argument("line_graph: n must be >= 2");
  CouplingGraph g;
  g.node_count = n;
  g.edges.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  return g;
}

int heavy_hex_node_count(int rows, int cols) {
  // Hexagonal (brick-wall) lattice counts, then one extra node per edge.
  const int v_hex = 2 * (2 * cols + 1) + (rows - 1) * (2 * cols + 2);
  return v_hex + heavy_hex_edge_count(rows, cols) / 2;
}

int heavy_hex_edge_count(int rows, int cols) {
  const int e_hex =
      4 * cols + (rows - 1) * (2 * cols + 1) + rows * (cols + 1);
  return 2 * e_hex;  // subdivision doubles the edge count
}

CouplingGraph heavy_hex_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("heavy_hex_graph: rows and cols must be >= 1");
  }
  // Hexagonal cells laid out as a brick wall. Cell (a, b) spans node rows
  // {a, a+1} and columns [2b + (a & 1), 2b + (a & 1) + 2]; its boundary is the
  // top path, the bottom path, and two vertical struts at the span ends.
  std::set<std::pair<int, int>> nodes;  // (row, col)
  std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> hex_edges;
  auto add_edge = [&](std::pair<int, int> p, std::pair<int, int> q) {
    nodes.insert(p);
    nodes.insert(q);
    hex_edges.insert({std::min(p, q), std::max(p, q)});
  };
  for (int a = 0; a < rows; ++a) {
    const int shift = a & 1;
    for (int b = 0; b < cols; ++b) {
      const int x0 = 2 * b + shift;
      for (int x = x0; x < x0 + 2; ++x) {
        add_edge({a, x}, {a, x + 1});
        add_edge({a + 1, x}, {a + 1, x + 1});
      }
      add_edge({a, x0}, {a + 1, x0});
      add_edge({a, x0 + 2}, {a + 1, x0 + 2});
    }
  }
  std::map<std::pair<int, int>, int> index;
  for (const auto& p : nodes) index.emplace(p, static_cast<int>(index.size()));

  CouplingGraph g;
  const int n_hex = static_cast<int>(nodes.size());
  g.node_count = n_hex + static_cast<int>(hex_edges.size());
  int next = n_hex;  // subdivision nodes follow the lattice nodes
  for (const auto& [p, q] : hex_edges) {
    const int mid = next++;
    g.edges.push_back(normalized(index.at(p), mid));
    g.edges.push_back(normalized(index.at(q), mid));
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

CouplingGraph heavy_hex_covering(int n) {
  if (n < 2) throw std::invalid_argument("heavy_hex_covering: n must be >= 2");
  // First fit in the order (1,1), (1,2), (2,1), (2,2), (1,3), (2,3), ...
  for (int size = 1;; ++size) {
    for (int rows = 1; rows <= size; ++rows) {
      for (int cols = 1; cols <= size; ++cols) {
        if (std::max(rows, cols) != size) continue;
        if (heavy_hex_node_count(rows, cols) >= n) {
          return heavy_hex_graph(rows, cols);
        }
      }
    }
  }
}

CouplingGraph color_edges(const CouplingGraph& g) {
  g.validate();
  if (g.max_degree() > 3) {
    throw std::invalid_argument(
        "color_edges: max degree exceeds 3, no 3-color edge coloring exists");
  }
  const int m = static_cast<int>(g.edges.size());
  std::vector<int> colors(m, -1);
  std::vector<std::array<bool, 3>> used;  // per node
  used.assign(g.node_count, {false, false, false});

  // Greedy in edge-index order with backtracking.
  long long steps = 0;
  const long long step_limit = 50'000'000;
  int e = 0;
  while (e < m) {
    if (++steps > step_limit) {
      throw std::runtime_error("color_edges: backtracking budget exhausted");
    }
    const auto& [u, v] = g.edges[e];
    int c = colors[e] + 1;  // next candidate (fresh edges start at 0)
    if (colors[e] >= 0) {
      used[u][colors[e]] = used[v][colors[e]] = false;
      colors[e] = -1;
    }
    while (c < 3 && (used[u][c] || used[v][c])) ++c;
    if (c < 3) {
      colors[e] = c;
      used[u][c] = used[v][c] = true;
      ++e;
    } else {
      if (e == 0) {
        throw std::runtime_error("color_edges: 3 colors are insufficient");
      }
      --e;  // backtrack and advance the previous edge's color
    }
  }
  CouplingGraph out = g;
  out.edge_colors = colors;
  return out;
}

CouplingGraph trim_to_size(const CouplingGraph& g, int n_target) {
  g.validate();
  if (n_target > g.node_count) {
    throw std::invalid_argument("trim_to_size: n_target exceeds node count");
  }
  if (n_target < 1) throw std::invalid_argument("trim_to_size: n_target < 1");
  if (!g.is_connected()) {
    throw std::invalid_argument("trim_to_size: graph must be connected");
  }

  const auto adj = adjacency(g);
  std::vector<bool> alive(g.node_count, true);
  std::vector<int> degree = g.degrees();
  int n_alive = g.node_count;

  while (n_alive > n_target) {
    int min_deg = g.node_count + 1;
    for (int i = 0; i < g.node_count; ++i) {
      if (alive[i]) min_deg = std::min(min_deg, degree[i]);
    }
    int pick = -1;
    for (int i = 0; i < g.node_count && pick < 0; ++i) {
      if (!alive[i] || degree[i] != min_deg) continue;
      alive[i] = false;
      if (connected_subset(adj, alive, n_alive - 1)) pick = i;
      alive[i] = true;
    }
    if (pick < 0) {  // no removal preserves connectivity; fall back to index order
      for (int i = 0; i < g.node_count; ++i) {
        if (alive[i] && degree[i] == min_deg) {
          pick = i;
          break;
        }
      }
    }
    alive[pick] = false;
    --n_alive;
    for (int v : adj[pick]) {
      if (alive[v]) --degree[v];
    }
  }

  std::vector<int> new_index(g.node_count, -1);
  int next = 0;
  for (int i = 0; i < g.node_count; ++i) {
    if (alive[i]) new_index[i] = next++;
  }
  CouplingGraph out;
  out.node_count = n_target;
  std::vector<int> colors;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [u, v] = g.edges[e];
    if (alive[u] && alive[v]) {
      out.edges.push_back({new_index[u], new_index[v]});
      if (g.edge_colors) colors.push_back((*g.edge_colors)[e]);
    }
  }
  if (g.edge_colors) out.edge_colors = std::move(colors);
  return out;
}

void write_graph(std::ostream& os, const CouplingGraph& g) {
  os << "nodes " << g.node_count << "\n";
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    os << g.edges[e].first << " " << g.edges[e].second;
    if (g.edge_colors) os << " " << (*g.edge_colors)[e];
    os << "\n";
  }
}

CouplingGraph read_graph(std::istream& is) {
  CouplingGraph g;
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("graph file: empty input");
  }
  {
    std::istringstream header(line);
    std::string tag;
    if (!(header >> tag >> g.node_count) || tag != "nodes") {
      throw std::runtime_error("graph file: expected 'nodes <count>' header");
    }
  }
  std::vector<int> colors;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u >> v)) {
      throw std::runtime_error("graph file: malformed edge line '" + line + "'");
    }
    g.edges.push_back(normalized(u, v));
    int c;
    if (ls >> c) colors.push_back(c);
  }
  if (!colors.empty()) {
    if (colors.size() != g.edges.size()) {
      throw std::runtime_error("graph file: color column is partial");
    }
    g.edge_colors = std::move(colors);
  }
  g.validate();
  return g;
}

std::string to_text(const CouplingGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

}  // namespace qfolio::topology
