#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <concepts>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace gapcert {

using Vertex = int;
using VertexSet = std::vector<Vertex>;  // sorted, unique

inline constexpr int kInfDist = std::numeric_limits<int>::max();

// Unordered edge stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  auto operator<=>(const Edge&) const = default;
};

inline Edge make_edge(Vertex a, Vertex b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline VertexSet make_vertex_set(std::vector<Vertex> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

template <class G>
concept AdjacencyGraph = requires(const G& g, Vertex v) {
  { g.n() } -> std::convertible_to<int>;
  { g.neighbors(v) } -> std::convertible_to<std::span<const Vertex>>;
};

// Simple d-regular graph; immutable after construction.
class RegularGraph {
 public:
  RegularGraph(int n, int d, std::vector<std::vector<Vertex>> adj) : n_(n), d_(d), adj_(std::move(adj)) {
    if (d < 3 || n < d) throw std::invalid_argument("RegularGraph: need n >= d >= 3");
    if (static_cast<int>(adj_.size()) != n) throw std::invalid_argument("RegularGraph: adjacency size != n");
    for (Vertex v = 0; v < n; ++v) {
      auto& nb = adj_[v];
      std::sort(nb.begin(), nb.end());
      if (static_cast<int>(nb.size()) != d)
        throw std::invalid_argument("RegularGraph: vertex " + std::to_string(v) + " has degree " +
                                    std::to_string(nb.size()) + ", expected " + std::to_string(d));
      for (std::size_t i = 0; i < nb.size(); ++i) {
        if (nb[i] < 0 || nb[i] >= n) throw std::out_of_range("RegularGraph: neighbor out of range");
        if (nb[i] == v) throw std::invalid_argument("RegularGraph: self-loop at " + std::to_string(v));
        if (i > 0 && nb[i] == nb[i - 1])
          throw std::invalid_argument("RegularGraph: parallel edge " + std::to_string(v) + "-" + std::to_string(nb[i]));
      }
    }
    for (Vertex v = 0; v < n; ++v)
      for (Vertex w : adj_[v]) {
        if (!std::binary_search(adj_[w].begin(), adj_[w].end(), v))
          throw std::invalid_argument("RegularGraph: asymmetric adjacency");
        if (v < w) edges_.push_back({v, w});
      }
    std::sort(edges_.begin(), edges_.end());
  }

  static RegularGraph from_edges(int n, std::span<const Edge> edges) {
    if (n <= 0) throw std::invalid_argument("RegularGraph: n must be positive");
    std::vector<std::vector<Vertex>> adj(n);
    for (const Edge& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) throw std::out_of_range("RegularGraph: edge endpoint out of range");
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    int d = static_cast<int>(adj[0].size());
    return RegularGraph(n, d, std::move(adj));
  }

  int n() const { return n_; }
  int d() const { return d_; }
  std::span<const Vertex> neighbors(Vertex v) const { return adj_.at(v); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  bool adjacent(Vertex a, Vertex b) const {
    const auto& nb = adj_.at(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  // Position of e in edges(), or -1.
  int edge_index(Edge e) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || *it != e) return -1;
    return static_cast<int>(it - edges_.begin());
  }

 private:
  int n_;
  int d_;
  std::vector<std::vector<Vertex>> adj_;
  std::vector<Edge> edges_;
};

// Loops are stored twice in their vertex's list, so list length is the degree.
class MultiGraph {
 public:
  explicit MultiGraph(int n) : adj_(n) {}

  void add_edge(Vertex a, Vertex b) {
    adj_.at(a).push_back(b);
    adj_.at(b).push_back(a);
    ++edge_count_;
  }

  int n() const { return static_cast<int>(adj_.size()); }
  std::span<const Vertex> neighbors(Vertex v) const { return adj_.at(v); }
  int degree(Vertex v) const { return static_cast<int>(adj_.at(v).size()); }
  std::size_t edge_count() const { return edge_count_; }

 private:
  std::vector<std::vector<Vertex>> adj_;
  std::size_t edge_count_ = 0;
};

inline RegularGraph complete_graph(int n) {
  std::vector<Edge> es;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) es.push_back({a, b});
  return RegularGraph::from_edges(n, es);
}

inline RegularGraph complete_bipartite(int m) {
  std::vector<Edge> es;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) es.push_back({a, m + b});
  return RegularGraph::from_edges(2 * m, es);
}

// Outer 5-cycle 0..4, spokes to 5..9, inner pentagram.
inline RegularGraph petersen_graph() {
  std::vector<Edge> es;
  for (int i = 0; i < 5; ++i) {
    es.push_back(make_edge(i, (i + 1) % 5));
    es.push_back(make_edge(i, i + 5));
    es.push_back(make_edge(5 + i, 5 + (i + 2) % 5));
  }
  return RegularGraph::from_edges(10, es);
}

inline RegularGraph disjoint_union(const RegularGraph& a, const RegularGraph& b) {
  if (a.d() != b.d()) throw std::invalid_argument("disjoint_union: degree mismatch");
  std::vector<Edge> es(a.edges().begin(), a.edges().end());
  for (const Edge& e : b.edges()) es.push_back({e.u + a.n(), e.v + a.n()});
  return RegularGraph::from_edges(a.n() + b.n(), es);
}

// Complement of a d-regular graph on n vertices; (n-1-d)-regular.
inline RegularGraph complement(const RegularGraph& g) {
  std::vector<std::vector<Vertex>> adj(g.n());
  for (Vertex v = 0; v < g.n(); ++v)
    for (Vertex w = 0; w < g.n(); ++w)
      if (w != v && !g.adjacent(v, w)) adj[v].push_back(w);
  return RegularGraph(g.n(), g.n() - 1 - g.d(), std::move(adj));
}

inline RegularGraph relabel(const RegularGraph& g, std::span<const Vertex> perm) {
  std::vector<Edge> es;
  for (const Edge& e : g.edges()) es.push_back(make_edge(perm[e.u], perm[e.v]));
  return RegularGraph::from_edges(g.n(), es);
}

// Multi-source BFS; vertices farther than max_depth stay at kInfDist.
template <AdjacencyGraph G>
std::vector<int> bfs_distances(const G& g, std::span<const Vertex> sources, int max_depth = kInfDist) {
  const int n = g.n();
  std::vector<int> dist(n, kInfDist);
  std::vector<Vertex> queue;
  queue.reserve(n);
  for (Vertex s : sources) {
    if (s < 0 || s >= n) throw std::out_of_range("bfs: vertex out of range");
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Vertex v = queue[head];
    if (dist[v] >= max_depth) continue;
    for (Vertex w : g.neighbors(v))
      if (dist[w] == kInfDist) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

template <AdjacencyGraph G>
int dist(const G& g, Vertex v, Vertex w) {
  if (w < 0 || w >= g.n()) throw std::out_of_range("dist: vertex out of range");
  Vertex src[] = {v};
  return bfs_distances(g, src)[w];
}

template <AdjacencyGraph G>
int dist_set(const G& g, Vertex v, std::span<const Vertex> s) {
  if (s.empty()) throw std::invalid_argument("dist_set: empty set");
  if (v < 0 || v >= g.n()) throw std::out_of_range("dist_set: vertex out of range");
  return bfs_distances(g, s)[v];
}

template <AdjacencyGraph G>
int dist_edge(const G& g, Vertex v, Edge e) {
  Vertex ends[] = {e.u, e.v};
  return dist_set(g, v, ends);
}

// Edge distance from a vertex-distance table: min over the endpoints.
inline int edge_dist(const std::vector<int>& vd, Edge e) { return std::min(vd[e.u], vd[e.v]); }

template <AdjacencyGraph G>
VertexSet ball(const G& g, std::span<const Vertex> s, int ell) {
  if (ell < 0 || s.empty()) return {};
  auto dist = bfs_distances(g, s, ell);
  VertexSet out;
  for (Vertex v = 0; v < g.n(); ++v)
    if (dist[v] <= ell) out.push_back(v);
  return out;
}

template <AdjacencyGraph G>
VertexSet boundary(const G& g, std::span<const Vertex> s, int ell) {
  if (ell < 0 || s.empty()) return {};
  auto dist = bfs_distances(g, s, ell);
  VertexSet out;
  for (Vertex v = 0; v < g.n(); ++v)
    if (dist[v] == ell) out.push_back(v);
  return out;
}

template <AdjacencyGraph G>
bool is_connected(const G& g) {
  if (g.n() == 0) return true;
  Vertex src[] = {0};
  auto dist = bfs_distances(g, src);
  return std::none_of(dist.begin(), dist.end(), [](int x) { return x == kInfDist; });
}

enum class IndexBase { Zero, One };

// Edge list: "u v" per line, '#' comments, blank lines ignored. The first data
// line is read as an "n d" header when exactly n*d/2 data lines follow it.
inline RegularGraph load_edge_list(std::string_view text, IndexBase base = IndexBase::Zero) {
  struct Row {
    long long a, b;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    long long vals[2];
    int count = 0;
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
    };
    skip_ws();
    while (i < line.size()) {
      if (count == 2) throw ParseError(line_no, "expected two integers");
      auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), vals[count]);
      if (ec != std::errc()) throw ParseError(line_no, "not an integer: '" + std::string(line.substr(i)) + "'");
      i = ptr - line.data();
      if (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ','))
        throw ParseError(line_no, "malformed token");
      ++count;
      skip_ws();
    }
    if (count == 0) continue;
    if (count != 2) throw ParseError(line_no, "expected two integers");
    rows.push_back({vals[0], vals[1], line_no});
    if (end == text.size()) break;
  }
  if (rows.empty()) throw ParseError(line_no, "no edges");

  long long n = -1;
  long long d = -1;
  std::size_t first = 0;
  {
    const Row& h = rows.front();
    if (h.a > 0 && h.b > 0 && (h.a * h.b) % 2 == 0 && static_cast<long long>(rows.size() - 1) == h.a * h.b / 2) {
      n = h.a;
      d = h.b;
      first = 1;
    }
  }
  const long long off = base == IndexBase::One ? 1 : 0;
  if (n < 0) {
    long long mx = -1;
    for (const Row& r : rows) mx = std::max({mx, r.a - off, r.b - off});
    n = mx + 1;
  }
  std::vector<std::vector<Vertex>> adj(n);
  std::vector<std::pair<Edge, std::size_t>> seen;
  for (std::size_t k = first; k < rows.size(); ++k) {
    const Row& r = rows[k];
    long long a = r.a - off, b = r.b - off;
    if (a < 0 || b < 0 || a >= n || b >= n) throw ParseError(r.line, "vertex index out of range");
    if (a == b) throw ParseError(r.line, "self-loop at " + std::to_string(r.a));
    seen.push_back({make_edge(static_cast<Vertex>(a), static_cast<Vertex>(b)), r.line});
    adj[a].push_back(static_cast<Vertex>(b));
    adj[b].push_back(static_cast<Vertex>(a));
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t k = 1; k < seen.size(); ++k)
    if (seen[k].first == seen[k - 1].first)
      throw ParseError(seen[k].second, "duplicate edge " + std::to_string(seen[k].first.u + off) + " " +
                                           std::to_string(seen[k].first.v + off));
  if (d < 0) d = static_cast<long long>(adj[0].size());
  for (long long v = 0; v < n; ++v)
    if (static_cast<long long>(adj[v].size()) != d) {
      std::size_t where = 0;
      for (const auto& [e, ln] : seen)
        if (e.u == v || e.v == v) where = std::max(where, ln);
      throw ParseError(where, "graph is not regular: vertex " + std::to_string(v + off) + " has degree " +
                                  std::to_string(adj[v].size()) + ", expected " + std::to_string(d));
    }
  return RegularGraph(static_cast<int>(n), static_cast<int>(d), std::move(adj));
}

inline std::string save_edge_list(const RegularGraph& g, IndexBase base = IndexBase::Zero) {
  const int off = base == IndexBase::One ? 1 : 0;
  std::ostringstream os;
  os << g.n() << ' ' << g.d() << '\n';
  for (const Edge& e : g.edges()) os << e.u + off << ' ' << e.v + off << '\n';
  return os.str();
}

}  // namespace gapcert
