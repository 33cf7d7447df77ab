#include <algorithm>
#include <functional>
#include <numeric>

#include "cmsovc/structures.hpp"

namespace cmsovc {

namespace {
std::pair<int, int> ordered_pair(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }
}  // namespace

Graph::Graph(std::vector<std::string> vertices,
             const std::vector<std::pair<std::string, std::string>>& edges, GraphEncoding encoding)
    : vertices_(std::move(vertices)), encoding_(encoding) {
  std::set<std::string> seen;
  for (const auto& v : vertices_) {
    if (v.empty()) throw ValidationError("empty vertex name");
    if (!seen.insert(v).second) throw ValidationError("duplicate vertex '" + v + "'");
  }
  for (const auto& [a, b] : edges) {
    auto u = vertex(a), v = vertex(b);
    if (!u || !v) throw ValidationError("edge {" + a + "," + b + "} uses an unknown vertex");
    if (*u == *v) throw ValidationError("self-loop on '" + a + "'");
    edges_.push_back(ordered_pair(*u, *v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  validate();
}

void Graph::validate() {
  for (const auto& [label, vs] : vertex_labels_)
    for (int v : vs)
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
        throw ValidationError("vertex label '" + label + "' on unknown vertex");
  for (const auto& [label, es] : edge_labels_)
    for (int e : es)
      if (e < 0 || static_cast<std::size_t>(e) >= edges_.size())
        throw ValidationError("edge label '" + label + "' on unknown edge");
}

std::optional<int> Graph::vertex(std::string_view name) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

bool Graph::adjacent(int u, int v) const {
  return std::binary_search(edges_.begin(), edges_.end(), ordered_pair(u, v));
}

std::string Graph::edge_name(const Edge& e) const {
  return vertices_.at(static_cast<std::size_t>(e.first)) + "~" + vertices_.at(static_cast<std::size_t>(e.second));
}

Graph Graph::with_vertex_label(const std::string& label, std::set<int> vertices) const {
  Graph g = *this;
  g.vertex_labels_[label] = std::move(vertices);
  g.validate();
  return g;
}

Graph Graph::with_edge_label(const std::string& label, std::set<int> edge_indices) const {
  Graph g = *this;
  g.edge_labels_[label] = std::move(edge_indices);
  g.validate();
  return g;
}

Graph Graph::with_encoding(GraphEncoding encoding) const {
  Graph g = *this;
  g.encoding_ = encoding;
  return g;
}

namespace {

void check_label_name(const std::string& label, GraphEncoding enc) {
  const bool clash = enc == GraphEncoding::Adjacency ? label == kAdjacency : (label == kIncidence || label == kVertexSort);
  if (clash)
    throw ValidationError("label name '" + label + "' is reserved");
}

}  // namespace

Structure Graph::to_structure() const {
  RelationContents rc;
  std::vector<RelationSymbol> rels;
  std::vector<ElementId> domain = vertices_;
  if (encoding_ == GraphEncoding::Adjacency) {
    rels.push_back({std::string(kAdjacency), 2});
    auto& e = rc[std::string(kAdjacency)];
    for (const auto& [u, v] : edges_) {
      e.push_back({vertices_[static_cast<std::size_t>(u)], vertices_[static_cast<std::size_t>(v)]});
      e.push_back({vertices_[static_cast<std::size_t>(v)], vertices_[static_cast<std::size_t>(u)]});
    }
  } else {
    rels.push_back({std::string(kIncidence), 2});
    rels.push_back({std::string(kVertexSort), 1});
    auto& inc = rc[std::string(kIncidence)];
    auto& vert = rc[std::string(kVertexSort)];
    for (const auto& v : vertices_) vert.push_back({v});
    for (const auto& e : edges_) {
      const auto name = edge_name(e);
      domain.push_back(name);
      inc.push_back({name, vertices_[static_cast<std::size_t>(e.first)]});
      inc.push_back({name, vertices_[static_cast<std::size_t>(e.second)]});
    }
  }
  for (const auto& [label, vs] : vertex_labels_) {
    check_label_name(label, encoding_);
    rels.push_back({label, 1});
    auto& rows = rc[label];
    for (int v : vs) rows.push_back({vertices_[static_cast<std::size_t>(v)]});
  }
  for (const auto& [label, es] : edge_labels_) {
    if (encoding_ == GraphEncoding::Adjacency) continue;  // edges are not elements here
    check_label_name(label, encoding_);
    if (vertex_labels_.count(label) == 0) rels.push_back({label, 1});
    auto& rows = rc[label];
    for (int e : es) rows.push_back({edge_name(edges_[static_cast<std::size_t>(e)])});
  }
  return build_structure(Signature(std::move(rels)), std::move(domain), rc,
                         encoding_ == GraphEncoding::Adjacency ? StructureKind::GraphAdjacency
                                                               : StructureKind::GraphIncidence);
}

Graph Graph::from_structure(const Structure& s) {
  if (s.kind() == StructureKind::GraphAdjacency) {
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& t : s.tuples(kAdjacency))
      if (t[0] < t[1]) edges.emplace_back(s.element(t[0]), s.element(t[1]));
    Graph g(s.domain(), edges, GraphEncoding::Adjacency);
    for (const auto& r : s.signature().relations()) {
      if (r.name == kAdjacency) continue;
      std::set<int> vs;
      for (const auto& t : s.tuples(r.name)) vs.insert(t[0]);
      g = g.with_vertex_label(r.name, std::move(vs));
    }
    return g;
  }
  if (s.kind() == StructureKind::GraphIncidence) {
    std::vector<std::string> vertices;
    std::vector<int> vertex_pos(s.size(), -1);
    const auto vert = *s.signature().find(kVertexSort);
    for (std::size_t x = 0; x < s.size(); ++x) {
      const int a[1] = {static_cast<int>(x)};
      if (s.holds(vert, a)) {
        vertex_pos[x] = static_cast<int>(vertices.size());
        vertices.push_back(s.domain()[x]);
      }
    }
    std::map<int, std::vector<int>> ends;
    for (const auto& t : s.tuples(kIncidence)) ends[t[0]].push_back(t[1]);
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [e, vs] : ends) edges.emplace_back(s.element(vs[0]), s.element(vs[1]));
    Graph g(vertices, edges, GraphEncoding::Incidence);
    for (const auto& r : s.signature().relations()) {
      if (r.name == kIncidence || r.name == kVertexSort) continue;
      std::set<int> vs, es;
      for (const auto& t : s.tuples(r.name)) {
        if (vertex_pos[static_cast<std::size_t>(t[0])] >= 0) {
          vs.insert(vertex_pos[static_cast<std::size_t>(t[0])]);
        } else {
          const auto& ve = ends[t[0]];
          auto key = ordered_pair(vertex_pos[static_cast<std::size_t>(ve[0])], vertex_pos[static_cast<std::size_t>(ve[1])]);
          auto it = std::lower_bound(g.edges_.begin(), g.edges_.end(), key);
          es.insert(static_cast<int>(it - g.edges_.begin()));
        }
      }
      if (!vs.empty()) g = g.with_vertex_label(r.name, std::move(vs));
      if (!es.empty()) g = g.with_edge_label(r.name, std::move(es));
    }
    return g;
  }
  throw ValidationError("structure is not tagged as a graph");
}

Graph Graph::bipartite_incidence() const {
  std::vector<std::string> vs = vertices_;
  std::vector<std::pair<std::string, std::string>> es;
  for (const auto& e : edges_) {
    const auto name = edge_name(e);
    vs.push_back(name);
    es.emplace_back(name, vertices_[static_cast<std::size_t>(e.first)]);
    es.emplace_back(name, vertices_[static_cast<std::size_t>(e.second)]);
  }
  Graph out(std::move(vs), es, GraphEncoding::Adjacency);
  std::set<int> originals;
  for (std::size_t i = 0; i < vertices_.size(); ++i) originals.insert(static_cast<int>(i));
  out = out.with_vertex_label(std::string(kVertexSort), std::move(originals));
  for (const auto& [label, ls] : vertex_labels_) out = out.with_vertex_label(label, ls);
  for (const auto& [label, ls] : edge_labels_) {
    std::set<int> shifted;
    for (int e : ls) shifted.insert(static_cast<int>(vertices_.size()) + e);
    auto merged = out.vertex_labels_.count(label) ? out.vertex_labels_.at(label) : std::set<int>{};
    merged.insert(shifted.begin(), shifted.end());
    out = out.with_vertex_label(label, std::move(merged));
  }
  return out;
}

Graph make_grid_graph(int n) {
  if (n < 1) throw ValidationError("grid side must be at least 1");
  std::vector<std::string> vs;
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i) vs.push_back(grid_cell(i, j));
  std::vector<std::pair<std::string, std::string>> es;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      if (i < n) es.emplace_back(grid_cell(i, j), grid_cell(i + 1, j));
      if (j < n) es.emplace_back(grid_cell(i, j), grid_cell(i, j + 1));
    }
  return Graph(std::move(vs), es);
}

Graph incidence_graph(const Graph& graph) {
  if (graph.encoding() != GraphEncoding::Adjacency)
    throw ValidationError("incidence_graph expects an adjacency-encoded graph");
  return graph.with_encoding(GraphEncoding::Incidence);
}

bool isomorphic(const Graph& a, const Graph& b) {
  const auto n = a.vertex_count();
  if (n != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  if (a.vertex_labels() .size() != b.vertex_labels().size()) return false;
  auto degrees = [](const Graph& g) {
    std::vector<int> d(g.vertex_count(), 0);
    for (const auto& [u, v] : g.edges()) ++d[static_cast<std::size_t>(u)], ++d[static_cast<std::size_t>(v)];
    return d;
  };
  auto label_sig = [](const Graph& g, int v) {
    std::vector<std::string> ls;
    for (const auto& [l, vs] : g.vertex_labels())
      if (vs.count(v)) ls.push_back(l);
    return ls;
  };
  const auto da = degrees(a), db = degrees(b);
  {
    auto sa = da, sb = db;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }
  std::vector<int> map(n, -1);
  std::vector<char> used(n, 0);
  std::function<bool(std::size_t)> extend = [&](std::size_t v) -> bool {
    if (v == n) return true;
    for (std::size_t w = 0; w < n; ++w) {
      if (used[w] || da[v] != db[w]) continue;
      if (label_sig(a, static_cast<int>(v)) != label_sig(b, static_cast<int>(w))) continue;
      bool ok = true;
      for (std::size_t u = 0; u < v && ok; ++u)
        ok = a.adjacent(static_cast<int>(u), static_cast<int>(v)) ==
             b.adjacent(map[u], static_cast<int>(w));
      if (!ok) continue;
      map[v] = static_cast<int>(w);
      used[w] = 1;
      if (extend(v + 1)) return true;
      used[w] = 0;
    }
    return false;
  };
  return extend(0);
}

}  // namespace cmsovc
