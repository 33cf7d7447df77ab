#pragma once

// Finite relational structures and the concrete families used by the rest of
// the library: labeled binary trees, grids, grid graphs and graphs in
// adjacency or incidence encoding.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cmsovc/error.hpp"

namespace cmsovc {

struct RelationSymbol {
  std::string name;
  int arity = 1;

  bool operator==(const RelationSymbol&) const = default;
  auto operator<=>(const RelationSymbol&) const = default;
};

/// Relation names with arities. Unary relations double as label predicates.
class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<RelationSymbol> relations);

  const std::vector<RelationSymbol>& relations() const noexcept { return relations_; }
  std::size_t size() const noexcept { return relations_.size(); }
  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }
  /// Throws ValidationError for unknown names.
  int arity(std::string_view name) const;
  bool is_label(std::string_view name) const { return arity(name) == 1; }

  /// Union of two signatures; a name declared with two arities is an error.
  Signature merged(const Signature& other) const;
  Signature with(RelationSymbol symbol) const;

  bool operator==(const Signature&) const = default;

 private:
  std::vector<RelationSymbol> relations_;
};

using ElementId = std::string;
/// A tuple of domain positions.
using Tuple = std::vector<int>;
using RelationContents = std::map<std::string, std::vector<std::vector<ElementId>>>;

enum class StructureKind { Tree, Grid, GraphAdjacency, GraphIncidence, Generic };

std::string_view to_string(StructureKind kind);
StructureKind structure_kind_from_string(std::string_view text);

/// Immutable finite relational structure. Elements are addressed by their
/// position in the ordered domain; that order is the canonical iteration order.
class Structure {
 public:
  Structure() = default;

  const Signature& signature() const noexcept { return signature_; }
  const std::vector<ElementId>& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return domain_.size(); }
  StructureKind kind() const noexcept { return kind_; }

  std::optional<int> index_of(std::string_view element) const;
  /// Throws ValidationError when the element is not in the domain.
  int require_index(std::string_view element) const;
  const ElementId& element(int index) const { return domain_.at(static_cast<std::size_t>(index)); }

  /// Sorted, duplicate-free tuples of the relation at signature position `relation`.
  const std::vector<Tuple>& tuples(std::size_t relation) const { return relations_.at(relation); }
  const std::vector<Tuple>& tuples(std::string_view name) const;

  bool holds(std::size_t relation, std::span<const int> args) const;
  bool holds(std::string_view name, std::span<const int> args) const;

  /// Same domain and relations under a different kind tag (validated again).
  Structure retagged(StructureKind kind) const;
  /// Adds unary relations; used to attach guessed predicates to a structure.
  Structure with_unary(const std::map<std::string, std::vector<bool>>& predicates) const;
  /// Restriction of the structure to the relations of `sub` (which must be a sub-signature).
  Structure reduct(const Signature& sub) const;

  RelationContents contents() const;

  friend bool operator==(const Structure& a, const Structure& b) {
    return a.kind_ == b.kind_ && a.signature_ == b.signature_ && a.domain_ == b.domain_ &&
           a.relations_ == b.relations_;
  }
  friend bool operator<(const Structure& a, const Structure& b) {
    return std::tie(a.domain_, a.relations_) < std::tie(b.domain_, b.relations_);
  }

 private:
  friend Structure build_structure(Signature, std::vector<ElementId>, const RelationContents&,
                                   StructureKind);
  friend Structure make_grid(int n);
  void index();

  Signature signature_;
  std::vector<ElementId> domain_;
  std::unordered_map<std::string, int> positions_;
  std::vector<std::vector<Tuple>> relations_;
  StructureKind kind_ = StructureKind::Generic;

  // Membership indexes: unary relations as flags, binary relations as
  // row-major matrices, anything wider as a sorted tuple list.
  std::vector<std::vector<char>> dense_;
};

/// Validates arities, domain membership and the invariants implied by `kind`.
Structure build_structure(Signature signature, std::vector<ElementId> domain,
                          const RelationContents& contents,
                          StructureKind kind = StructureKind::Generic);

// ---------------------------------------------------------------------------
// Labeled binary trees.

inline constexpr std::string_view kLeftChild = "left";
inline constexpr std::string_view kRightChild = "right";
inline constexpr std::string_view kLabelPrefix = "label_";

inline std::string label_predicate(std::string_view symbol) {
  return std::string(kLabelPrefix) + std::string(symbol);
}

/// Signature of trees over `alphabet`: left(p,c), right(p,c) and label_<a>(v).
/// `left(p,c)` holds when c is the left child of p.
Signature tree_signature(const std::vector<std::string>& alphabet);

inline constexpr int kNoNode = -1;

/// Rooted binary tree with one alphabet symbol per node.
class Tree {
 public:
  Tree() = default;
  /// `left[v]`/`right[v]` are child positions or kNoNode. Names default to n0, n1, ...
  Tree(std::vector<std::string> alphabet, std::vector<int> labels, std::vector<int> left,
       std::vector<int> right, std::vector<std::string> names = {});

  static Tree from_structure(const Structure& structure);
  Structure to_structure() const;

  std::size_t size() const noexcept { return labels_.size(); }
  int root() const noexcept { return root_; }
  int left(int v) const { return left_.at(static_cast<std::size_t>(v)); }
  int right(int v) const { return right_.at(static_cast<std::size_t>(v)); }
  int parent(int v) const { return parent_.at(static_cast<std::size_t>(v)); }
  int label(int v) const { return labels_.at(static_cast<std::size_t>(v)); }
  const std::string& symbol(int v) const { return alphabet_.at(static_cast<std::size_t>(label(v))); }
  const std::string& name(int v) const { return names_.at(static_cast<std::size_t>(v)); }
  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Children before parents.
  const std::vector<int>& postorder() const noexcept { return postorder_; }
  /// True when `ancestor` lies on the path from `v` to the root (v counts as its own ancestor).
  bool is_ancestor(int ancestor, int v) const;
  std::optional<int> node(std::string_view name) const;

  Tree relabeled(std::vector<int> labels) const;

  bool operator==(const Tree& other) const {
    return alphabet_ == other.alphabet_ && labels_ == other.labels_ && left_ == other.left_ &&
           right_ == other.right_ && names_ == other.names_;
  }

 private:
  void validate_and_index();

  std::vector<std::string> alphabet_;
  std::vector<int> labels_;
  std::vector<int> left_;
  std::vector<int> right_;
  std::vector<int> parent_;
  std::vector<std::string> names_;
  std::vector<int> postorder_;
  int root_ = kNoNode;
};

/// Every tree shape with exactly `nodes` nodes, each labeled with every
/// combination of symbols from an alphabet of `alphabet.size()` symbols.
std::vector<Tree> enumerate_trees(int nodes, const std::vector<std::string>& alphabet);
/// Same, over all sizes 1..max_nodes.
std::vector<Tree> enumerate_trees_up_to(int max_nodes, const std::vector<std::string>& alphabet);
/// Random shape and labels: each new node hangs off a uniformly chosen free child slot.
Tree random_tree(int nodes, const std::vector<std::string>& alphabet, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Grids and graphs.

inline constexpr std::string_view kHorizontal = "H";
inline constexpr std::string_view kVertical = "V";
inline constexpr std::string_view kAdjacency = "E";
inline constexpr std::string_view kIncidence = "inc";
inline constexpr std::string_view kVertexSort = "vert";

/// Element name of grid cell (i, j): "i,j".
std::string grid_cell(int i, int j);
std::optional<std::pair<int, int>> parse_grid_cell(std::string_view name);

/// The n x n grid over {H, V}: H((i,j),(i+1,j)) and V((i,j),(i,j+1)).
Structure make_grid(int n);

enum class GraphEncoding { Adjacency, Incidence };

/// Simple undirected graph with optional vertex/edge labels.
///
/// The encoding tag selects how `to_structure` renders it: adjacency encoding
/// (domain V, symmetric E) or incidence encoding (domain V followed by one
/// element per edge, inc(e,u) for every endpoint u of e, and the reserved
/// unary predicate `vert` marking the original vertices).
class Graph {
 public:
  using Edge = std::pair<int, int>;

  Graph() = default;
  Graph(std::vector<std::string> vertices, const std::vector<std::pair<std::string, std::string>>& edges,
        GraphEncoding encoding = GraphEncoding::Adjacency);

  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  /// Edges as (u, v) with u < v, sorted.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  GraphEncoding encoding() const noexcept { return encoding_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::optional<int> vertex(std::string_view name) const;
  bool adjacent(int u, int v) const;
  /// Element name of an edge in the incidence encoding: "u~v".
  std::string edge_name(const Edge& e) const;

  const std::map<std::string, std::set<int>>& vertex_labels() const noexcept { return vertex_labels_; }
  const std::map<std::string, std::set<int>>& edge_labels() const noexcept { return edge_labels_; }
  Graph with_vertex_label(const std::string& label, std::set<int> vertices) const;
  Graph with_edge_label(const std::string& label, std::set<int> edge_indices) const;
  Graph with_encoding(GraphEncoding encoding) const;

  Structure to_structure() const;
  /// Accepts structures of kind graph-adj or graph-inc.
  static Graph from_structure(const Structure& structure);

  /// The bipartite graph on V ∪ E whose edges are the incidences, with the
  /// original vertices carrying the `vert` label.
  Graph bipartite_incidence() const;

  bool operator==(const Graph&) const = default;

 private:
  void validate();

  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  GraphEncoding encoding_ = GraphEncoding::Adjacency;
  std::map<std::string, std::set<int>> vertex_labels_;
  std::map<std::string, std::set<int>> edge_labels_;
};

/// Vertices (i,j) of [n]x[n], adjacent when |i-i'|+|j-j'| = 1.
Graph make_grid_graph(int n);
/// The same graph tagged with the incidence encoding.
Graph incidence_graph(const Graph& graph);

/// Graph-level isomorphism test by brute force over vertex bijections (small graphs).
bool isomorphic(const Graph& a, const Graph& b);

// ---------------------------------------------------------------------------
// Text format.

/// JSON document {kind, signature, domain, relations}; printing is canonical.
std::string print_structure(const Structure& structure);
Structure parse_structure(std::string_view text);

}  // namespace cmsovc
