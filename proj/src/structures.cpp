#include "cmsovc/structures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>

namespace cmsovc {

namespace {
std::pair<int, int> ordered_pair(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }
}  // namespace

// ---------------------------------------------------------------------------
// Signature

Signature::Signature(std::vector<RelationSymbol> relations) : relations_(std::move(relations)) {
  std::set<std::string> seen;
  for (const auto& r : relations_) {
    if (r.name.empty()) throw ValidationError("relation with empty name");
    if (r.arity < 1) throw ValidationError("relation '" + r.name + "' has non-positive arity");
    if (!seen.insert(r.name).second) throw ValidationError("duplicate relation '" + r.name + "'");
  }
}

std::optional<std::size_t> Signature::find(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].name == name) return i;
  return std::nullopt;
}

int Signature::arity(std::string_view name) const {
  auto i = find(name);
  if (!i) throw ValidationError("unknown relation '" + std::string(name) + "'");
  return relations_[*i].arity;
}

Signature Signature::merged(const Signature& other) const {
  std::vector<RelationSymbol> out = relations_;
  for (const auto& r : other.relations_) {
    if (auto i = find(r.name)) {
      if (relations_[*i].arity != r.arity)
        throw ValidationError("relation '" + r.name + "' declared with two arities");
      continue;
    }
    out.push_back(r);
  }
  return Signature(std::move(out));
}

Signature Signature::with(RelationSymbol symbol) const {
  return merged(Signature({std::move(symbol)}));
}

// ---------------------------------------------------------------------------
// Structure

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::Tree: return "tree";
    case StructureKind::Grid: return "grid";
    case StructureKind::GraphAdjacency: return "graph-adj";
    case StructureKind::GraphIncidence: return "graph-inc";
    case StructureKind::Generic: return "generic";
  }
  return "generic";
}

StructureKind structure_kind_from_string(std::string_view text) {
  if (text == "tree") return StructureKind::Tree;
  if (text == "grid") return StructureKind::Grid;
  if (text == "graph-adj") return StructureKind::GraphAdjacency;
  if (text == "graph-inc") return StructureKind::GraphIncidence;
  if (text == "generic") return StructureKind::Generic;
  throw ValidationError("unknown structure kind '" + std::string(text) + "'");
}

std::optional<int> Structure::index_of(std::string_view element) const {
  auto it = positions_.find(std::string(element));
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

int Structure::require_index(std::string_view element) const {
  auto i = index_of(element);
  if (!i) throw ValidationError("element '" + std::string(element) + "' is not in the domain");
  return *i;
}

const std::vector<Tuple>& Structure::tuples(std::string_view name) const {
  auto i = signature_.find(name);
  if (!i) throw ValidationError("unknown relation '" + std::string(name) + "'");
  return relations_[*i];
}

bool Structure::holds(std::size_t relation, std::span<const int> args) const {
  const auto n = domain_.size();
  switch (args.size()) {
    case 1: return dense_[relation][static_cast<std::size_t>(args[0])] != 0;
    case 2:
      return dense_[relation][static_cast<std::size_t>(args[0]) * n + static_cast<std::size_t>(args[1])] != 0;
    default: {
      const auto& ts = relations_[relation];
      return std::binary_search(ts.begin(), ts.end(), Tuple(args.begin(), args.end()));
    }
  }
}

bool Structure::holds(std::string_view name, std::span<const int> args) const {
  auto i = signature_.find(name);
  if (!i) throw ValidationError("unknown relation '" + std::string(name) + "'");
  if (static_cast<int>(args.size()) != signature_.relations()[*i].arity)
    throw ValidationError("arity mismatch for '" + std::string(name) + "'");
  return holds(*i, args);
}

void Structure::index() {
  positions_.clear();
  for (std::size_t i = 0; i < domain_.size(); ++i) positions_.emplace(domain_[i], static_cast<int>(i));
  const auto n = domain_.size();
  dense_.assign(relations_.size(), {});
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    const int arity = signature_.relations()[r].arity;
    if (arity == 1) {
      dense_[r].assign(n, 0);
      for (const auto& t : relations_[r]) dense_[r][static_cast<std::size_t>(t[0])] = 1;
    } else if (arity == 2) {
      dense_[r].assign(n * n, 0);
      for (const auto& t : relations_[r])
        dense_[r][static_cast<std::size_t>(t[0]) * n + static_cast<std::size_t>(t[1])] = 1;
    }
  }
}

RelationContents Structure::contents() const {
  RelationContents out;
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    auto& rows = out[signature_.relations()[r].name];
    for (const auto& t : relations_[r]) {
      std::vector<ElementId> row;
      for (int e : t) row.push_back(domain_[static_cast<std::size_t>(e)]);
      rows.push_back(std::move(row));
    }
  }
  return out;
}

Structure Structure::retagged(StructureKind kind) const {
  return build_structure(signature_, domain_, contents(), kind);
}

Structure Structure::with_unary(const std::map<std::string, std::vector<bool>>& predicates) const {
  Signature sig = signature_;
  RelationContents rc = contents();
  for (const auto& [name, flags] : predicates) {
    if (sig.contains(name)) throw ValidationError("predicate '" + name + "' already in the signature");
    if (flags.size() != domain_.size()) throw ValidationError("predicate '" + name + "' has wrong length");
    sig = sig.with({name, 1});
    auto& rows = rc[name];
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) rows.push_back({domain_[i]});
  }
  return build_structure(std::move(sig), domain_, rc, StructureKind::Generic);
}

Structure Structure::reduct(const Signature& sub) const {
  RelationContents rc;
  auto all = contents();
  for (const auto& r : sub.relations()) {
    if (!signature_.contains(r.name) || signature_.arity(r.name) != r.arity)
      throw ValidationError("relation '" + r.name + "' is not part of the structure's signature");
    rc[r.name] = all[r.name];
  }
  return build_structure(sub, domain_, rc, StructureKind::Generic);
}

namespace {

void validate_grid(const Structure& s) {
  const auto& sig = s.signature();
  if (sig.size() != 2 || !sig.contains(kHorizontal) || !sig.contains(kVertical))
    throw ValidationError("a grid has exactly the relations H and V");
  const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.size()))));
  if (n < 1 || static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != s.size())
    throw ValidationError("grid domain is not a square");
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      if (!s.index_of(grid_cell(i, j)))
        throw ValidationError("grid domain lacks cell " + grid_cell(i, j));
  Structure expected = make_grid(n);
  for (std::string_view rel : {kHorizontal, kVertical}) {
    std::set<std::pair<std::string, std::string>> want, have;
    for (const auto& t : expected.tuples(rel)) want.emplace(expected.element(t[0]), expected.element(t[1]));
    for (const auto& t : s.tuples(rel)) have.emplace(s.element(t[0]), s.element(t[1]));
    for (const auto& p : have)
      if (!want.count(p))
        throw ValidationError(std::string(rel) + "((" + p.first + "),(" + p.second +
                              ")) is not a grid successor pair");
    if (want != have) throw ValidationError("grid relation " + std::string(rel) + " is incomplete");
  }
}

void validate_adjacency_graph(const Structure& s) {
  auto e = s.signature().find(kAdjacency);
  if (!e || s.signature().relations()[*e].arity != 2)
    throw ValidationError("adjacency-encoded graphs need a binary relation E");
  for (const auto& r : s.signature().relations())
    if (r.name != kAdjacency && r.arity != 1)
      throw ValidationError("graph structures only carry E and unary labels");
  for (const auto& t : s.tuples(*e)) {
    if (t[0] == t[1]) throw ValidationError("self-loop on " + s.element(t[0]));
    const int rev[2] = {t[1], t[0]};
    if (!s.holds(*e, rev)) throw ValidationError("E is not symmetric");
  }
}

void validate_incidence_graph(const Structure& s) {
  auto inc = s.signature().find(kIncidence);
  auto vert = s.signature().find(kVertexSort);
  if (!inc || s.signature().relations()[*inc].arity != 2 || !vert ||
      s.signature().relations()[*vert].arity != 1)
    throw ValidationError("incidence-encoded graphs need inc/2 and vert/1");
  for (const auto& r : s.signature().relations())
    if (r.name != kIncidence && r.arity != 1)
      throw ValidationError("graph structures only carry inc and unary labels");
  std::vector<std::vector<int>> ends(s.size());
  for (const auto& t : s.tuples(*inc)) {
    const int a[1] = {t[0]};
    const int b[1] = {t[1]};
    if (s.holds(*vert, a)) throw ValidationError("inc must start at an edge element");
    if (!s.holds(*vert, b)) throw ValidationError("inc must end at a vertex");
    ends[static_cast<std::size_t>(t[0])].push_back(t[1]);
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t x = 0; x < s.size(); ++x) {
    const int a[1] = {static_cast<int>(x)};
    if (s.holds(*vert, a)) continue;
    if (ends[x].size() != 2) throw ValidationError("edge element " + s.element(static_cast<int>(x)) +
                                                   " must have exactly two endpoints");
    auto p = ordered_pair(ends[x][0], ends[x][1]);
    if (!seen.insert(p).second) throw ValidationError("parallel edges are not supported");
  }
}

}  // namespace

Structure build_structure(Signature signature, std::vector<ElementId> domain,
                          const RelationContents& contents, StructureKind kind) {
  Structure s;
  s.signature_ = std::move(signature);
  s.domain_ = std::move(domain);
  s.kind_ = kind;
  {
    std::set<std::string> seen;
    for (const auto& e : s.domain_) {
      if (e.empty()) throw ValidationError("empty element identifier");
      if (!seen.insert(e).second) throw ValidationError("duplicate element '" + e + "'");
    }
  }
  s.positions_.clear();
  for (std::size_t i = 0; i < s.domain_.size(); ++i) s.positions_.emplace(s.domain_[i], static_cast<int>(i));

  s.relations_.assign(s.signature_.size(), {});
  for (const auto& [name, rows] : contents) {
    auto r = s.signature_.find(name);
    if (!r) throw ValidationError("unknown relation '" + name + "'");
    const int arity = s.signature_.relations()[*r].arity;
    auto& out = s.relations_[*r];
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != arity)
        throw ValidationError("arity mismatch in relation '" + name + "'");
      Tuple t;
      for (const auto& e : row) {
        auto it = s.positions_.find(e);
        if (it == s.positions_.end())
          throw ValidationError("tuple element '" + e + "' of '" + name + "' is outside the domain");
        t.push_back(it->second);
      }
      out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  s.index();

  switch (kind) {
    case StructureKind::Tree: (void)Tree::from_structure(s); break;
    case StructureKind::Grid: validate_grid(s); break;
    case StructureKind::GraphAdjacency: validate_adjacency_graph(s); break;
    case StructureKind::GraphIncidence: validate_incidence_graph(s); break;
    case StructureKind::Generic: break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Trees

Signature tree_signature(const std::vector<std::string>& alphabet) {
  std::vector<RelationSymbol> rels{{std::string(kLeftChild), 2}, {std::string(kRightChild), 2}};
  for (const auto& a : alphabet) rels.push_back({label_predicate(a), 1});
  return Signature(std::move(rels));
}

Tree::Tree(std::vector<std::string> alphabet, std::vector<int> labels, std::vector<int> left,
           std::vector<int> right, std::vector<std::string> names)
    : alphabet_(std::move(alphabet)),
      labels_(std::move(labels)),
      left_(std::move(left)),
      right_(std::move(right)),
      names_(std::move(names)) {
  validate_and_index();
}

void Tree::validate_and_index() {
  const auto n = labels_.size();
  if (n == 0) throw ValidationError("a tree has at least one node");
  if (left_.size() != n || right_.size() != n) throw ValidationError("child arrays have wrong length");
  if (names_.empty()) {
    for (std::size_t i = 0; i < n; ++i) names_.push_back("n" + std::to_string(i));
  }
  if (names_.size() != n) throw ValidationError("node name list has wrong length");
  {
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != n) throw ValidationError("duplicate node names");
  }
  {
    std::set<std::string> seen(alphabet_.begin(), alphabet_.end());
    if (seen.size() != alphabet_.size()) throw ValidationError("duplicate alphabet symbols");
  }
  for (int l : labels_)
    if (l < 0 || static_cast<std::size_t>(l) >= alphabet_.size())
      throw ValidationError("node label outside the alphabet");
  parent_.assign(n, kNoNode);
  for (std::size_t v = 0; v < n; ++v) {
    for (int c : {left_[v], right_[v]}) {
      if (c == kNoNode) continue;
      if (c < 0 || static_cast<std::size_t>(c) >= n) throw ValidationError("child index out of range");
      if (static_cast<std::size_t>(c) == v) throw ValidationError("node is its own child");
      if (parent_[static_cast<std::size_t>(c)] != kNoNode)
        throw ValidationError("node " + names_[static_cast<std::size_t>(c)] + " has two parents");
      parent_[static_cast<std::size_t>(c)] = static_cast<int>(v);
    }
  }
  root_ = kNoNode;
  for (std::size_t v = 0; v < n; ++v) {
    if (parent_[v] != kNoNode) continue;
    if (root_ != kNoNode) throw ValidationError("tree has more than one root");
    root_ = static_cast<int>(v);
  }
  if (root_ == kNoNode) throw ValidationError("tree has no root (cycle)");
  postorder_.clear();
  // Iterative post-order; also detects unreachable nodes.
  std::vector<std::pair<int, bool>> stack{{root_, false}};
  while (!stack.empty()) {
    auto [v, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      postorder_.push_back(v);
      continue;
    }
    stack.push_back({v, true});
    if (right_[static_cast<std::size_t>(v)] != kNoNode) stack.push_back({right_[static_cast<std::size_t>(v)], false});
    if (left_[static_cast<std::size_t>(v)] != kNoNode) stack.push_back({left_[static_cast<std::size_t>(v)], false});
  }
  if (postorder_.size() != n) throw ValidationError("tree is not connected");
}

bool Tree::is_ancestor(int ancestor, int v) const {
  for (int u = v; u != kNoNode; u = parent(u))
    if (u == ancestor) return true;
  return false;
}

std::optional<int> Tree::node(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

Tree Tree::relabeled(std::vector<int> labels) const {
  return Tree(alphabet_, std::move(labels), left_, right_, names_);
}

Tree Tree::from_structure(const Structure& s) {
  const auto& sig = s.signature();
  if (!sig.contains(kLeftChild) || !sig.contains(kRightChild) || sig.arity(kLeftChild) != 2 ||
      sig.arity(kRightChild) != 2)
    throw ValidationError("tree structures need binary relations left and right");
  std::vector<std::string> alphabet;
  std::vector<std::size_t> label_rel;
  for (std::size_t r = 0; r < sig.size(); ++r) {
    const auto& rel = sig.relations()[r];
    if (rel.name == kLeftChild || rel.name == kRightChild) continue;
    if (rel.arity != 1 || rel.name.rfind(kLabelPrefix, 0) != 0)
      throw ValidationError("unexpected relation '" + rel.name + "' in a tree signature");
    alphabet.push_back(rel.name.substr(kLabelPrefix.size()));
    label_rel.push_back(r);
  }
  const auto n = s.size();
  std::vector<int> labels(n, -1);
  for (std::size_t a = 0; a < label_rel.size(); ++a) {
    for (const auto& t : s.tuples(label_rel[a])) {
      auto& l = labels[static_cast<std::size_t>(t[0])];
      if (l != -1) throw ValidationError("node " + s.element(t[0]) + " carries two symbols");
      l = static_cast<int>(a);
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (labels[v] == -1) throw ValidationError("node " + s.domain()[v] + " carries no symbol");
  std::vector<int> left(n, kNoNode), right(n, kNoNode);
  auto fill = [&](std::string_view rel, std::vector<int>& child) {
    for (const auto& t : s.tuples(rel)) {
      auto& c = child[static_cast<std::size_t>(t[0])];
      if (c != kNoNode)
        throw ValidationError("node " + s.element(t[0]) + " has two " + std::string(rel) + " children");
      c = t[1];
    }
  };
  fill(kLeftChild, left);
  fill(kRightChild, right);
  return Tree(std::move(alphabet), std::move(labels), std::move(left), std::move(right), s.domain());
}

Structure Tree::to_structure() const {
  RelationContents rc;
  auto& l = rc[std::string(kLeftChild)];
  auto& r = rc[std::string(kRightChild)];
  for (std::size_t v = 0; v < size(); ++v) {
    if (left_[v] != kNoNode) l.push_back({names_[v], names_[static_cast<std::size_t>(left_[v])]});
    if (right_[v] != kNoNode) r.push_back({names_[v], names_[static_cast<std::size_t>(right_[v])]});
    rc[label_predicate(alphabet_[static_cast<std::size_t>(labels_[v])])].push_back({names_[v]});
  }
  return build_structure(tree_signature(alphabet_), names_, rc, StructureKind::Tree);
}

namespace {

struct Shape {
  std::vector<int> left, right;
};

// Shapes in pre-order numbering (root = 0).
std::vector<Shape> shapes(int nodes) {
  static std::map<int, std::vector<Shape>> cache;
  if (auto it = cache.find(nodes); it != cache.end()) return it->second;
  std::vector<Shape> out;
  if (nodes == 0) {
    out.push_back({});
  } else {
    for (int nl = 0; nl < nodes; ++nl) {
      const int nr = nodes - 1 - nl;
      for (const auto& ls : shapes(nl)) {
        for (const auto& rs : shapes(nr)) {
          Shape s;
          s.left.push_back(nl ? 1 : kNoNode);
          s.right.push_back(nr ? 1 + nl : kNoNode);
          for (int i = 0; i < nl; ++i) {
            s.left.push_back(ls.left[static_cast<std::size_t>(i)] == kNoNode ? kNoNode : ls.left[static_cast<std::size_t>(i)] + 1);
            s.right.push_back(ls.right[static_cast<std::size_t>(i)] == kNoNode ? kNoNode : ls.right[static_cast<std::size_t>(i)] + 1);
          }
          for (int i = 0; i < nr; ++i) {
            s.left.push_back(rs.left[static_cast<std::size_t>(i)] == kNoNode ? kNoNode : rs.left[static_cast<std::size_t>(i)] + 1 + nl);
            s.right.push_back(rs.right[static_cast<std::size_t>(i)] == kNoNode ? kNoNode : rs.right[static_cast<std::size_t>(i)] + 1 + nl);
          }
          out.push_back(std::move(s));
        }
      }
    }
  }
  cache[nodes] = out;
  return out;
}

}  // namespace

std::vector<Tree> enumerate_trees(int nodes, const std::vector<std::string>& alphabet) {
  if (nodes < 1 || alphabet.empty()) return {};
  std::vector<Tree> out;
  const auto k = alphabet.size();
  std::size_t labelings = 1;
  for (int i = 0; i < nodes; ++i) labelings *= k;
  for (const auto& s : shapes(nodes)) {
    for (std::size_t code = 0; code < labelings; ++code) {
      std::vector<int> labels(static_cast<std::size_t>(nodes));
      std::size_t c = code;
      for (auto& l : labels) {
        l = static_cast<int>(c % k);
        c /= k;
      }
      out.emplace_back(alphabet, std::move(labels), s.left, s.right);
    }
  }
  return out;
}

std::vector<Tree> enumerate_trees_up_to(int max_nodes, const std::vector<std::string>& alphabet) {
  std::vector<Tree> out;
  for (int n = 1; n <= max_nodes; ++n) {
    auto part = enumerate_trees(n, alphabet);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

Tree random_tree(int nodes, const std::vector<std::string>& alphabet, std::mt19937_64& rng) {
  if (nodes < 1) throw ValidationError("a tree needs at least one node");
  if (alphabet.empty()) throw ValidationError("empty alphabet");
  const auto n = static_cast<std::size_t>(nodes);
  std::vector<int> left(n, kNoNode), right(n, kNoNode), labels(n);
  // Free slots as (node, side) with side 0 = left.
  std::vector<std::pair<int, int>> slots{{0, 0}, {0, 1}};
  for (int v = 1; v < nodes; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
    const auto i = pick(rng);
    const auto [p, side] = slots[i];
    slots[i] = slots.back();
    slots.pop_back();
    (side == 0 ? left : right)[static_cast<std::size_t>(p)] = v;
    slots.emplace_back(v, 0);
    slots.emplace_back(v, 1);
  }
  std::uniform_int_distribution<int> sym(0, static_cast<int>(alphabet.size()) - 1);
  for (auto& l : labels) l = sym(rng);
  return Tree(alphabet, std::move(labels), std::move(left), std::move(right));
}

// ---------------------------------------------------------------------------
// Grids

std::string grid_cell(int i, int j) { return std::to_string(i) + "," + std::to_string(j); }

std::optional<std::pair<int, int>> parse_grid_cell(std::string_view name) {
  auto comma = name.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  int i = 0, j = 0;
  auto a = std::from_chars(name.data(), name.data() + comma, i);
  auto b = std::from_chars(name.data() + comma + 1, name.data() + name.size(), j);
  if (a.ec != std::errc{} || a.ptr != name.data() + comma || b.ec != std::errc{} ||
      b.ptr != name.data() + name.size())
    return std::nullopt;
  return std::pair{i, j};
}

Structure make_grid(int n) {
  if (n < 1) throw ValidationError("grid side must be at least 1");
  std::vector<ElementId> domain;
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i) domain.push_back(grid_cell(i, j));
  RelationContents rc;
  auto& h = rc[std::string(kHorizontal)];
  auto& v = rc[std::string(kVertical)];
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      if (i < n) h.push_back({grid_cell(i, j), grid_cell(i + 1, j)});
      if (j < n) v.push_back({grid_cell(i, j), grid_cell(i, j + 1)});
    }
  Signature sig({{std::string(kHorizontal), 2}, {std::string(kVertical), 2}});
  // Correct by construction; validate_grid itself compares against this.
  Structure s = build_structure(sig, std::move(domain), rc, StructureKind::Generic);
  s.kind_ = StructureKind::Grid;
  return s;
}

}  // namespace cmsovc
