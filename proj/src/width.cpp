#include "cmsovc/width.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace cmsovc {

namespace {

struct Token {
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({std::string(1, c), i++});
    } else {
      const auto start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
      out.push_back({std::string(s.substr(start, i - start)), start});
    }
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)), end_(text.size()) {}

  KExpression parse() {
    auto e = expr();
    if (i_ != tokens_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("k-expression: " + msg, i_ < tokens_.size() ? tokens_[i_].pos : end_);
  }
  const std::string& peek() const {
    if (i_ >= tokens_.size()) fail("unexpected end of input");
    return tokens_[i_].text;
  }
  std::string next() {
    auto t = peek();
    ++i_;
    return t;
  }
  void expect(const std::string& t) {
    if (peek() != t) fail("expected '" + t + "'");
    ++i_;
  }
  std::string word() {
    auto t = peek();
    if (t == "(" || t == ")") fail("expected a name");
    ++i_;
    return t;
  }
  int number() {
    const auto t = word();
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        t.size() > 6) {
      --i_;
      fail("expected a colour number");
    }
    return std::stoi(t);
  }
  KExpression expr() {
    expect("(");
    KExpression e;
    const auto op = word();
    if (op == "intro") {
      e.op = KOp::Intro;
      e.vertex = word();
      e.i = number();
      if (peek() != ")") e.label = word();
    } else if (op == "union") {
      e.op = KOp::Union;
      e.children.push_back(expr());
      e.children.push_back(expr());
    } else if (op == "join" || op == "relabel") {
      e.op = op == "join" ? KOp::Join : KOp::Relabel;
      e.i = number();
      e.j = number();
      e.children.push_back(expr());
    } else {
      --i_;
      fail("unknown operation '" + op + "'");
    }
    expect(")");
    return e;
  }

  std::vector<Token> tokens_;
  std::size_t end_;
  std::size_t i_ = 0;
};

void walk(const KExpression& e, const std::function<void(const KExpression&)>& f) {
  f(e);
  for (const auto& c : e.children) walk(c, f);
}

std::string label_atom(const std::string& symbol, const std::string& var) {
  return "(" + label_predicate(symbol) + " " + var + ")";
}

std::string any_of(const std::vector<std::string>& parts) {
  if (parts.empty()) return "(false)";
  if (parts.size() == 1) return parts[0];
  std::string s = "(or";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string all_of(const std::vector<std::string>& parts) {
  if (parts.empty()) return "(true)";
  if (parts.size() == 1) return parts[0];
  std::string s = "(and";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string color_set(int c) { return "C" + std::to_string(c); }

// Leaf introduced with colour c.
std::string intro_with(int c, const std::vector<std::string>& labels, const std::string& var) {
  std::vector<std::string> alts{label_atom("intro:" + std::to_string(c), var)};
  for (const auto& l : labels) alts.push_back(label_atom("intro:" + std::to_string(c) + ":" + l, var));
  return any_of(alts);
}

// x has colour i in the subgraph built at w: every family C1..Ck that holds x in its introduced
// colour and is closed upwards under the relabel rule has w in Ci. The least such family is the
// path from x to the root, each node carrying the colour x has there.
std::string colour_at(int k, const std::vector<std::string>& labels, int i, const std::string& x, const std::string& w) {
  std::vector<std::string> start, step;
  for (int c = 1; c <= k; ++c) {
    start.push_back("(implies " + intro_with(c, labels, x) + " (in " + x + " " + color_set(c) + "))");
    std::vector<std::string> rules, from_c;
    for (int b = 1; b <= k; ++b) {
      if (b == c) continue;
      const auto sym = "relabel:" + std::to_string(c) + ":" + std::to_string(b);
      from_c.push_back(label_atom(sym, "v"));
      rules.push_back("(implies " + label_atom(sym, "v") + " (in v " + color_set(b) + "))");
    }
    rules.push_back("(or " + any_of(from_c) + " (in v " + color_set(c) + "))");
    step.push_back("(implies (in u " + color_set(c) + ") " + all_of(rules) + ")");
  }
  std::string body = "(implies (and " + all_of(start) + " (forall u (forall v (implies (or (left v u) (right v u)) " +
                     all_of(step) + ")))) (in " + w + " " + color_set(i) + "))";
  for (int c = k; c >= 1; --c) body = "(forallS " + color_set(c) + " " + body + ")";
  return body;
}

}  // namespace

KExpression parse_kexpression(std::string_view text) { return Parser(text).parse(); }

std::string print_kexpression(const KExpression& e) {
  switch (e.op) {
    case KOp::Intro:
      return "(intro " + e.vertex + " " + std::to_string(e.i) + (e.label.empty() ? "" : " " + e.label) + ")";
    case KOp::Union: return "(union " + print_kexpression(e.children[0]) + " " + print_kexpression(e.children[1]) + ")";
    case KOp::Join:
      return "(join " + std::to_string(e.i) + " " + std::to_string(e.j) + " " + print_kexpression(e.children[0]) + ")";
    case KOp::Relabel:
      return "(relabel " + std::to_string(e.i) + " " + std::to_string(e.j) + " " + print_kexpression(e.children[0]) +
             ")";
  }
  return "";
}

int max_color(const KExpression& e) {
  int m = 0;
  walk(e, [&](const KExpression& n) { m = std::max({m, n.i, n.j}); });
  return m;
}

std::vector<std::string> expression_labels(const KExpression& e) {
  std::set<std::string> out;
  walk(e, [&](const KExpression& n) {
    if (n.op == KOp::Intro && !n.label.empty()) out.insert(n.label);
  });
  return {out.begin(), out.end()};
}

void validate_kexpression(const KExpression& e, int k) {
  if (k < 1) throw ValidationError("colour bound must be at least 1");
  std::set<std::string> names;
  walk(e, [&](const KExpression& n) {
    auto in_range = [&](int c) {
      if (c < 1 || c > k) throw ValidationError("colour " + std::to_string(c) + " outside [1," + std::to_string(k) + "]");
    };
    switch (n.op) {
      case KOp::Intro:
        in_range(n.i);
        if (n.vertex.empty()) throw ValidationError("empty vertex name");
        if (!names.insert(n.vertex).second) throw ValidationError("vertex '" + n.vertex + "' introduced twice");
        if (!n.children.empty()) throw ValidationError("intro has no operands");
        break;
      case KOp::Union:
        if (n.children.size() != 2) throw ValidationError("union needs two operands");
        break;
      case KOp::Join:
      case KOp::Relabel:
        in_range(n.i);
        in_range(n.j);
        if (n.op == KOp::Join && n.i == n.j) throw ValidationError("join needs two different colours");
        if (n.children.size() != 1) throw ValidationError("join and relabel take one operand");
        break;
    }
  });
}

Graph eval_kexpression(const KExpression& e, int k, const std::vector<std::string>& labels) {
  validate_kexpression(e, k);
  std::vector<std::string> order;
  std::map<std::string, std::set<int>> label_sets;
  for (const auto& l : labels) label_sets[l];
  std::set<std::pair<std::string, std::string>> edges;
  // Returns (vertex, colour) pairs of the subgraph built by n.
  std::function<std::vector<std::pair<std::string, int>>(const KExpression&)> rec = [&](const KExpression& n) {
    std::vector<std::pair<std::string, int>> out;
    switch (n.op) {
      case KOp::Intro:
        if (!n.label.empty()) label_sets[n.label].insert(static_cast<int>(order.size()));
        order.push_back(n.vertex);
        out.emplace_back(n.vertex, n.i);
        break;
      case KOp::Union: {
        out = rec(n.children[0]);
        auto right = rec(n.children[1]);
        out.insert(out.end(), right.begin(), right.end());
        break;
      }
      case KOp::Join:
        out = rec(n.children[0]);
        for (const auto& [u, cu] : out)
          for (const auto& [v, cv] : out)
            if (cu == n.i && cv == n.j) edges.insert(std::minmax(u, v));
        break;
      case KOp::Relabel:
        out = rec(n.children[0]);
        for (auto& [v, c] : out)
          if (c == n.i) c = n.j;
        break;
    }
    return out;
  };
  rec(e);
  Graph g(order, {edges.begin(), edges.end()});
  for (const auto& [l, vs] : label_sets) g = g.with_vertex_label(l, vs);
  return g;
}

std::vector<std::string> cw_alphabet(int k, const std::vector<std::string>& labels) {
  if (k < 1) throw ValidationError("colour bound must be at least 1");
  std::vector<std::string> out;
  for (int c = 1; c <= k; ++c) {
    out.push_back("intro:" + std::to_string(c));
    for (const auto& l : labels) out.push_back("intro:" + std::to_string(c) + ":" + l);
  }
  out.push_back("union");
  for (const char* op : {"join:", "relabel:"})
    for (int i = 1; i <= k; ++i)
      for (int j = 1; j <= k; ++j)
        if (i != j) out.push_back(op + std::to_string(i) + ":" + std::to_string(j));
  return out;
}

std::string op_symbol(const KExpression& n) {
  switch (n.op) {
    case KOp::Intro: return "intro:" + std::to_string(n.i) + (n.label.empty() ? "" : ":" + n.label);
    case KOp::Union: return "union";
    case KOp::Join: return "join:" + std::to_string(n.i) + ":" + std::to_string(n.j);
    case KOp::Relabel:
      // Relabelling a colour to itself changes nothing; keep it as a plain pass-through.
      if (n.i == n.j) return "union";
      return "relabel:" + std::to_string(n.i) + ":" + std::to_string(n.j);
  }
  return "";
}

ParseTree to_parse_tree(const KExpression& e, int k, const std::vector<std::string>& labels) {
  validate_kexpression(e, k);
  std::set<std::string> all(labels.begin(), labels.end());
  for (const auto& l : expression_labels(e)) all.insert(l);
  ParseTree pt;
  pt.k = k;
  pt.labels.assign(all.begin(), all.end());
  const auto alphabet = cw_alphabet(k, pt.labels);
  std::map<std::string, int> sym;
  for (std::size_t i = 0; i < alphabet.size(); ++i) sym[alphabet[i]] = static_cast<int>(i);
  std::vector<int> lab, left, right;
  std::vector<std::string> names;
  int inner = 0;
  std::function<int(const KExpression&)> rec = [&](const KExpression& n) {
    const int me = static_cast<int>(lab.size());
    lab.push_back(sym.at(op_symbol(n)));
    left.push_back(kNoNode);
    right.push_back(kNoNode);
    if (n.op == KOp::Intro) {
      if (n.vertex[0] == '~') throw ValidationError("vertex names may not start with '~'");
      names.push_back(n.vertex);
    } else {
      names.push_back("~" + std::to_string(inner++));
    }
    if (!n.children.empty()) {
      const int l = rec(n.children[0]);
      left[static_cast<std::size_t>(me)] = l;
    }
    if (n.children.size() > 1) {
      const int r = rec(n.children[1]);
      right[static_cast<std::size_t>(me)] = r;
    }
    return me;
  };
  rec(e);
  pt.tree = Tree(alphabet, lab, left, right, names);
  return pt;
}

Transduction interpretation(int k, const std::vector<std::string>& labels) {
  Transduction t;
  t.input = tree_signature(cw_alphabet(k, labels));
  std::vector<RelationSymbol> out{{std::string(kAdjacency), 2}};
  for (const auto& l : labels) out.push_back({l, 1});
  t.output = Signature(out);
  t.output_kind = StructureKind::GraphAdjacency;
  std::vector<std::string> leaves;
  for (int c = 1; c <= k; ++c) leaves.push_back(intro_with(c, labels, "x"));
  t.domain = parse_formula(any_of(leaves));
  // ∃w distributes over the colour pairs, which keeps each automaton small.
  std::vector<std::string> pairs;
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j) {
      if (i == j) continue;
      const auto at = any_of({label_atom("join:" + std::to_string(i) + ":" + std::to_string(j), "w"),
                              label_atom("join:" + std::to_string(j) + ":" + std::to_string(i), "w")});
      pairs.push_back("(exists w (and " + at + " " + colour_at(k, labels, i, "x", "w") + " " +
                      colour_at(k, labels, j, "y", "w") + "))");
    }
  t.relations.push_back({std::string(kAdjacency), {"x", "y"}, parse_formula("(and (not (= x y)) " + any_of(pairs) + ")")});
  for (const auto& l : labels) {
    std::vector<std::string> alts;
    for (int c = 1; c <= k; ++c) alts.push_back(label_atom("intro:" + std::to_string(c) + ":" + l, "x"));
    t.relations.push_back({l, {"x"}, parse_formula(any_of(alts))});
  }
  t.validate();
  return t;
}

Structure apply_on_tree(const Transduction& t, const Tree& tree, Compiler& compiler) {
  t.validate();
  const auto s = tree.to_structure();
  for (const auto& r : t.input.relations())
    if (!s.signature().contains(r.name) || s.signature().arity(r.name) != r.arity)
      throw ValidationError("tree lacks relation '" + r.name + "'");
  const auto n = static_cast<int>(tree.size());
  std::vector<int> dom;
  {
    const std::vector<std::string> tracks{t.domain_variable};
    const auto a = compiler.compile(t.domain, tracks);
    for (int v = 0; v < n; ++v)
      if (accepts(a, augment(tree, tracks, {{v}}))) dom.push_back(v);
  }
  std::vector<ElementId> names;
  for (int v : dom) names.push_back(tree.name(v));
  RelationContents rc;
  for (const auto& r : t.output.relations()) {
    const auto& d = t.definition(r.name);
    auto& rows = rc[r.name];
    if (dom.empty()) continue;
    const auto a = compiler.compile(d.formula, d.variables);
    const auto k = d.variables.size();
    std::vector<std::size_t> idx(k, 0);
    std::vector<std::vector<int>> marks(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) marks[i] = {dom[idx[i]]};
      if (accepts(a, augment(tree, d.variables, marks))) {
        std::vector<ElementId> row;
        for (const auto& m : marks) row.push_back(tree.name(m[0]));
        rows.push_back(std::move(row));
      }
      std::size_t i = k;
      while (i > 0 && ++idx[i - 1] == dom.size()) idx[--i] = 0;
      if (i == 0) break;
    }
  }
  return build_structure(t.output, names, rc, t.output_kind);
}

TupleSetSystem check_on_cliquewidth(const PartitionedFormula& phi, const KExpression& e, int k,
                                    const WidthOptions& options, std::optional<std::vector<ElementId>> universe) {
  std::vector<std::string> labels;
  for (const auto& [name, arity] : relations_used(phi.formula)) {
    if (name == kAdjacency && arity == 2) continue;
    if (arity != 1) throw ValidationError("relation '" + name + "' is not in the adjacency vocabulary");
    labels.push_back(name);
  }
  const auto pt = to_parse_tree(e, k, labels);
  const auto psi = backward_translate(interpretation(k, pt.labels), phi.formula);
  auto tracks = phi.objects;
  tracks.insert(tracks.end(), phi.parameters.begin(), phi.parameters.end());
  std::optional<Compiler> own;
  Compiler* compiler = options.compiler;
  if (!compiler || compiler->alphabet() != pt.tree.alphabet()) compiler = &own.emplace(pt.tree.alphabet(), options.compile);
  const auto a = compiler->compile(psi, tracks);
  if (!universe) universe = eval_kexpression(e, k).vertices();
  std::vector<int> node;
  for (const auto& name : *universe) {
    auto v = pt.tree.node(name);
    if (!v) throw ValidationError("universe element '" + name + "' is not a vertex of the expression");
    node.push_back(*v);
  }
  const auto kx = phi.objects.size();
  std::vector<std::vector<int>> marks(tracks.size());
  auto oracle = [&](std::span<const int> xs, std::span<const int> ys) {
    for (std::size_t i = 0; i < xs.size(); ++i) marks[i] = {node[static_cast<std::size_t>(xs[i])]};
    for (std::size_t i = 0; i < ys.size(); ++i) marks[kx + i] = {node[static_cast<std::size_t>(ys[i])]};
    return accepts(a, augment(pt.tree, tracks, marks));
  };
  return define_set_system(*universe, kx, phi.parameters.size(), oracle, options.max_tuples);
}

void check_certificate(const Graph& g, const KExpression& certificate, int k) {
  const auto h = g.bipartite_incidence();
  std::vector<std::string> labels;
  for (const auto& [l, vs] : h.vertex_labels()) labels.push_back(l);
  const auto ev = eval_kexpression(certificate, k, labels);
  if (!same_content(ev.to_structure(), h.to_structure()))
    throw ValidationError("certificate does not evaluate to the incidence graph");
}

TupleSetSystem check_on_treewidth(const PartitionedFormula& phi, const Graph& g, const KExpression& certificate, int k,
                                  const WidthOptions& options) {
  check_certificate(g, certificate, k);
  const PartitionedFormula psi(mso2_to_mso1(phi.formula), phi.objects, phi.parameters);
  return check_on_cliquewidth(psi, certificate, k, options, g.vertices());
}

KExpression forest_incidence_expression(const Graph& g) {
  const auto n = g.vertex_count();
  const auto& es = g.edges();
  // Incidence tree: vertices 0..n-1, edge e is node n+e.
  std::vector<std::vector<int>> adj(n + es.size());
  for (std::size_t e = 0; e < es.size(); ++e) {
    const int node = static_cast<int>(n + e);
    for (int v : {es[e].first, es[e].second}) {
      adj[static_cast<std::size_t>(v)].push_back(node);
      adj[static_cast<std::size_t>(node)].push_back(v);
    }
  }
  std::vector<int> seen(adj.size(), 0);
  auto intro = [&](int x) {
    KExpression e;
    e.op = KOp::Intro;
    e.i = 1;
    if (static_cast<std::size_t>(x) < n) {
      e.vertex = g.vertices()[static_cast<std::size_t>(x)];
      e.label = std::string(kVertexSort);
    } else {
      e.vertex = g.edge_name(es[static_cast<std::size_t>(x) - n]);
    }
    return e;
  };
  auto unary = [](KOp op, int i, int j, KExpression c) {
    KExpression e;
    e.op = op;
    e.i = i;
    e.j = j;
    e.children.push_back(std::move(c));
    return e;
  };
  auto both = [](KExpression a, KExpression b) {
    KExpression e;
    e.op = KOp::Union;
    e.children.push_back(std::move(a));
    e.children.push_back(std::move(b));
    return e;
  };
  // Subtree at x: x has colour 1, everything below colour 3.
  std::function<KExpression(int, int)> rec = [&](int x, int parent) {
    seen[static_cast<std::size_t>(x)] = 1;
    auto cur = intro(x);
    for (int c : adj[static_cast<std::size_t>(x)]) {
      if (c == parent) continue;
      if (seen[static_cast<std::size_t>(c)]) throw ValidationError("graph has a cycle; no forest certificate");
      auto child = unary(KOp::Relabel, 1, 2, rec(c, x));
      cur = unary(KOp::Relabel, 2, 3, unary(KOp::Join, 1, 2, both(std::move(cur), std::move(child))));
    }
    return cur;
  };
  std::optional<KExpression> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (seen[v]) continue;
    auto part = unary(KOp::Relabel, 1, 3, rec(static_cast<int>(v), -1));
    out = out ? both(std::move(*out), std::move(part)) : std::move(part);
  }
  if (!out) throw ValidationError("graph has no vertices");
  return *out;
}

}  // namespace cmsovc
