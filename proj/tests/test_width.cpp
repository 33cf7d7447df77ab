#include <doctest.h>

#include <functional>
#include <numeric>
#include <random>

#include "cmsovc/width.hpp"
#include "corpus.hpp"

using namespace cmsovc;

namespace {

const char* kK2 = "(join 1 2 (union (intro a 1) (intro b 2)))";
const char* kK3 = "(join 1 2 (union (relabel 2 1 (join 1 2 (union (intro a 1) (intro b 2)))) (intro c 2)))";

KExpression leaf(const std::string& v, int c, const std::string& label = "") {
  KExpression e;
  e.vertex = v;
  e.i = c;
  e.label = label;
  return e;
}

KExpression node(KOp op, int i, int j, std::vector<KExpression> children) {
  KExpression e;
  e.op = op;
  e.i = i;
  e.j = j;
  e.children = std::move(children);
  return e;
}

// Random k-expression on n vertices; every inner step is a union followed by a few joins/relabels.
KExpression random_kexpr(int n, int k, std::mt19937_64& rng, int& next, bool labels) {
  std::uniform_int_distribution<int> colour(1, k);
  auto decorate = [&](KExpression e) {
    std::uniform_int_distribution<int> steps(0, 2);
    for (int s = steps(rng); s > 0; --s) {
      int i = colour(rng), j = colour(rng);
      if (i == j) continue;
      e = node(rng() % 2 ? KOp::Join : KOp::Relabel, i, j, {std::move(e)});
    }
    return e;
  };
  if (n == 1) {
    const auto name = "u" + std::to_string(next++);
    return decorate(leaf(name, colour(rng), labels && rng() % 2 ? "P" : ""));
  }
  std::uniform_int_distribution<int> split(1, n - 1);
  const int l = split(rng);
  auto a = random_kexpr(l, k, rng, next, labels);
  auto b = random_kexpr(n - l, k, rng, next, labels);
  return decorate(node(KOp::Union, 0, 0, {std::move(a), std::move(b)}));
}

Graph path(int n) {
  std::vector<std::string> vs;
  std::vector<std::pair<std::string, std::string>> es;
  for (int i = 0; i < n; ++i) vs.push_back("p" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) es.emplace_back(vs[static_cast<std::size_t>(i)], vs[static_cast<std::size_t>(i + 1)]);
  return Graph(vs, es);
}

}  // namespace

TEST_CASE("k-expression text") {
  const auto e = parse_kexpression(kK3);
  CHECK(print_kexpression(e) == kK3);
  CHECK(max_color(e) == 2);
  const auto l = parse_kexpression("(union (intro a 1 P) (intro b 1 Q))");
  CHECK(expression_labels(l) == std::vector<std::string>{"P", "Q"});
  CHECK(print_kexpression(l) == "(union (intro a 1 P) (intro b 1 Q))");
  CHECK_THROWS_AS(parse_kexpression("(intro a)"), ParseError);
  CHECK_THROWS_AS(parse_kexpression("(union (intro a 1))"), ParseError);
  CHECK_THROWS_AS(parse_kexpression("(glue 1 2 (intro a 1))"), ParseError);
  CHECK_THROWS_AS(parse_kexpression("(intro a 1) x"), ParseError);
}

TEST_CASE("evaluation") {
  const auto k2 = eval_kexpression(parse_kexpression(kK2), 2);
  CHECK(k2.vertices() == std::vector<std::string>{"a", "b"});
  CHECK(k2.edge_count() == 1);
  const auto k3 = eval_kexpression(parse_kexpression(kK3), 2);
  CHECK(k3.vertex_count() == 3);
  CHECK(k3.edge_count() == 3);
  CHECK((k3.adjacent(0, 1) && k3.adjacent(0, 2) && k3.adjacent(1, 2)));

  // relabel then join: only the vertices still carrying colour 1 get joined
  const auto g = eval_kexpression(parse_kexpression("(join 1 2 (union (relabel 1 3 (intro a 1)) (union (intro b 1) (intro c 2))))"), 3);
  CHECK(g.edge_count() == 1);
  CHECK(g.adjacent(1, 2));

  const auto labelled = eval_kexpression(parse_kexpression("(union (intro a 1 P) (intro b 1))"), 1, {"Q"});
  CHECK(labelled.vertex_labels().at("P") == std::set<int>{0});
  CHECK(labelled.vertex_labels().at("Q").empty());

  CHECK_THROWS_AS(eval_kexpression(parse_kexpression(kK3), 1), ValidationError);
  CHECK_THROWS_AS(eval_kexpression(parse_kexpression("(union (intro a 1) (intro a 1))"), 1), ValidationError);
  CHECK_THROWS_AS(eval_kexpression(parse_kexpression("(join 1 1 (intro a 1))"), 1), ValidationError);
  CHECK_THROWS_AS(eval_kexpression(parse_kexpression("(intro a 0)"), 1), ValidationError);
}

TEST_CASE("parse trees") {
  CHECK(to_parse_tree(parse_kexpression("(intro a 1)"), 1).tree.size() == 1);
  const auto k2 = to_parse_tree(parse_kexpression(kK2), 2);
  CHECK(k2.tree.size() == 4);
  CHECK(k2.tree.symbol(k2.tree.root()) == "join:1:2");
  CHECK(k2.tree.node("a").has_value());
  // 3 intros, 2 unions, 2 joins, 1 relabel
  CHECK(to_parse_tree(parse_kexpression(kK3), 2).tree.size() == 8);
  const auto alphabet = cw_alphabet(2, {"P"});
  CHECK(alphabet.size() == 2 * 2 + 1 + 2 + 2);
  CHECK_THROWS_AS(to_parse_tree(parse_kexpression("(intro ~x 1)"), 1), ValidationError);
}

TEST_CASE("interpretation matches evaluation") {
  // brute-force application on the smallest parse tree
  {
    const auto pt = to_parse_tree(parse_kexpression(kK2), 2);
    const auto img = apply(interpretation(2, pt.labels), pt.tree.to_structure());
    CHECK(same_content(img, eval_kexpression(parse_kexpression(kK2), 2).to_structure()));
  }
  std::mt19937_64 rng(11);
  for (int k : {2, 3}) {
    const std::vector<std::string> labels{"P"};
    Compiler compiler(cw_alphabet(k, labels));
    const auto t = interpretation(k, labels);
    for (int round = 0; round < 12; ++round) {
      int next = 0;
      const int n = 1 + static_cast<int>(rng() % 5);
      const auto e = random_kexpr(n, k, rng, next, true);
      const auto pt = to_parse_tree(e, k, labels);
      const auto img = apply_on_tree(t, pt.tree, compiler);
      CAPTURE(print_kexpression(e));
      CHECK(same_content(img, eval_kexpression(e, k, labels).to_structure()));
    }
  }
}

TEST_CASE("cliquewidth pipeline against brute force") {
  std::mt19937_64 rng(5);
  const std::vector<std::pair<std::string, std::vector<std::string>>> formulas{
      {"(E x y)", {"y"}},
      {"(exists z (and (E x z) (E z y)))", {"y"}},
      {"(and (P x) (not (= x y)))", {"y"}},
      {"(existsS Z (and (in x Z) (in y Z) (mod Z 1 2) (forall z (implies (in z Z) (exists w (and (in w Z) (E z w)))))))",
       {"y"}},
  };
  Compiler compiler(cw_alphabet(2, {"P"}));
  WidthOptions opts;
  opts.compiler = &compiler;
  for (const auto& [text, params] : formulas) {
    const PartitionedFormula phi(parse_formula(text), {"x"}, params);
    for (int round = 0; round < 4; ++round) {
      int next = 0;
      const auto e = random_kexpr(2 + static_cast<int>(rng() % 4), 2, rng, next, true);
      const auto g = eval_kexpression(e, 2, {"P"});
      CAPTURE(text);
      CAPTURE(print_kexpression(e));
      CHECK(check_on_cliquewidth(phi, e, 2, opts) == define_set_system(g.to_structure(), phi));
    }
  }
  const PartitionedFormula bad(parse_formula("(F x y)"), {"x"}, {"y"});
  CHECK_THROWS_AS(check_on_cliquewidth(bad, parse_kexpression(kK2), 2), ValidationError);
}

TEST_CASE("forest certificates") {
  const auto p4 = path(4);
  const auto cert = forest_incidence_expression(p4);
  CHECK(max_color(cert) <= 3);
  CHECK_NOTHROW(check_certificate(p4, cert, 3));
  CHECK_THROWS_AS(check_certificate(path(3), cert, 3), ValidationError);
  CHECK_THROWS_AS(forest_incidence_expression(corpus::graph_from_mask(3, 7)), ValidationError);

  // every graph on up to 4 vertices: a certificate exactly when acyclic
  for (const auto& g : corpus::all_graphs(4)) {
    std::vector<int> comp(g.vertex_count());
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int v) { return comp[static_cast<std::size_t>(v)] == v ? v : find(comp[static_cast<std::size_t>(v)]); };
    bool acyclic = true;
    for (const auto& [u, v] : g.edges()) {
      const int a = find(u), b = find(v);
      if (a == b) acyclic = false;
      comp[static_cast<std::size_t>(a)] = b;
    }
    if (!acyclic) {
      CHECK_THROWS_AS(forest_incidence_expression(g), ValidationError);
      continue;
    }
    CHECK_NOTHROW(check_certificate(g, forest_incidence_expression(g), 3));
  }
}

TEST_CASE("treewidth pipeline against brute force") {
  const std::vector<Graph> graphs{path(3), path(4), corpus::graph_from_mask(4, 0b000111)};
  Compiler compiler(cw_alphabet(3, {"vert"}));
  WidthOptions opts;
  opts.compiler = &compiler;
  for (const auto& tf : corpus::incidence_formulas()) {
    if (tf.tracks.empty()) continue;
    std::vector<std::string> objects{tf.tracks[0]};
    std::vector<std::string> params(tf.tracks.begin() + 1, tf.tracks.end());
    const PartitionedFormula phi(parse_formula(tf.text), objects, params);
    for (const auto& g : graphs) {
      KExpression c;
      try {
        c = forest_incidence_expression(g);
      } catch (const ValidationError&) {
        continue;
      }
      CAPTURE(tf.text);
      const auto brute = define_set_system(g.with_encoding(GraphEncoding::Incidence).to_structure(), phi);
      CHECK(check_on_treewidth(phi, g, c, 3, opts) == brute);
    }
  }
}
