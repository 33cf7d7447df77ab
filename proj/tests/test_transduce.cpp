#include <doctest.h>

#include <random>

#include "cmsovc/transduce.hpp"
#include "corpus.hpp"

using namespace cmsovc;

namespace {

Graph complete(int n) { return corpus::graph_from_mask(n, (std::uint64_t{1} << (n * (n - 1) / 2)) - 1); }

Graph path(int n) {
  std::vector<std::string> vs;
  std::vector<std::pair<std::string, std::string>> es;
  for (int i = 0; i < n; ++i) vs.push_back("p" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) es.emplace_back(vs[static_cast<std::size_t>(i)], vs[static_cast<std::size_t>(i + 1)]);
  return Graph(vs, es);
}

Structure inc(const Graph& g) { return g.with_encoding(GraphEncoding::Incidence).to_structure(); }

}  // namespace

TEST_CASE("deterministic application") {
  const auto ts = corpus::graph_transductions();
  const auto k3 = complete(3).to_structure();
  CHECK(same_content(apply(ts[0], k3), k3));
  const auto co = apply(ts[1], k3);
  CHECK(co.size() == 3);
  CHECK(co.tuples("E").empty());
  auto g = corpus::graph_from_mask(3, 1);  // v0-v1, v2 isolated
  const auto kept = apply(ts[2], g.to_structure());
  CHECK(kept.domain() == std::vector<ElementId>{"v0", "v1"});
  CHECK(kept.tuples("E").size() == 2);
  CHECK_THROWS_AS(apply(ts[0], inc(complete(2))), ValidationError);

  Transduction bad = ts[0];
  bad.relations[0].formula = parse_formula("(E x z)");
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ts[0];
  bad.relations[0].formula = parse_formula("(F x y)");
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("non-deterministic application") {
  NondetTransduction none{{}, corpus::graph_transductions()[0]};
  const auto k2 = complete(2).to_structure();
  const auto images = apply_all(none, k2);
  REQUIRE(images.size() == 1);
  CHECK(*images.begin() == apply(none.base, k2));

  NondetTransduction sub;
  sub.colors = {"P"};
  sub.base.input = Signature({{"E", 2}, {"P", 1}});
  sub.base.output = Signature({{"E", 2}});
  sub.base.domain = parse_formula("(P x)");
  sub.base.relations = {{"E", {"x", "y"}, parse_formula("(E x y)")}};
  CHECK(apply_all(sub, k2).size() == 4);
  const auto one = apply(sub, k2, {{"P", {"v1"}}});
  CHECK(one.domain() == std::vector<ElementId>{"v1"});
  CHECK_THROWS_AS(apply(sub, k2, {{"Q", {"v1"}}}), ValidationError);
  CHECK_THROWS_AS(apply_all(sub, complete(5).to_structure(), {}, 8), BudgetExceeded);
}

TEST_CASE("backwards translation examples") {
  const auto ts = corpus::graph_transductions();
  const auto phi = parse_formula("(exists x (exists y (E x y)))");
  const auto k3 = complete(3).to_structure();
  CHECK(check(k3, backward_translate(ts[0], phi)));
  CHECK_FALSE(check(k3, backward_translate(ts[1], phi)));
  // γ-restriction: ∃x true pulls back to "some vertex has a neighbour".
  const auto nonempty = backward_translate(ts[2], parse_formula("(exists x (true))"));
  for (const auto& g : corpus::all_graphs(3))
    CHECK(check(g.to_structure(), nonempty) == !g.edges().empty());
  CHECK_THROWS_AS(backward_translate(ts[0], parse_formula("(H x y)")), ValidationError);
}

TEST_CASE("backwards translation biconditional on random graphs") {
  std::mt19937_64 rng(5);
  long cases = 0;
  for (const auto& t : corpus::graph_transductions())
    for (const auto& item : corpus::graph_formulas()) {
      CAPTURE(item.text);
      const auto phi = parse_formula(item.text);
      const auto psi = backward_translate(t, phi);
      for (int it = 0; it < 3; ++it) {
        const auto s = corpus::random_graph(1 + static_cast<int>(rng() % 4), rng).to_structure();
        const auto n = corpus::biconditional_cases(t, phi, psi, s, item.tracks);
        CHECK(n > 0);
        cases += n;
      }
    }
  CHECK(cases > 500);
}

TEST_CASE("composition") {
  const auto ts = corpus::graph_transductions();
  std::mt19937_64 rng(9);
  for (std::size_t a = 0; a < ts.size(); ++a)
    for (std::size_t b = 0; b < ts.size(); ++b) {
      const auto both = compose(ts[a], ts[b]);
      for (int it = 0; it < 3; ++it) {
        const auto s = corpus::random_graph(1 + static_cast<int>(rng() % 5), rng).to_structure();
        CHECK(same_content(apply(both, s), apply(ts[b], apply(ts[a], s))));
      }
    }
}

TEST_CASE("grid recovery") {
  const auto j = grid_recovery();
  for (int n : {1, 2, 3, 5}) {
    CAPTURE(n);
    const auto out = apply(j, make_grid_graph(n).to_structure(), canonical_coloring(n));
    CHECK(same_content(out, make_grid(n)));
  }
  const auto one = apply(j, make_grid_graph(1).to_structure(), canonical_coloring(1));
  CHECK(one.size() == 1);
  CHECK(one.tuples("H").empty());
}

TEST_CASE("minor transduction") {
  const auto m = minor_transduction();
  SUBCASE("trivial model") {
    const auto g = path(4);
    MinorModel model{g, {{"p0"}, {"p1"}, {"p2"}, {"p3"}}};
    const auto out = apply(m, inc(g), minor_valuation(g, model));
    CHECK(isomorphic(Graph::from_structure(out), g));
  }
  SUBCASE("contract one edge of P3") {
    const auto g = path(3);
    MinorModel model{path(2), {{"p0", "p1"}, {"p2"}}};
    const auto out = apply(m, inc(g), minor_valuation(g, model));
    CHECK(isomorphic(Graph::from_structure(out), path(2)));
  }
  SUBCASE("K4 in the 3x3 grid graph") {
    const auto g = make_grid_graph(3);
    MinorModel model{complete(4), {{"1,1", "2,1", "3,1"}, {"1,2", "1,3"}, {"2,2"}, {"3,2", "3,3", "2,3"}}};
    const auto out = apply(m, inc(g), minor_valuation(g, model));
    CHECK(isomorphic(Graph::from_structure(out), complete(4)));
  }
  SUBCASE("invalid models") {
    const auto g = path(4);
    CHECK_THROWS_AS(validate_minor_model(g, {path(2), {{"p0", "p2"}, {"p3"}}}), ValidationError);
    CHECK_THROWS_AS(validate_minor_model(g, {path(2), {{"p0"}, {"p3"}}}), ValidationError);
    CHECK_THROWS_AS(validate_minor_model(g, {path(2), {{"p0", "p1"}, {"p1"}}}), ValidationError);
    CHECK_THROWS_AS(validate_minor_model(g, {path(2), {{"p0"}}}), ValidationError);
  }
}

TEST_CASE("incidence to adjacency rewrite") {
  for (const auto& item : corpus::incidence_formulas()) {
    CAPTURE(item.text);
    const auto phi = parse_formula(item.text);
    const auto psi = mso2_to_mso1(phi);
    for (const auto& g : corpus::all_graphs(4)) {
      const auto s = inc(g);
      const auto h = g.bipartite_incidence().to_structure();
      corpus::for_each_valuation(item.tracks, static_cast<int>(s.size()), [&](const auto& marked) {
        const auto v = corpus::to_valuation(s, item.tracks, marked);
        CHECK(check(s, phi, v) == check(h, psi, v));
      });
    }
  }
  const auto k2 = complete(2), two = corpus::graph_from_mask(2, 0);
  const auto some_edge = mso2_to_mso1(parse_formula("(exists e (exists u (inc e u)))"));
  CHECK(check(k2.bipartite_incidence().to_structure(), some_edge));
  CHECK_FALSE(check(two.bipartite_incidence().to_structure(), some_edge));
  CHECK_THROWS_AS(mso2_to_mso1(parse_formula("(E x y)")), ValidationError);
  CHECK_THROWS_AS(large_grid_extraction(), Error);
}

TEST_CASE("transduction text format") {
  const auto j = grid_recovery();
  const auto text = print_transduction(j);
  const auto back = parse_transduction(text);
  CHECK(print_transduction(back) == text);
  CHECK(back.colors == j.colors);
  CHECK_THROWS_AS(parse_transduction("{\"input\": "), ParseError);
  CHECK_THROWS_AS(parse_transduction("{\"input\": {\"E\": 2}, \"output\": {\"E\": 2}, \"relations\": []}"),
                  ValidationError);
}
