#include <doctest.h>

#include <random>

#include "cmsovc/structures.hpp"

using namespace cmsovc;

TEST_CASE("single-node tree") {
  auto s = build_structure(tree_signature({"a"}), {"r"}, {{"label_a", {{"r"}}}}, StructureKind::Tree);
  auto t = Tree::from_structure(s);
  CHECK(t.size() == 1);
  CHECK(t.root() == 0);
  CHECK(t.symbol(0) == "a");
}

TEST_CASE("K2 in adjacency encoding") {
  Signature sig({{"E", 2}});
  auto s = build_structure(sig, {"1", "2"}, {{"E", {{"1", "2"}, {"2", "1"}}}}, StructureKind::GraphAdjacency);
  auto g = Graph::from_structure(s);
  CHECK(g.vertex_count() == 2);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("build_structure rejects bad contents") {
  Signature sig({{"E", 2}});
  CHECK_THROWS_AS(build_structure(sig, {"1"}, {{"E", {{"1"}}}}), ValidationError);
  CHECK_THROWS_AS(build_structure(sig, {"1"}, {{"F", {{"1", "1"}}}}), ValidationError);
  CHECK_THROWS_AS(build_structure(sig, {"1"}, {{"E", {{"1", "9"}}}}), ValidationError);
  CHECK_THROWS_AS(build_structure(sig, {"1", "2"}, {{"E", {{"1", "2"}}}}, StructureKind::GraphAdjacency),
                  ValidationError);
}

TEST_CASE("grid relations are oriented") {
  auto g = make_grid(2);
  auto rc = g.contents();
  // ((1,1),(1,2)) is a V pair; declaring it as H is rejected.
  rc["H"].push_back({"1,1", "1,2"});
  CHECK_THROWS_AS(build_structure(g.signature(), g.domain(), rc, StructureKind::Grid), ValidationError);
}

TEST_CASE("make_grid") {
  CHECK_THROWS_AS(make_grid(0), ValidationError);
  auto g1 = make_grid(1);
  CHECK(g1.tuples("H").empty());
  CHECK(g1.tuples("V").empty());

  auto g2 = make_grid(2);
  auto rc = g2.contents();
  CHECK(rc["H"] == std::vector<std::vector<std::string>>{{"1,1", "2,1"}, {"1,2", "2,2"}});
  CHECK(rc["V"] == std::vector<std::vector<std::string>>{{"1,1", "1,2"}, {"2,1", "2,2"}});

  for (int n = 1; n <= 6; ++n) {
    auto g = make_grid(n);
    CHECK(g.tuples("H").size() == static_cast<std::size_t>(n * (n - 1)));
    CHECK(g.tuples("V").size() == static_cast<std::size_t>(n * (n - 1)));
    // Out-degree 1 in H iff i < n, in V iff j < n.
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        const int x = g.require_index(grid_cell(i, j));
        int h = 0, v = 0;
        for (const auto& t : g.tuples("H")) h += t[0] == x;
        for (const auto& t : g.tuples("V")) v += t[0] == x;
        CHECK(h == (i < n ? 1 : 0));
        CHECK(v == (j < n ? 1 : 0));
      }
  }
}

TEST_CASE("make_grid_graph") {
  CHECK_THROWS_AS(make_grid_graph(0), ValidationError);
  CHECK(make_grid_graph(1).edge_count() == 0);
  auto c4 = Graph({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}});
  CHECK(isomorphic(make_grid_graph(2), c4));
  // Enumerate pairs at Manhattan distance 1 for n = 4.
  int count = 0;
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b)
      count += std::abs(a % 4 - b % 4) + std::abs(a / 4 - b / 4) == 1;
  CHECK(count == 24);
  CHECK(make_grid_graph(4).edge_count() == 24);
}

TEST_CASE("incidence graph") {
  Graph k2({"u", "v"}, {{"u", "v"}});
  auto inc = incidence_graph(k2);
  CHECK(isomorphic(inc.bipartite_incidence().with_vertex_label("vert", {}), Graph({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}}).with_vertex_label("vert", {})));
  auto s = inc.to_structure();
  CHECK(s.size() == 3);
  CHECK(s.tuples("inc").size() == 2);

  Graph k3({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  auto s3 = incidence_graph(k3).to_structure();
  CHECK(s3.size() == 6);
  for (std::size_t x = 3; x < 6; ++x) {
    int deg = 0;
    for (const auto& t : s3.tuples("inc")) deg += t[0] == static_cast<int>(x);
    CHECK(deg == 2);
  }

  Graph p3({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  auto s4 = incidence_graph(p3).to_structure();
  CHECK(s4.size() == 5);
  CHECK(s4.tuples("inc").size() == 4);
  CHECK(Graph::from_structure(s4) == incidence_graph(p3));
  CHECK_THROWS_AS(incidence_graph(incidence_graph(p3)), ValidationError);
}

TEST_CASE("tree invariants hold for all enumerated trees") {
  for (const auto& t : enumerate_trees_up_to(5, {"a", "b"})) {
    auto s = t.to_structure();
    CHECK(s.tuples("left").size() + s.tuples("right").size() == t.size() - 1);
    int roots = 0;
    for (std::size_t v = 0; v < t.size(); ++v) roots += t.parent(static_cast<int>(v)) == kNoNode;
    CHECK(roots == 1);
    CHECK(Tree::from_structure(s) == t);
  }
  // Catalan numbers times labelings.
  CHECK(enumerate_trees(3, {"a"}).size() == 5);
  CHECK(enumerate_trees(4, {"a", "b"}).size() == 14 * 16);
}

TEST_CASE("tree validation") {
  CHECK_THROWS_AS(Tree({"a"}, {0, 0}, {1, kNoNode}, {kNoNode, 0}), ValidationError);  // cycle
  CHECK_THROWS_AS(Tree({"a"}, {0, 0}, {kNoNode, kNoNode}, {kNoNode, kNoNode}), ValidationError);  // two roots
  CHECK_THROWS_AS(Tree({"a"}, {0, 0, 0}, {1, kNoNode, kNoNode}, {1, kNoNode, kNoNode}), ValidationError);
  auto s = build_structure(tree_signature({"a", "b"}), {"r"}, {{"label_a", {{"r"}}}, {"label_b", {{"r"}}}});
  CHECK_THROWS_AS(Tree::from_structure(s), ValidationError);
}

TEST_CASE("structure text format round-trips bit-exactly") {
  std::mt19937_64 rng(7);
  std::vector<Structure> samples{make_grid(3), make_grid_graph(3).to_structure(),
                                 incidence_graph(make_grid_graph(2)).to_structure()};
  auto trees = enumerate_trees(4, {"a", "b"});
  for (int i = 0; i < 10; ++i) samples.push_back(trees[rng() % trees.size()].to_structure());
  samples.push_back(build_structure(Signature({{"R", 3}, {"P", 1}}), {"x", "y"},
                                    {{"R", {{"x", "y", "x"}, {"y", "y", "y"}}}, {"P", {{"y"}}}}));
  for (const auto& s : samples) {
    auto text = print_structure(s);
    auto back = parse_structure(text);
    CHECK(back == s);
    CHECK(print_structure(back) == text);
  }
  CHECK_THROWS_AS(parse_structure("{\"kind\": \"tree\""), ParseError);
  CHECK_THROWS_AS(parse_structure(R"({"kind":"grid","signature":{"H":2,"V":2},"domain":["1,1","1,2","2,1","2,2"],"relations":{"H":[["1,1","1,2"]],"V":[]}})"),
                  ValidationError);
}

TEST_CASE("isomorphism") {
  Graph p3a({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  Graph p3b({"x", "y", "z"}, {{"x", "z"}, {"z", "y"}});
  Graph k3({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  CHECK(isomorphic(p3a, p3b));
  CHECK_FALSE(isomorphic(p3a, k3));
}
