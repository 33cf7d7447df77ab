#include <doctest.h>

#include "corpus.hpp"

using namespace cmsovc;

TEST_CASE("augment") {
  Tree t({"a", "b"}, {0, 1, 1}, {1, kNoNode, kNoNode}, {2, kNoNode, kNoNode});
  auto zero = augment(t, {"x", "y"}, Valuation{});
  CHECK(zero.bits == std::vector<std::uint32_t>{0, 0, 0});
  auto root = augment(t, {"x"}, Valuation{{{"x", "n0"}}, {}});
  CHECK(root.bits == std::vector<std::uint32_t>{1, 0, 0});
  auto both = augment(t, {"x", "y"}, Valuation{{{"x", "n2"}, {"y", "n2"}}, {}});
  CHECK(both.bits == std::vector<std::uint32_t>{0, 0, 3});
  auto set = augment(t, {"X"}, Valuation{{}, {{"X", {"n1", "n2"}}}});
  CHECK(set.bits == std::vector<std::uint32_t>{0, 1, 1});
  CHECK(both.symbol_name(2) == "b:11");
  CHECK_THROWS_AS(augment(t, {"x"}, Valuation{{{"x", "zz"}}, {}}), ValidationError);
}

TEST_CASE("compiled automata agree with the brute-force checker on all trees up to 4 nodes") {
  const std::vector<std::string> sigma{"a", "b"};
  Compiler compiler(sigma);
  const auto trees = enumerate_trees_up_to(4, sigma);
  for (const auto& item : corpus::tree_formulas()) {
    CAPTURE(item.text);
    const auto phi = parse_formula(item.text);
    const auto a = compiler.compile(phi, item.tracks);
    CHECK(a.alphabet().tracks() == item.tracks);
    for (const auto& t : trees) {
      const auto s = t.to_structure();
      ModelChecker mc(s, phi, free_element_variables(phi), free_set_variables(phi));
      corpus::for_each_valuation(item.tracks, static_cast<int>(t.size()), [&](const auto& marked) {
        const auto v = corpus::to_valuation(t, item.tracks, marked);
        CHECK(accepts(a, augment(t, item.tracks, marked)) == check(s, phi, v));
      });
    }
  }
}

TEST_CASE("compile examples") {
  const std::vector<std::string> sigma{"a", "b"};
  auto taut = compile(parse_formula("(= x x)"), sigma, {"x"});
  auto root_a = compile(parse_formula("(exists x (and (label_a x) (forall y (not (or (left y x) (right y x))))))"),
                        sigma, {});
  for (const auto& t : enumerate_trees_up_to(4, sigma)) {
    for (int v = 0; v < static_cast<int>(t.size()); ++v) CHECK(accepts(taut, augment(t, {"x"}, {{v}})));
    CHECK(accepts(root_a, t) == (t.symbol(t.root()) == "a"));
  }
  CHECK_THROWS_AS(compile(parse_formula("(E x y)"), sigma, {"x", "y"}), ValidationError);
  CHECK_THROWS_AS(compile(parse_formula("(label_c x)"), sigma, {"x"}), ValidationError);
  CHECK_THROWS_AS(compile(parse_formula("(label_a x)"), sigma, {}), ValidationError);
  CompileOptions tiny;
  tiny.budget.max_states = 2;
  CHECK_THROWS_AS(compile(parse_formula("(and (mod X 1 3) (mod Y 0 2))"), sigma, {"X", "Y"}, tiny), BudgetExceeded);
}

TEST_CASE("first-order tracks need exactly one mark") {
  const std::vector<std::string> sigma{"a", "b"};
  auto a = compile(parse_formula("(or (label_a x) (label_b x))"), sigma, {"x"});
  for (const auto& t : enumerate_trees_up_to(4, sigma)) {
    const auto n = t.size();
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
      std::vector<int> marks;
      for (std::size_t v = 0; v < n; ++v)
        if (mask >> v & 1) marks.push_back(static_cast<int>(v));
      CHECK(accepts(a, augment(t, {"x"}, {marks})) == (marks.size() == 1));
    }
  }
}
