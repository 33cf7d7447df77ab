#include <doctest.h>

#include "cmsovc/gridlab.hpp"

using namespace cmsovc;

namespace {

// All X over the n x n grid accepted by ψ.
std::vector<std::set<ElementId>> counter_solutions(int n) {
  const auto grid = make_grid(n);
  ModelChecker psi(grid, counter_formula(), {}, {"X"});
  std::vector<std::set<ElementId>> out;
  const auto m = grid.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    ElementSet x(m);
    std::set<ElementId> names;
    for (std::size_t p = 0; p < m; ++p)
      if ((mask >> p) & 1U) {
        x.insert(static_cast<int>(p));
        names.insert(grid.element(static_cast<int>(p)));
      }
    const ElementSet sets[1] = {x};
    if (psi.holds({}, sets)) out.push_back(names);
  }
  return out;
}

}  // namespace

TEST_CASE("counter formula has exactly the binary counter as model") {
  for (int n = 1; n <= 4; ++n) {
    CAPTURE(n);
    const auto sols = counter_solutions(n);
    REQUIRE(sols.size() == 1);
    CHECK(sols[0] == counter_set(n));
  }
  CHECK(counter_set(1).empty());
  CHECK(counter_set(2) == std::set<ElementId>{"1,2"});
  // rows 1..4 hold 0,1,2,3
  CHECK(counter_set(4) == std::set<ElementId>{"1,2", "2,3", "1,4", "2,4"});
}

TEST_CASE("floor log") {
  CHECK(floor_log2(1) == 0);
  CHECK(floor_log2(2) == 1);
  CHECK(floor_log2(3) == 1);
  CHECK(floor_log2(4) == 2);
  CHECK(floor_log2(16) == 4);
  CHECK_THROWS_AS(floor_log2(0), ValidationError);
}

TEST_CASE("shattering by brute force") {
  for (int n : {1, 2, 3, 4}) {
    CAPTURE(n);
    const auto r = verify_shattering(n, ShatterMode::Brute);
    CHECK(r.verdict);
    CHECK(r.candidate.size() == static_cast<std::size_t>(floor_log2(n)));
    CHECK(r.vc_dimension == floor_log2(n));
    CHECK(r.witnesses.size() == std::size_t{1} << r.candidate.size());
  }
  const auto r2 = verify_shattering(2, ShatterMode::Brute);
  CHECK(r2.candidate == std::vector<ElementId>{"1,1"});
  CHECK(r2.witnesses[0] == ElementId("1,1"));
  CHECK(r2.witnesses[1] == ElementId("1,2"));
  CHECK_THROWS_AS(verify_shattering(5, ShatterMode::Brute), BudgetExceeded);
}

TEST_CASE("direct mode agrees with brute force and scales") {
  for (int n : {1, 2, 3, 4}) {
    const auto b = verify_shattering(n, ShatterMode::Brute);
    const auto d = verify_shattering(n, ShatterMode::Direct);
    CHECK(b.candidate == d.candidate);
    CHECK(b.witnesses == d.witnesses);
    CHECK(b.vc_dimension == d.vc_dimension);
  }
  for (int n : {8, 16}) {
    const auto r = verify_shattering(n, ShatterMode::Direct);
    CHECK(r.verdict);
    CHECK(r.candidate.size() == static_cast<std::size_t>(floor_log2(n)));
    CHECK(r.vc_dimension == floor_log2(n));
  }
}

TEST_CASE("grid coordinates") {
  const auto c = grid_coordinates(make_grid(3));
  REQUIRE(c);
  CHECK(c->at("2,3") == std::pair{2, 3});
  CHECK_FALSE(grid_coordinates(make_grid_graph(3).to_structure()));
  // transposed grid has the same shape but different names
  auto g = make_grid(2);
  auto swapped = g.contents();
  std::swap(swapped["H"], swapped["V"]);
  const auto t = grid_coordinates(build_structure(g.signature(), g.domain(), swapped));
  REQUIRE(t);
  CHECK(t->at("1,2") == std::pair{2, 1});
  auto broken = g.contents();
  broken["H"].pop_back();
  CHECK_FALSE(grid_coordinates(build_structure(g.signature(), g.domain(), broken)));
}

TEST_CASE("pull-back demonstrations") {
  const auto id = identity_instance(4);
  const auto r = pullback_demo(id.transduction, id.input, ShatterMode::Brute);
  const auto direct = verify_shattering(4, ShatterMode::Brute);
  CHECK(r.witnesses == direct.witnesses);
  CHECK(r.candidate == direct.candidate);

  // the pulled-back formula itself, checked on the pre-image
  {
    const auto small = identity_instance(2);
    const auto theta = shattering_formula();
    const auto psi = backward_translate(small.transduction, theta.formula);
    const auto via = pullback_demo(small.transduction, small.input, ShatterMode::Brute);
    const auto sys = define_set_system(small.input, PartitionedFormula(psi, {"x"}, {"y"}));
    CHECK(sys == define_set_system(small.input, theta));
    CHECK(via.vc_dimension == vc_dimension(sys));
  }

  const auto gg = grid_graph_instance(4);
  const auto rg = pullback_demo(gg.transduction, gg.input, ShatterMode::Brute);
  CHECK(rg.verdict);
  CHECK(rg.candidate.size() == 2);

  const auto m = minor_instance();
  const auto rm = pullback_demo(m.transduction, m.input, ShatterMode::Brute);
  CHECK(rm.verdict);
  CHECK(rm.n == 3);
  CHECK(rm.candidate.size() == 1);
  for (const auto& w : rm.witnesses) CHECK(m.input.index_of(*w).has_value());

  // not a grid
  const auto bad = identity_instance(2);
  Transduction drop = bad.transduction;
  drop.domain = parse_formula("(exists y (H x y))");
  CHECK_THROWS_AS(pullback_demo(drop, bad.input, ShatterMode::Direct), ValidationError);
}

TEST_CASE("csv") {
  const auto csv = shatter_csv(verify_shattering(4, ShatterMode::Direct));
  CHECK(csv.rfind("subset,members,witness\n", 0) == 0);
  CHECK(csv.find("3,\"1,1 2,1\",\"1,4\"") != std::string::npos);
}
