#include <doctest.h>

#include <cmath>

#include "cmsovc/setsys.hpp"

using namespace cmsovc;

namespace {

std::vector<ElementId> names(int n) {
  std::vector<ElementId> u;
  for (int i = 1; i <= n; ++i) u.push_back(std::to_string(i));
  return u;
}

TupleSetSystem singletons(int n) {
  std::vector<Member> fam;
  for (int i = 0; i < n; ++i) fam.push_back({static_cast<TupleCode>(i)});
  return TupleSetSystem(names(n), 1, fam);
}

TupleSetSystem powerset(int n) {
  std::vector<Member> fam;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Member m;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) m.push_back(static_cast<TupleCode>(i));
    fam.push_back(m);
  }
  return TupleSetSystem(names(n), 1, fam);
}

// Sets of size 1 and 2 over n elements (the family cut out by x=y1 or x=y2).
TupleSetSystem pairs(int n) {
  std::vector<Member> fam;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Member m{static_cast<TupleCode>(a), static_cast<TupleCode>(b)};
      fam.push_back(m);
    }
  return TupleSetSystem(names(n), 1, fam);
}

// Closed neighborhoods in the n-cycle.
TupleSetSystem cycle_neighborhoods(int n) {
  std::vector<Member> fam;
  for (int v = 0; v < n; ++v)
    fam.push_back({static_cast<TupleCode>(v), static_cast<TupleCode>((v + 1) % n),
                   static_cast<TupleCode>((v + n - 1) % n)});
  return TupleSetSystem(names(n), 1, fam);
}

// Independent oracle: distinct traces computed with bitmasks.
std::uint64_t brute_growth(const TupleSetSystem& f, int n) {
  const int u = static_cast<int>(f.universe().size());
  std::uint64_t best = 0;
  for (int x = 0; x < (1 << u); ++x) {
    if (__builtin_popcount(static_cast<unsigned>(x)) != n) continue;
    std::set<int> traces;
    for (const auto& m : f.family()) {
      int t = 0;
      for (auto c : m) t |= 1 << c;
      traces.insert(t & x);
    }
    best = std::max<std::uint64_t>(best, traces.size());
  }
  return best;
}

}  // namespace

TEST_CASE("family is canonical") {
  TupleSetSystem f(names(3), 1, {{2, 0}, {0, 2, 2}, {}});
  CHECK(f.size() == 2);
  CHECK(f.family()[0].empty());
  CHECK(f.family()[1] == Member{0, 2});
  CHECK_THROWS_AS(TupleSetSystem(names(2), 1, {{5}}), ValidationError);
  CHECK_THROWS_AS(TupleSetSystem(names(2), 0, {}), ValidationError);
}

TEST_CASE("restrict") {
  auto f = singletons(3);
  CHECK(restrict(f, std::vector<int>{0, 1, 2}) == f);
  auto empty = restrict(f, std::vector<int>{});
  CHECK(empty.size() == 1);
  CHECK(empty.family()[0].empty());
  auto r = restrict(f, std::vector<ElementId>{"1", "2"});
  CHECK(r.size() == 3);  // {1}, {2}, {}
  CHECK_THROWS_AS(restrict(f, std::vector<ElementId>{"9"}), ValidationError);

  // k = 2: keep S ∩ X^2.
  // Codes t0 + 3*t1: (1,2) -> 3, (1,3) -> 6.
  TupleSetSystem g(names(3), 2, {{3, 6}});
  auto rg = restrict(g, std::vector<int>{0, 1});
  REQUIRE(rg.size() == 1);
  CHECK(rg.member_elements(0) == std::vector<std::vector<ElementId>>{{"1", "2"}});
}

TEST_CASE("shattering") {
  CHECK(is_shattered(singletons(3), {}));
  CHECK_FALSE(is_shattered(singletons(3), {0, 1}));
  CHECK(is_shattered(singletons(3), {1}));
  auto a = pairs(4);
  CHECK(a.size() == 10);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) CHECK(is_shattered(a, {i, j}));
  CHECK_FALSE(is_shattered(a, {0, 1, 2}));
}

TEST_CASE("vc dimension") {
  CHECK(vc_dimension(powerset(3)) == 3);
  for (int n = 2; n <= 6; ++n) CHECK(vc_dimension(singletons(n)) == 1);
  CHECK(vc_dimension(pairs(5)) == 2);
  // Closed neighborhoods of the path 1-2-3-4: {1,2},{1,2,3},{2,3,4},{3,4}.
  TupleSetSystem p4(names(4), 1, {{0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3}});
  // Oracle: largest X with all 2^|X| traces, by brute force over 16 subsets.
  int best = 0;
  for (int x = 0; x < 16; ++x) {
    std::set<int> traces;
    for (const auto& m : p4.family()) {
      int t = 0;
      for (auto c : m) t |= 1 << c;
      traces.insert(t & x);
    }
    const int size = __builtin_popcount(static_cast<unsigned>(x));
    if (traces.size() == (1u << size)) best = std::max(best, size);
  }
  CHECK(best == 1);  // golden: no 2-set has the empty trace
  CHECK(vc_dimension(p4) == best);
  auto w = vc_witness(p4);
  CHECK(w.size() == 1);
  CHECK(is_shattered(p4, w));
}

TEST_CASE("growth function") {
  auto s5 = singletons(5);
  CHECK(growth_function(s5, 0).value == 1);
  CHECK(growth_function(s5, 3).value == 4);
  auto c5 = cycle_neighborhoods(5);
  CHECK(growth_function(c5, 3).value == brute_growth(c5, 3));
  CHECK_THROWS_AS(growth_function(s5, 6), ValidationError);
  auto sampled = growth_function(c5, 3, GrowthMode::Sampled, 20, 1);
  CHECK(sampled.lower_bound);
  CHECK(sampled.value <= growth_function(c5, 3).value);
  CHECK(growth_function(c5, 3, GrowthMode::Sampled, 20, 1).value == sampled.value);
}

TEST_CASE("Sauer-Shelah bound") {
  for (int n = 0; n < 10; ++n) CHECK(sauer_shelah_bound(static_cast<std::uint64_t>(n), 0) == 1);
  CHECK(sauer_shelah_bound(4, 2) == 11);
  CHECK(sauer_shelah_bound(3, 7) == 8);
  for (const auto& f : {singletons(5), powerset(4), pairs(6), cycle_neighborhoods(7)}) {
    const auto d = static_cast<std::uint64_t>(vc_dimension(f));
    for (int n = 0; n <= static_cast<int>(f.universe().size()); ++n) {
      const auto pi = growth_function(f, n).value;
      CHECK(pi == brute_growth(f, n));
      CHECK(pi <= sauer_shelah_bound(static_cast<std::uint64_t>(n), d));
      CHECK(pi <= (std::uint64_t{1} << n));
    }
  }
  CHECK(density_to_dim_bound(2, 1) == doctest::Approx(4.0));
  CHECK_THROWS_AS(density_to_dim_bound(0, 1), ValidationError);
}

TEST_CASE("fit_density") {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> lin, exp2;
  for (std::uint64_t n = 2; n <= 10; ++n) lin.emplace_back(n, n + 1);
  for (std::uint64_t n = 2; n <= 6; ++n) exp2.emplace_back(n, std::uint64_t{1} << n);
  auto a = fit_density(lin);
  CHECK(a.exponent >= 0.8);
  CHECK(a.exponent <= 1.2);
  CHECK_FALSE(a.poor_fit);
  auto b = fit_density(exp2);
  CHECK(b.exponent > 2);
  CHECK(b.poor_fit);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> alpha;
  for (int u = 4; u <= 9; ++u) alpha.emplace_back(u, growth_function(pairs(9), u).value);
  auto c = fit_density(alpha);
  CHECK(c.exponent > 1.6);
  CHECK(c.exponent < 2.4);

  CHECK_THROWS_AS(fit_density({{2, 3}, {2, 4}, {2, 5}}), ValidationError);
  CHECK_THROWS_AS(fit_density({{2, 3}, {3, 4}}), ValidationError);
}

TEST_CASE("growth csv") {
  auto f = singletons(3);
  std::vector<std::pair<int, GrowthValue>> rows;
  for (int n = 0; n <= 3; ++n) rows.emplace_back(n, growth_function(f, n));
  CHECK(growth_csv(rows) == "n,pi,mode\n0,1,exact\n1,2,exact\n2,3,exact\n3,3,exact\n");
}
