#include <doctest.h>

#include <random>
#include <set>

#include "cmsovc/compression.hpp"
#include "corpus.hpp"

using namespace cmsovc;

namespace {

const std::vector<std::string> kSigma{"a", "b"};

// 0 root, 1/2 its children, 3..6 the leaves left to right.
Tree complete_depth2(std::vector<int> labels = std::vector<int>(7, 0)) {
  return Tree(kSigma, std::move(labels), {1, 3, 5, kNoNode, kNoNode, kNoNode, kNoNode},
              {2, 4, 6, kNoNode, kNoNode, kNoNode, kNoNode});
}

Tree left_chain(int n) {
  std::vector<int> left, right(static_cast<std::size_t>(n), kNoNode);
  for (int v = 0; v < n; ++v) left.push_back(v + 1 < n ? v + 1 : kNoNode);
  return Tree(kSigma, std::vector<int>(static_cast<std::size_t>(n), 0), left, right);
}

// Parity of the number of a-labelled nodes; ⊥ counts as 0.
TreeAutomaton parity_automaton() {
  TrackAlphabet alpha(kSigma, {});
  std::vector<int> table(9 * 2);
  for (int l = -1; l < 2; ++l)
    for (int r = -1; r < 2; ++r)
      for (int s = 0; s < 2; ++s)
        table[static_cast<std::size_t>(((l + 1) * 3 + (r + 1)) * 2 + s)] = (std::max(l, 0) + std::max(r, 0) + (s == 0)) % 2;
  return TreeAutomaton(alpha, 2, table, {false, true});
}

std::vector<int> random_subset(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<int> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  return all;
}

// Least B-ancestor by walking parents.
int walk_anchor(const Tree& t, const AnchorSet& b, int v) {
  while (!b.contains(v)) v = t.parent(v);
  return v;
}

}  // namespace

TEST_CASE("anchor set examples") {
  const auto t = complete_depth2();
  CHECK(compute_anchor_set(t, {0}).nodes == std::vector<int>{0});
  const auto b = compute_anchor_set(t, {3, 6});
  CHECK(b.nodes == std::vector<int>{0, 3, 6});
  const auto chain = left_chain(5);
  CHECK(compute_anchor_set(chain, {4}).nodes == std::vector<int>{0, 4});
  CHECK(compute_anchor_set(t, {4, 3}).nodes == std::vector<int>{0, 1, 3, 4});
  CHECK_THROWS_AS(compute_anchor_set(t, {}), ValidationError);
  CHECK_THROWS_AS(compute_anchor_set(t, {9}), ValidationError);
}

TEST_CASE("contraction examples") {
  const auto single = contract(compute_anchor_set(complete_depth2(), {0}));
  CHECK(single.postorder == std::vector<int>{0});
  CHECK(single.child_count(0) == 0);
  CHECK(single.fibers[0].size() == 7);

  const auto c = contract(compute_anchor_set(complete_depth2(), {3, 6}));
  CHECK(c.left[0] == 3);
  CHECK(c.right[0] == 6);
  CHECK(c.anchor_map == std::vector<int>{0, 0, 0, 3, 0, 0, 6});
  auto [shape, origin] = c.shape();
  CHECK(shape.size() == 3);
  CHECK(origin == std::vector<int>{0, 3, 6});

  const auto chain = contract(compute_anchor_set(left_chain(5), {4}));
  CHECK(chain.left[0] == 4);
  CHECK(chain.right[0] == kNoNode);
}

TEST_CASE("anchor invariants on random trees") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 2000; ++it) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto t = random_tree(n, kSigma, rng);
    const auto k = 1 + rng() % std::min<std::size_t>(5, static_cast<std::size_t>(n));
    const auto b = compute_anchor_set(t, random_subset(t.size(), k, rng));
    REQUIRE(b.nodes.size() <= 2 * b.anchors.size());
    const auto c = contract(b);
    for (int v = 0; v < n; ++v) {
      const int a = c.anchor_map[static_cast<std::size_t>(v)];
      CHECK(a == walk_anchor(t, b, v));
      CHECK(c.anchor_map[static_cast<std::size_t>(a)] == a);
    }
    // Every non-root B node is a contracted child of exactly one node.
    std::size_t edges = 0;
    for (int u : b.nodes) edges += static_cast<std::size_t>(c.child_count(u));
    CHECK(edges + 1 == b.nodes.size());
    CHECK_NOTHROW(c.shape());
  }
}

TEST_CASE("theorem constant") {
  CHECK(theorem_constant(5, 2, 0) == 1);
  CHECK(theorem_constant(1, 1, 1) == 4);
  CHECK(theorem_constant(2, 0, 1) == 512);
  CHECK(theorem_constant(2, 1, 2) == BigInt(4) * 3 * boost::multiprecision::pow(BigInt(2), 28));
}

TEST_CASE("context transformations") {
  const auto labels = std::vector<int>{0, 1, 0, 0, 1, 0, 0};
  const auto t = complete_depth2(labels);
  const Emulation e(parity_automaton(), {}, {});
  const auto c = contract(compute_anchor_set(t, {3, 6}));
  const auto root = e.context_transform(c, std::nullopt, std::nullopt, 0);
  CHECK(root.arity == 2);
  // Fiber of the root: nodes 0,1,2,4,5 with a on 0, 2, 5.
  for (int l = 0; l < 2; ++l)
    for (int r = 0; r < 2; ++r) CHECK(root.values[static_cast<std::size_t>(l * 2 + r)] == (l + r + 3) % 2);
  const auto rho = e.run_original(t, std::nullopt, std::nullopt);
  const std::vector<int> kids{rho[3], rho[6]};
  CHECK(root.apply(kids) == rho[0]);

  const auto leaf = e.context_transform(c, std::nullopt, std::nullopt, 3);
  CHECK(leaf.arity == 0);
  CHECK(leaf.values == std::vector<int>{parity_automaton().delta(-1, -1, 0)});
  CHECK_THROWS_AS(e.context_transform(c, std::nullopt, std::nullopt, 1), ValidationError);

  const TreeAutomaton one(TrackAlphabet(kSigma, {}), 1, std::vector<int>(4 * 2, 0), {true});
  const Emulation trivial(one, {}, {});
  const auto f = trivial.context_transform(c, std::nullopt, std::nullopt, 0);
  CHECK(f.values == std::vector<int>{0});
}

TEST_CASE("delta labelings") {
  const auto t = complete_depth2();
  const auto c = contract(compute_anchor_set(t, {3, 6}));
  const Emulation plain(parity_automaton(), {}, {});
  const auto d0 = plain.delta_labeling(c, std::nullopt);
  for (int u : c.anchors.nodes) CHECK(d0.labels[static_cast<std::size_t>(u)].size() == 1);

  const PartitionedFormula pf(parse_formula("(or (left y x) (label_a x))"), {"x"}, {"y"});
  const auto e = emulation_for(pf, kSigma);
  const auto d = e.delta_labeling(c, std::nullopt);
  REQUIRE(d.labels[0].size() == 2);
  // Same entries as direct context runs with x placed at the root or nowhere.
  CHECK(d.labels[0][1] == e.context_transform(c, std::vector<int>{0}, std::nullopt, 0));
  CHECK(d.labels[0][0] == e.context_transform(c, std::vector<int>{3}, std::nullopt, 0));

  // Labelings for parameter tuples differ from the baseline in at most |y| nodes.
  for (int y = 0; y < 7; ++y) {
    const auto dq = e.delta_labeling(c, std::vector<int>{y});
    int diff = 0;
    for (int u : c.anchors.nodes) diff += !(dq.labels[static_cast<std::size_t>(u)] == d.labels[static_cast<std::size_t>(u)]);
    CHECK(diff <= 1);
  }
}

TEST_CASE("emulation claim on random instances and corrupted controls") {
  std::mt19937_64 rng(11);
  std::vector<Emulation> emulations;
  for (const auto& item : corpus::tree_partitioned())
    emulations.push_back(emulation_for(PartitionedFormula(parse_formula(item.text), item.objects, item.parameters),
                                       kSigma));
  int checked = 0, corrupted = 0;
  for (int it = 0; it < 300; ++it) {
    const auto& e = emulations[static_cast<std::size_t>(it) % emulations.size()];
    const int n = 1 + static_cast<int>(rng() % 8);
    const auto t = random_tree(n, kSigma, rng);
    const auto a = random_subset(t.size(), 1 + rng() % std::min<std::size_t>(4, t.size()), rng);
    const auto b = compute_anchor_set(t, a);
    auto pick = [&](const std::vector<int>& from, std::size_t k) -> NodeTuple {
      if (rng() % 5 == 0) return std::nullopt;
      std::vector<int> out;
      for (std::size_t i = 0; i < k; ++i) out.push_back(from[rng() % from.size()]);
      return out;
    };
    const auto p = pick(b.anchors, e.objects().size());
    const auto q = pick(b.nodes, e.parameters().size());
    CHECK(e.verify_emulation(t, a, std::nullopt, std::nullopt));
    CHECK(e.verify_emulation(t, a, p, q));
    ++checked;
    if (e.automaton().states() >= 2) {
      const auto d = e.delta_labeling(contract(b), q);
      const int u = b.nodes[rng() % b.nodes.size()];
      CHECK_FALSE(e.agrees(e.corrupt(d, p, u), p, q));
      ++corrupted;
    }
  }
  CHECK(checked == 300);
  CHECK(corrupted > 0);
  const auto& e = emulations[1];
  const auto t = complete_depth2();
  CHECK_THROWS_AS(e.verify_emulation(t, {3}, std::vector<int>{4}, std::vector<int>{0}), ValidationError);
  CHECK_THROWS_AS(e.verify_emulation(t, {3}, std::vector<int>{3}, std::vector<int>{5}), ValidationError);
}

TEST_CASE("emulation automaton rejects arity mismatches") {
  const Emulation e(parity_automaton(), {}, {});
  const auto c = contract(compute_anchor_set(complete_depth2(), {3, 6}));
  auto d = e.delta_labeling(c, std::nullopt);
  d.labels[0] = d.labels[3];
  EmulationAutomaton em(e.automaton());
  CHECK_THROWS_AS(em.run(d, std::nullopt), ValidationError);
}

TEST_CASE("trace bound against brute-force counting") {
  std::mt19937_64 rng(3);
  for (const auto& item : corpus::tree_partitioned()) {
    CAPTURE(item.text);
    const auto phi = parse_formula(item.text);
    const PartitionedFormula pf(phi, item.objects, item.parameters);
    const auto e = emulation_for(pf, kSigma);
    for (int it = 0; it < 3; ++it) {
      const auto t = random_tree(2 + static_cast<int>(rng() % 7), kSigma, rng);
      const BoundVerifier verifier(e, t);
      const auto s = t.to_structure();
      const auto a = random_subset(t.size(), 1 + rng() % std::min<std::size_t>(4, t.size()), rng);
      const auto report = verifier.verify(a, it == 0);
      CHECK(report.pass);
      CHECK(report.label_diff_ok);
      // Oracle: traces on A^x by the brute-force checker.
      std::set<std::set<std::vector<int>>> traces;
      corpus::for_each_valuation(item.parameters, static_cast<int>(t.size()), [&](const auto& qm) {
        std::set<std::vector<int>> trace;
        std::vector<std::vector<int>> marks(item.objects.size());
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
          if (i == item.objects.size()) {
            auto v = corpus::to_valuation(t, item.parameters, qm);
            for (std::size_t j = 0; j < item.objects.size(); ++j) v.elements[item.objects[j]] = t.name(marks[j][0]);
            if (check(s, phi, v)) {
              std::vector<int> tuple;
              for (const auto& m : marks) tuple.push_back(m[0]);
              trace.insert(tuple);
            }
            return;
          }
          for (int x : a) {
            marks[i] = {x};
            rec(i + 1);
          }
        };
        rec(0);
        traces.insert(trace);
      });
      CHECK(report.observed == traces.size());
      if (report.labelings) CHECK(report.observed <= *report.labelings);
    }
  }
}
