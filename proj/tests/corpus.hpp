#pragma once

// Shared formula corpus for the tree tests and the acceptance suite.

#include <random>
#include <string>
#include <vector>

#include "cmsovc/compiler.hpp"
#include "cmsovc/logic.hpp"
#include "cmsovc/structures.hpp"
#include "cmsovc/transduce.hpp"

namespace corpus {

struct TreeFormula {
  std::string text;
  std::vector<std::string> tracks;
};

inline const std::vector<TreeFormula>& tree_formulas() {
  static const std::vector<TreeFormula> all{
      {"(label_a x)", {"x"}},
      {"(left x y)", {"x", "y"}},
      {"(right x y)", {"x", "y"}},
      {"(= x y)", {"x", "y"}},
      {"(in x X)", {"x", "X"}},
      {"(mod X 0 2)", {"X"}},
      {"(mod X 1 3)", {"X"}},
      {"(exists x (and (label_a x) (forall y (not (left y x)))))", {}},
      {"(existsS X (and (in x X) (forall y (implies (in y X) (label_b y)))))", {"x"}},
      {"(forallS X (implies (and (in x X) (forall u (forall v (implies (and (in u X) (or (left u v) (right u v))) "
       "(in v X))))) (in y X)))",
       {"x", "y"}},
      {"(existsS X (and (mod X 1 2) (forall z (iff (in z X) (label_a z)))))", {}},
      {"(existsS Y (and (mod Y 2 3) (forall z (implies (in z Y) (label_b z))) (in x Y)))", {"x"}},
      {"(forall x (implies (label_a x) (exists y (or (left x y) (right x y)))))", {}},
      {"(exists z (and (left z x) (right z y)))", {"x", "y"}},
      {"(iff (label_a x) (not (in x X)))", {"x", "X"}},
  };
  return all;
}

/// Partitioned formulas over trees: text, objects, parameters.
struct TreePartitioned {
  std::string text;
  std::vector<std::string> objects;
  std::vector<std::string> parameters;
};

inline const std::vector<TreePartitioned>& tree_partitioned() {
  static const std::vector<TreePartitioned> all{
      // y is an ancestor-or-self of x.
      {"(forallS X (implies (and (in y X) (forall u (forall v (implies (and (in u X) (or (left u v) (right u v))) "
       "(in v X))))) (in x X)))",
       {"x"},
       {"y"}},
      {"(or (left y x) (right y x))", {"x"}, {"y"}},
      {"(and (label_a x) (not (= x y)))", {"x"}, {"y"}},
      {"(exists z (and (left z x) (right z y)))", {"x"}, {"y"}},
      {"(label_b x)", {"x"}, {}},
      {"(or (= x y1) (= x y2))", {"x"}, {"y1", "y2"}},
      {"(and (left x1 x2) (label_a y))", {"x1", "x2"}, {"y"}},
      {"(or (= x1 y) (= x2 y))", {"x1", "x2"}, {"y"}},
  };
  return all;
}

/// Enumerates every valuation of `tracks` over a tree with n nodes: element
/// tracks range over nodes, set tracks over subsets.
template <class F>
void for_each_valuation(const std::vector<std::string>& tracks, int n, F&& visit) {
  std::vector<std::vector<int>> marked(tracks.size());
  std::vector<int> counter(tracks.size(), 0);
  std::vector<int> limit;
  for (const auto& t : tracks) limit.push_back(cmsovc::is_set_variable(t) ? (1 << n) : n);
  while (true) {
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      marked[i].clear();
      if (cmsovc::is_set_variable(tracks[i])) {
        for (int v = 0; v < n; ++v)
          if (counter[i] >> v & 1) marked[i].push_back(v);
      } else {
        marked[i].push_back(counter[i]);
      }
    }
    visit(static_cast<const std::vector<std::vector<int>>&>(marked));
    std::size_t i = 0;
    for (; i < tracks.size(); ++i) {
      if (++counter[i] < limit[i]) break;
      counter[i] = 0;
    }
    if (i == tracks.size()) return;
  }
}

/// Valuation in the logic module's terms for the given marks.
inline cmsovc::Valuation to_valuation(const cmsovc::Tree& t, const std::vector<std::string>& tracks,
                                      const std::vector<std::vector<int>>& marked) {
  cmsovc::Valuation v;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (cmsovc::is_set_variable(tracks[i])) {
      auto& s = v.sets[tracks[i]];
      for (int n : marked[i]) s.insert(t.name(n));
    } else {
      v.elements[tracks[i]] = t.name(marked[i].at(0));
    }
  }
  return v;
}

inline cmsovc::Valuation to_valuation(const cmsovc::Structure& s, const std::vector<std::string>& tracks,
                                      const std::vector<std::vector<int>>& marked) {
  cmsovc::Valuation v;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (cmsovc::is_set_variable(tracks[i])) {
      auto& set = v.sets[tracks[i]];
      for (int n : marked[i]) set.insert(s.element(n));
    } else {
      v.elements[tracks[i]] = s.element(marked[i].at(0));
    }
  }
  return v;
}

/// Checks  s ⊨ ψ(ū)  iff  ū ⊆ dom(t(s)) and t(s) ⊨ φ(ū)  for every valuation of `tracks` over s.
/// Returns the number of valuations checked, or -1 on the first disagreement.
inline long biconditional_cases(const cmsovc::Transduction& t, const cmsovc::Formula& phi, const cmsovc::Formula& psi,
                                const cmsovc::Structure& s, const std::vector<std::string>& tracks) {
  const auto image = cmsovc::apply(t, s);
  long cases = 0;
  bool ok = true;
  for_each_valuation(tracks, static_cast<int>(s.size()), [&](const auto& marked) {
    if (!ok) return;
    const auto v = to_valuation(s, tracks, marked);
    bool inside = true;
    for (const auto& m : marked)
      for (int e : m) inside = inside && image.index_of(s.element(e)).has_value();
    const bool rhs = inside && cmsovc::check(image, phi, v);
    ok = cmsovc::check(s, psi, v) == rhs;
    ++cases;
  });
  return ok ? cases : -1;
}

/// Vertices v0..v(n-1); edge i<j present when bit k of mask is set, k running over pairs in order.
inline cmsovc::Graph graph_from_mask(int n, std::uint64_t mask) {
  std::vector<std::string> vs;
  for (int i = 0; i < n; ++i) vs.push_back("v" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> es;
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k)
      if (mask >> k & 1U) es.emplace_back(vs[static_cast<std::size_t>(i)], vs[static_cast<std::size_t>(j)]);
  return cmsovc::Graph(vs, es);
}

/// Every labelled graph on 1..max_n vertices.
inline std::vector<cmsovc::Graph> all_graphs(int max_n) {
  std::vector<cmsovc::Graph> out;
  for (int n = 1; n <= max_n; ++n)
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << (n * (n - 1) / 2)); ++m) out.push_back(graph_from_mask(n, m));
  return out;
}

inline cmsovc::Graph random_graph(int n, std::mt19937_64& rng) {
  const int pairs = n * (n - 1) / 2;
  return graph_from_mask(n, pairs == 0 ? 0 : rng() & ((std::uint64_t{1} << pairs) - 1));
}

/// Formulas over the incidence encoding, with their free variables.
inline const std::vector<TreeFormula>& incidence_formulas() {
  static const std::vector<TreeFormula> all{
      {"(exists e (exists u (inc e u)))", {}},
      {"(existsS X (and (forall z (implies (in z X) (not (vert z)))) (forall v (implies (vert v) (exists e (and (in e "
       "X) (inc e v)))))))",
       {}},
      {"(existsS X (and (forall z (iff (in z X) (not (vert z)))) (mod X 0 2)))", {}},
      {"(existsS X (and (forall z (implies (in z X) (not (vert z)))) (forall v (implies (vert v) (exists e (and (in e "
       "X) (inc e v) (forall f (implies (and (in f X) (inc f v)) (= f e)))))))))",
       {}},
      {"(forallS X (implies (and (forall z (implies (in z X) (vert z))) (exists v (in v X)) (forall e (forall u "
       "(implies (and (inc e u) (in u X)) (forall w (implies (inc e w) (in w X))))))) (forall v (implies (vert v) (in "
       "v X)))))",
       {}},
      {"(exists e (and (inc e x) (inc e y) (not (= x y))))", {"x", "y"}},
      {"(and (vert x) (existsS Y (and (forall z (implies (in z Y) (inc z x))) (mod Y 1 2))))", {"x"}},
  };
  return all;
}

/// Graph-to-graph transductions over the adjacency encoding.
inline std::vector<cmsovc::Transduction> graph_transductions() {
  using namespace cmsovc;
  auto make = [](const std::string& domain, const std::string& edge) {
    Transduction t;
    t.input = Signature({{"E", 2}});
    t.output = Signature({{"E", 2}});
    t.domain = parse_formula(domain);
    t.relations = {{"E", {"x", "y"}, parse_formula(edge)}};
    t.output_kind = StructureKind::GraphAdjacency;
    return t;
  };
  const std::string conn =
      "(and (not (= x y)) (forallS Z (implies (and (in x Z) (forall u (forall w (implies (and (in u Z) (E u w)) (in w "
      "Z))))) (in y Z))))";
  return {
      make("(true)", "(E x y)"),
      make("(true)", "(and (not (E x y)) (not (= x y)))"),
      make("(exists y (E x y))", "(E x y)"),
      make("(true)", "(and (not (= x y)) (or (E x y) (exists z (and (E x z) (E z y)))))"),
      make("(true)", conn),
      make("(existsS Y (and (forall z (iff (in z Y) (E x z))) (mod Y 0 2)))", "(E x y)"),
  };
}

/// Formulas over {E} used as pull-back targets.
inline const std::vector<TreeFormula>& graph_formulas() {
  static const std::vector<TreeFormula> all{
      {"(exists x (exists y (E x y)))", {}},
      {"(forall x (exists y (E x y)))", {}},
      {"(E x y)", {"x", "y"}},
      {"(existsS X (and (mod X 1 2) (forall z (iff (in z X) (exists w (E z w))))))", {}},
      {"(not (exists z (and (E x z) (E z y))))", {"x", "y"}},
      {"(forall z (implies (in z X) (exists w (and (in w X) (E z w)))))", {"X"}},
      {"(and (mod X 0 3) (forall z (implies (in z X) (not (= z x)))))", {"x", "X"}},
  };
  return all;
}

}  // namespace corpus
