#include "cmsovc/gridlab.hpp"

#include <cmath>
#include <algorithm>
#include <map>
#include <sstream>

#include "cmsovc/setsys.hpp"

namespace cmsovc {

namespace {

// Flip patterns of a cell a and the cell c above it.
std::string f10(const std::string& a, const std::string& c) {
  return "(and (in " + a + " X) (not (in " + c + " X)))";
}
std::string f01(const std::string& a, const std::string& c) {
  return "(and (not (in " + a + " X)) (in " + c + " X))";
}

std::string reach(const std::string& rel, const std::string& a, const std::string& b) {
  return "(forallS Y (implies (and (in " + a + " Y) (forall u (implies (in u Y) (forall v (implies (" + rel +
         " u v) (in v Y)))))) (in " + b + " Y)))";
}

// Shattering check on an n x n grid whose cells are named arbitrarily; coords maps names to (i,j).
ShatterReport shatter(int n, ShatterMode mode, const Structure& grid,
                      const std::map<ElementId, std::pair<int, int>>& coords, const CheckOptions& options) {
  ShatterReport r;
  r.n = n;
  r.mode = mode;
  const auto& dom = grid.domain();
  std::map<std::pair<int, int>, ElementId> at;
  for (const auto& [name, c] : coords) at[c] = name;
  const int size = floor_log2(n);
  for (int i = 1; i <= size; ++i) r.candidate.push_back(at.at({i, 1}));

  TupleOracle oracle;
  std::optional<ModelChecker> checker;
  if (mode == ShatterMode::Brute) {
    if (n > 4) throw BudgetExceeded("brute mode is limited to n <= 4 (set quantifier over n^2 cells)");
    const auto theta = shattering_formula();
    checker.emplace(grid, theta.formula, std::vector<std::string>{"x", "y"}, std::vector<std::string>{}, options);
    oracle = [&](std::span<const int> xs, std::span<const int> ys) {
      const int args[2] = {xs[0], ys[0]};
      return checker->holds(args);
    };
  } else {
    // X is unique given ψ; build it and make sure ψ accepts it.
    const auto counter = counter_set(n);
    ElementSet x(dom.size());
    for (std::size_t p = 0; p < dom.size(); ++p) {
      const auto [i, j] = coords.at(dom[p]);
      if (counter.count(grid_cell(i, j))) x.insert(static_cast<int>(p));
    }
    ModelChecker psi(grid, counter_formula(), {}, {"X"}, options);
    const ElementSet sets[1] = {x};
    if (!psi.holds({}, sets)) throw Error("counter formula rejects the constructed counter set");
    oracle = [&, counter](std::span<const int> xs, std::span<const int> ys) {
      const auto [i, one] = coords.at(dom[static_cast<std::size_t>(xs[0])]);
      const auto [first, j] = coords.at(dom[static_cast<std::size_t>(ys[0])]);
      return one == 1 && first == 1 && counter.count(grid_cell(i, j)) > 0;
    };
  }
  const auto system = define_set_system(dom, 1, 1, oracle);
  r.vc_dimension = vc_dimension(system);

  std::vector<int> cand;
  for (const auto& c : r.candidate) cand.push_back(grid.require_index(c));
  r.witnesses.assign(std::size_t{1} << cand.size(), std::nullopt);
  // One member per parameter, in domain order.
  for (std::size_t y = 0; y < dom.size(); ++y) {
    std::size_t mask = 0;
    for (std::size_t t = 0; t < cand.size(); ++t) {
      const int xs[1] = {cand[t]};
      const int ys[1] = {static_cast<int>(y)};
      if (oracle(xs, ys)) mask |= std::size_t{1} << t;
    }
    if (!r.witnesses[mask]) r.witnesses[mask] = dom[y];
  }
  r.verdict = std::all_of(r.witnesses.begin(), r.witnesses.end(), [](const auto& w) { return w.has_value(); });
  return r;
}

Transduction with_passthrough(Transduction t, const std::vector<std::string>& labels) {
  auto in = t.input.relations();
  auto out = t.output.relations();
  for (const auto& l : labels) {
    in.push_back({l, 1});
    out.push_back({l, 1});
    t.relations.push_back({l, {"x"}, mk::atom(l, {"x"})});
  }
  t.input = Signature(in);
  t.output = Signature(out);
  return t;
}

}  // namespace

Formula counter_formula() {
  const std::string text =
      "(and (forall z (implies (not (exists p (V p z))) (not (in z X)))) "
      "(forall a (forall c (implies (V a c) (and "
      "(implies (not (exists p (H p a))) (or " + f10("a", "c") + " " + f01("a", "c") + ")) "
      "(implies (not (exists q (H a q))) (not " + f10("a", "c") + ")) "
      "(forall b (implies (H a b) (forall d (implies (V b d) (and "
      "(implies " + f10("a", "c") + " (or " + f10("b", "d") + " " + f01("b", "d") + ")) "
      "(implies (not " + f10("a", "c") + ") (iff (in b X) (in d X)))))))))))))";
  return parse_formula(text);
}

PartitionedFormula shattering_formula() {
  const auto psi = print_formula(counter_formula());
  const std::string text = "(and (not (exists p (V p x))) (not (exists p (H p y))) (exists w (and (existsS X (and " +
                           psi + " (in w X))) " + reach("V", "x", "w") + " " + reach("H", "y", "w") + ")))";
  return PartitionedFormula(parse_formula(text), {"x"}, {"y"});
}

std::set<ElementId> counter_set(int n) {
  if (n < 1) throw ValidationError("grid side must be at least 1");
  std::set<ElementId> out;
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n && i <= 31; ++i)
      if (((j - 1) >> (i - 1)) & 1) out.insert(grid_cell(i, j));
  return out;
}

int floor_log2(int n) {
  if (n < 1) throw ValidationError("floor_log2 needs n >= 1");
  int k = 0;
  while ((n >> (k + 1)) > 0) ++k;
  return k;
}

std::string_view to_string(ShatterMode mode) { return mode == ShatterMode::Brute ? "brute" : "direct"; }

ShatterMode shatter_mode_from_string(std::string_view text) {
  if (text == "brute") return ShatterMode::Brute;
  if (text == "direct") return ShatterMode::Direct;
  throw ValidationError("unknown mode '" + std::string(text) + "' (brute|direct)");
}

ShatterReport verify_shattering(int n, ShatterMode mode, const CheckOptions& options) {
  if (n < 1) throw ValidationError("grid side must be at least 1");
  const auto grid = make_grid(n);
  auto coords = grid_coordinates(grid);
  return shatter(n, mode, grid, *coords, options);
}

std::optional<std::map<ElementId, std::pair<int, int>>> grid_coordinates(const Structure& s) {
  const auto& sig = s.signature();
  const std::string h(kHorizontal), v(kVertical);
  if (!sig.contains(h) || !sig.contains(v) || sig.arity(h) != 2 || sig.arity(v) != 2) return std::nullopt;
  const auto m = s.size();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (n < 1 || static_cast<std::size_t>(n * n) != m) return std::nullopt;
  std::vector<int> hs(m, -1), vs(m, -1), hp(m, 0), vp(m, 0);
  for (const auto& t : s.tuples(h)) {
    if (hs[static_cast<std::size_t>(t[0])] != -1) return std::nullopt;
    hs[static_cast<std::size_t>(t[0])] = t[1];
    ++hp[static_cast<std::size_t>(t[1])];
  }
  for (const auto& t : s.tuples(v)) {
    if (vs[static_cast<std::size_t>(t[0])] != -1) return std::nullopt;
    vs[static_cast<std::size_t>(t[0])] = t[1];
    ++vp[static_cast<std::size_t>(t[1])];
  }
  int origin = -1;
  for (std::size_t e = 0; e < m; ++e)
    if (hp[e] == 0 && vp[e] == 0) {
      if (origin != -1) return std::nullopt;
      origin = static_cast<int>(e);
    }
  if (origin == -1) return std::nullopt;
  std::map<ElementId, std::pair<int, int>> out;
  std::vector<std::vector<int>> cell(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
  int row_start = origin;
  for (int j = 1; j <= n; ++j) {
    if (row_start < 0) return std::nullopt;
    int c = row_start;
    for (int i = 1; i <= n; ++i) {
      if (c < 0 || !out.emplace(s.element(c), std::pair{i, j}).second) return std::nullopt;
      cell[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = c;
      c = hs[static_cast<std::size_t>(c)];
    }
    if (c != -1) return std::nullopt;
    row_start = vs[static_cast<std::size_t>(row_start)];
  }
  if (row_start != -1) return std::nullopt;
  // Exactly the grid edges.
  if (s.tuples(h).size() != static_cast<std::size_t>(n * (n - 1)) ||
      s.tuples(v).size() != static_cast<std::size_t>(n * (n - 1)))
    return std::nullopt;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      const int c = cell[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
      const int right = i < n ? cell[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] : -1;
      const int up = j < n ? cell[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] : -1;
      if (hs[static_cast<std::size_t>(c)] != right || vs[static_cast<std::size_t>(c)] != up) return std::nullopt;
    }
  for (const auto& r : sig.relations())
    if (r.name != h && r.name != v && !s.tuples(r.name).empty()) return std::nullopt;
  return out;
}

ShatterReport pullback_demo(const Transduction& t, const Structure& s, ShatterMode mode, const CheckOptions& options) {
  const auto image = apply(t, s, options);
  const auto coords = grid_coordinates(image);
  if (!coords) throw ValidationError("the image of the transduction is not a grid");
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(image.size()))));
  return shatter(n, mode, image, *coords, options);
}

PullbackInstance identity_instance(int n) {
  Transduction t;
  t.input = Signature({{std::string(kHorizontal), 2}, {std::string(kVertical), 2}});
  t.output = t.input;
  t.domain = parse_formula("(true)");
  t.relations = {{std::string(kHorizontal), {"x", "y"}, parse_formula("(H x y)")},
                 {std::string(kVertical), {"x", "y"}, parse_formula("(V x y)")}};
  t.output_kind = StructureKind::Grid;
  return {t, make_grid(n)};
}

PullbackInstance grid_graph_instance(int n) {
  const auto j = grid_recovery();
  return {j.base, colored(make_grid_graph(n).to_structure(), j.colors, canonical_coloring(n))};
}

PullbackInstance minor_instance() {
  const auto grid = make_grid_graph(3);
  // Host: the grid graph with the edge (1,1)-(2,1) subdivided by s.
  auto names = grid.vertices();
  names.push_back("s");
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [a, b] : grid.edges()) {
    const auto& u = grid.vertices()[static_cast<std::size_t>(a)];
    const auto& w = grid.vertices()[static_cast<std::size_t>(b)];
    if ((u == grid_cell(1, 1) && w == grid_cell(2, 1)) || (u == grid_cell(2, 1) && w == grid_cell(1, 1))) {
      edges.emplace_back(u, "s");
      edges.emplace_back("s", w);
    } else {
      edges.emplace_back(u, w);
    }
  }
  const Graph host(names, edges, GraphEncoding::Incidence);
  MinorModel model{grid, {}};
  for (const auto& v : grid.vertices()) {
    model.branch_sets.push_back({v});
    if (v == grid_cell(1, 1)) model.branch_sets.back().push_back("s");
  }
  validate_minor_model(host, model);

  const auto minor = minor_transduction();
  const auto rec = grid_recovery();
  auto coloring = minor_valuation(host, model);
  // Branch sets are led by the grid cell itself, so the grid colours sit on the same names.
  for (const auto& [c, cells] : canonical_coloring(3)) coloring[c] = cells;
  auto colors = minor.colors;
  colors.insert(colors.end(), rec.colors.begin(), rec.colors.end());
  const auto first = with_passthrough(minor.base, rec.colors);
  return {compose(first, rec.base), colored(host.to_structure(), colors, coloring)};
}

std::string shatter_csv(const ShatterReport& r) {
  std::ostringstream out;
  out << "subset,members,witness\n";
  for (std::size_t mask = 0; mask < r.witnesses.size(); ++mask) {
    std::string members;
    for (std::size_t t = 0; t < r.candidate.size(); ++t)
      if ((mask >> t) & 1U) members += (members.empty() ? "" : " ") + r.candidate[t];
    out << mask << ",\"" << members << "\"," << (r.witnesses[mask] ? "\"" + *r.witnesses[mask] + "\"" : "") << "\n";
  }
  return out.str();
}

}  // namespace cmsovc
