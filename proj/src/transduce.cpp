#include "cmsovc/transduce.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include <json.hpp>

namespace cmsovc {

namespace {

Formula with_children(const Formula& f, std::vector<Formula> kids) {
  Formula::Node n{f.kind(), f.kind() == FormulaKind::Atom ? f.relation() : f.variable(), f.args(), f.residue(),
                  f.modulus(), std::move(kids)};
  return Formula(std::move(n));
}

void check_relations(const Formula& f, const Signature& sig, const std::string& where) {
  for (const auto& [name, arity] : relations_used(f)) {
    if (!sig.contains(name)) throw ValidationError(where + " uses relation '" + name + "' outside its signature");
    if (sig.arity(name) != arity)
      throw ValidationError(where + " uses '" + name + "' with arity " + std::to_string(arity));
  }
}

void require_signature(const Structure& s, const Signature& sig) {
  for (const auto& r : sig.relations()) {
    if (!s.signature().contains(r.name) || s.signature().arity(r.name) != r.arity)
      throw ValidationError("input structure lacks relation '" + r.name + "'/" + std::to_string(r.arity));
  }
}

// γ(v): the domain formula with its variable renamed to v.
Formula domain_at(const Transduction& t, const std::string& v) {
  return rename_free(t.domain, {{t.domain_variable, v}});
}

// V ⊆ {z : γ(z)}.
Formula domain_guard(const Transduction& t, const std::string& set) {
  auto avoid = all_variables(t.domain);
  avoid.insert(set);
  const auto z = fresh_variable("z", avoid);
  return mk::forall(z, mk::implies(mk::in(z, set), domain_at(t, z)));
}

std::vector<Formula> tail_children(const Formula& f, const std::function<Formula(const Formula&)>& g) {
  std::vector<Formula> out;
  for (const auto& c : f.children()) out.push_back(g(c));
  return out;
}

}  // namespace

void Transduction::validate() const {
  if (is_set_variable(domain_variable)) throw ValidationError("domain variable must be first-order");
  for (const auto& v : free_variables(domain))
    if (v != domain_variable) throw ValidationError("domain formula has stray free variable '" + v + "'");
  check_relations(domain, input, "domain formula");
  std::set<std::string> defined;
  for (const auto& d : relations) {
    if (!output.contains(d.relation))
      throw ValidationError("definition for '" + d.relation + "', which is not an output relation");
    if (!defined.insert(d.relation).second) throw ValidationError("relation '" + d.relation + "' defined twice");
    if (static_cast<int>(d.variables.size()) != output.arity(d.relation))
      throw ValidationError("definition of '" + d.relation + "' has the wrong number of variables");
    std::set<std::string> vars(d.variables.begin(), d.variables.end());
    if (vars.size() != d.variables.size())
      throw ValidationError("definition of '" + d.relation + "' repeats a variable");
    for (const auto& v : d.variables)
      if (is_set_variable(v)) throw ValidationError("definition variables must be first-order");
    for (const auto& v : free_variables(d.formula))
      if (!vars.count(v)) throw ValidationError("definition of '" + d.relation + "' has stray free variable '" + v + "'");
    check_relations(d.formula, input, "definition of '" + d.relation + "'");
  }
  for (const auto& r : output.relations())
    if (!defined.count(r.name)) throw ValidationError("output relation '" + r.name + "' has no definition");
}

const RelationDefinition& Transduction::definition(std::string_view relation) const {
  for (const auto& d : relations)
    if (d.relation == relation) return d;
  throw ValidationError("no definition for relation '" + std::string(relation) + "'");
}

void NondetTransduction::validate() const {
  base.validate();
  std::set<std::string> seen;
  for (const auto& c : colors) {
    if (!seen.insert(c).second) throw ValidationError("colour '" + c + "' listed twice");
    if (!base.input.contains(c) || base.input.arity(c) != 1)
      throw ValidationError("colour '" + c + "' must be a unary input relation");
    if (base.output.contains(c)) throw ValidationError("colour '" + c + "' clashes with an output relation");
  }
}

Signature NondetTransduction::input() const {
  std::vector<RelationSymbol> rels;
  for (const auto& r : base.input.relations())
    if (std::find(colors.begin(), colors.end(), r.name) == colors.end()) rels.push_back(r);
  return Signature(rels);
}

Structure apply(const Transduction& t, const Structure& s, const CheckOptions& options) {
  t.validate();
  require_signature(s, t.input);
  std::vector<int> dom;
  {
    ModelChecker mc(s, t.domain, {t.domain_variable}, {}, options);
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
      const int a[1] = {i};
      if (mc.holds(a)) dom.push_back(i);
    }
  }
  std::vector<ElementId> names;
  for (int i : dom) names.push_back(s.element(i));
  RelationContents rc;
  for (const auto& r : t.output.relations()) {
    const auto& d = t.definition(r.name);
    auto& rows = rc[r.name];
    const auto k = d.variables.size();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < k; ++i) {
      total *= dom.size();
      if (total > (std::uint64_t{1} << 26)) throw BudgetExceeded("too many candidate tuples for '" + r.name + "'");
    }
    if (dom.empty()) continue;
    ModelChecker mc(s, d.formula, d.variables, {}, options);
    std::vector<std::size_t> idx(k, 0);
    std::vector<int> args(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) args[i] = dom[idx[i]];
      if (mc.holds(args)) {
        std::vector<ElementId> row;
        for (int a : args) row.push_back(s.element(a));
        rows.push_back(std::move(row));
      }
      std::size_t i = k;
      while (i > 0 && ++idx[i - 1] == dom.size()) idx[--i] = 0;
      if (i == 0) break;
    }
  }
  return build_structure(t.output, names, rc, t.output_kind);
}

Structure colored(const Structure& s, const std::vector<std::string>& colors, const Coloring& c) {
  std::map<std::string, std::vector<bool>> flags;
  for (const auto& name : colors) flags[name] = std::vector<bool>(s.size(), false);
  for (const auto& [name, elems] : c) {
    auto it = flags.find(name);
    if (it == flags.end()) throw ValidationError("coloring uses unknown colour '" + name + "'");
    for (const auto& e : elems) it->second[static_cast<std::size_t>(s.require_index(e))] = true;
  }
  return s.with_unary(flags);
}

Structure apply(const NondetTransduction& t, const Structure& s, const Coloring& c, const CheckOptions& options) {
  t.validate();
  return apply(t.base, colored(s, t.colors, c), options);
}

std::set<Structure> apply_all(const NondetTransduction& t, const Structure& s, const CheckOptions& options,
                              std::uint64_t max_colorings) {
  t.validate();
  const auto bits = t.colors.size() * s.size();
  if (bits >= 63 || (std::uint64_t{1} << bits) > max_colorings)
    throw BudgetExceeded("2^" + std::to_string(bits) + " colourings exceed the cap");
  std::set<Structure> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    Coloring c;
    for (std::size_t k = 0; k < t.colors.size(); ++k) {
      auto& set = c[t.colors[k]];
      for (std::size_t i = 0; i < s.size(); ++i)
        if (mask >> (k * s.size() + i) & 1U) set.insert(s.element(static_cast<int>(i)));
    }
    out.insert(apply(t.base, colored(s, t.colors, c), options));
  }
  return out;
}

Formula backward_translate(const Transduction& t, const Formula& phi) {
  t.validate();
  check_relations(phi, t.output, "formula");
  std::function<Formula(const Formula&)> tr = [&](const Formula& f) -> Formula {
    switch (f.kind()) {
      case FormulaKind::Atom: {
        const auto& d = t.definition(f.relation());
        std::map<std::string, std::string> ren;
        for (std::size_t i = 0; i < d.variables.size(); ++i) ren[d.variables[i]] = f.args()[i];
        return rename_free(d.formula, ren);
      }
      case FormulaKind::Exists: return mk::exists(f.variable(), mk::conj({domain_at(t, f.variable()), tr(f.child())}));
      case FormulaKind::Forall: return mk::forall(f.variable(), mk::implies(domain_at(t, f.variable()), tr(f.child())));
      case FormulaKind::ExistsSet:
        return mk::exists_set(f.variable(), mk::conj({domain_guard(t, f.variable()), tr(f.child())}));
      case FormulaKind::ForallSet:
        return mk::forall_set(f.variable(), mk::implies(domain_guard(t, f.variable()), tr(f.child())));
      case FormulaKind::True:
      case FormulaKind::False:
      case FormulaKind::Equal:
      case FormulaKind::In:
      case FormulaKind::Mod: return f;
      default: return with_children(f, tail_children(f, tr));
    }
  };
  std::vector<Formula> parts;
  for (const auto& v : free_variables(phi)) parts.push_back(is_set_variable(v) ? domain_guard(t, v) : domain_at(t, v));
  parts.push_back(tr(phi));
  return mk::conj(std::move(parts));
}

Transduction compose(const Transduction& first, const Transduction& second) {
  first.validate();
  second.validate();
  for (const auto& r : second.input.relations())
    if (!first.output.contains(r.name) || first.output.arity(r.name) != r.arity)
      throw ValidationError("second transduction reads '" + r.name + "', which the first does not produce");
  Transduction out;
  out.input = first.input;
  out.output = second.output;
  out.domain_variable = second.domain_variable;
  // The domain variable needs its guard even when the second domain formula ignores it.
  out.domain = mk::conj({domain_at(first, out.domain_variable), backward_translate(first, second.domain)});
  for (const auto& d : second.relations) out.relations.push_back({d.relation, d.variables, backward_translate(first, d.formula)});
  out.output_kind = second.output_kind;
  return out;
}

bool same_content(const Structure& a, const Structure& b) {
  auto da = a.domain(), db = b.domain();
  std::sort(da.begin(), da.end());
  std::sort(db.begin(), db.end());
  if (da != db) return false;
  auto ra = a.signature().relations(), rb = b.signature().relations();
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  if (ra != rb) return false;
  auto ca = a.contents(), cb = b.contents();
  for (auto& [name, rows] : ca) std::sort(rows.begin(), rows.end());
  for (auto& [name, rows] : cb) std::sort(rows.begin(), rows.end());
  return ca == cb;
}

// ---------------------------------------------------------------------------

NondetTransduction grid_recovery() {
  NondetTransduction j;
  j.colors = {"A0", "A1", "A2", "B0", "B1", "B2"};
  std::vector<RelationSymbol> in{{std::string(kAdjacency), 2}};
  for (const auto& c : j.colors) in.push_back({c, 1});
  j.base.input = Signature(in);
  j.base.output = Signature({{std::string(kHorizontal), 2}, {std::string(kVertical), 2}});
  j.base.domain = mk::truth();
  auto step = [](const std::string& prefix) {
    std::vector<Formula> alts;
    for (int t = 0; t < 3; ++t)
      alts.push_back(mk::conj({mk::atom(prefix + std::to_string(t), {"x"}),
                               mk::atom(prefix + std::to_string((t + 1) % 3), {"y"})}));
    return mk::conj({mk::atom(std::string(kAdjacency), {"x", "y"}), mk::disj(alts)});
  };
  j.base.relations = {{std::string(kHorizontal), {"x", "y"}, step("A")}, {std::string(kVertical), {"x", "y"}, step("B")}};
  j.validate();
  return j;
}

Coloring canonical_coloring(int n) {
  if (n < 1) throw ValidationError("grid side must be at least 1");
  Coloring c;
  for (int t = 0; t < 3; ++t) c["A" + std::to_string(t)], c["B" + std::to_string(t)];
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      c["A" + std::to_string(i % 3)].insert(grid_cell(i, j));
      c["B" + std::to_string(j % 3)].insert(grid_cell(i, j));
    }
  return c;
}

NondetTransduction minor_transduction() {
  NondetTransduction m;
  m.colors = {"D", "F", "L"};
  m.base.input = Signature({{std::string(kIncidence), 2}, {std::string(kVertexSort), 1}, {"D", 1}, {"F", 1}, {"L", 1}});
  m.base.output = Signature({{std::string(kAdjacency), 2}});
  m.base.output_kind = StructureKind::GraphAdjacency;
  m.base.domain = parse_formula("(and (D x) (vert x))");
  // conn(u, w): w lies in every vertex set that contains u and is closed under F-edges.
  auto conn = [](const std::string& u, const std::string& w) {
    return "(forallS Z (implies (and (forall z (implies (in z Z) (vert z))) (in " + u +
           " Z) (forall e (implies (F e) (forall s (implies (and (inc e s) (in s Z)) (forall t (implies (inc e t) "
           "(in t Z)))))))) (in " +
           w + " Z)))";
  };
  const auto adj = "(and (not (= x y)) (exists l (and (L l) (exists a (exists b (and (inc l a) (inc l b) (not (= a b)) " +
                   conn("x", "a") + " " + conn("b", "y") + "))))))";
  m.base.relations = {{std::string(kAdjacency), {"x", "y"}, parse_formula(adj)}};
  m.validate();
  return m;
}

void validate_minor_model(const Graph& host, const MinorModel& model) {
  if (model.branch_sets.size() != model.minor.vertex_count())
    throw ValidationError("one branch set per minor vertex expected");
  std::vector<int> owner(host.vertex_count(), -1);
  for (std::size_t b = 0; b < model.branch_sets.size(); ++b) {
    const auto& set = model.branch_sets[b];
    if (set.empty()) throw ValidationError("empty branch set for minor vertex " + model.minor.vertices()[b]);
    for (const auto& name : set) {
      auto v = host.vertex(name);
      if (!v) throw ValidationError("branch set names unknown host vertex '" + name + "'");
      if (owner[static_cast<std::size_t>(*v)] != -1) throw ValidationError("branch sets overlap at '" + name + "'");
      owner[static_cast<std::size_t>(*v)] = static_cast<int>(b);
    }
  }
  for (std::size_t b = 0; b < model.branch_sets.size(); ++b) {
    const int start = *host.vertex(model.branch_sets[b][0]);
    std::set<int> seen{start};
    std::queue<int> todo;
    todo.push(start);
    while (!todo.empty()) {
      const int v = todo.front();
      todo.pop();
      for (const auto& [p, q] : host.edges())
        for (auto [from, to] : {std::pair{p, q}, std::pair{q, p}})
          if (from == v && owner[static_cast<std::size_t>(to)] == static_cast<int>(b) && seen.insert(to).second)
            todo.push(to);
    }
    if (seen.size() != model.branch_sets[b].size())
      throw ValidationError("branch set of " + model.minor.vertices()[b] + " is not connected");
  }
  for (const auto& [u, v] : model.minor.edges()) {
    bool found = false;
    for (const auto& [p, q] : host.edges()) {
      const int op = owner[static_cast<std::size_t>(p)], oq = owner[static_cast<std::size_t>(q)];
      if ((op == u && oq == v) || (op == v && oq == u)) found = true;
    }
    if (!found)
      throw ValidationError("no host edge witnesses minor edge " + model.minor.vertices()[static_cast<std::size_t>(u)] +
                            "-" + model.minor.vertices()[static_cast<std::size_t>(v)]);
  }
}

Coloring minor_valuation(const Graph& host, const MinorModel& model) {
  validate_minor_model(host, model);
  std::vector<int> owner(host.vertex_count(), -1);
  for (std::size_t b = 0; b < model.branch_sets.size(); ++b)
    for (const auto& name : model.branch_sets[b]) owner[static_cast<std::size_t>(*host.vertex(name))] = static_cast<int>(b);
  Coloring c{{"D", {}}, {"F", {}}, {"L", {}}};
  for (const auto& set : model.branch_sets) c["D"].insert(set[0]);
  for (const auto& e : host.edges()) {
    const int op = owner[static_cast<std::size_t>(e.first)], oq = owner[static_cast<std::size_t>(e.second)];
    if (op != -1 && op == oq) c["F"].insert(host.edge_name(e));
  }
  for (const auto& [u, v] : model.minor.edges())
    for (const auto& e : host.edges()) {
      const int op = owner[static_cast<std::size_t>(e.first)], oq = owner[static_cast<std::size_t>(e.second)];
      if ((op == u && oq == v) || (op == v && oq == u)) {
        c["L"].insert(host.edge_name(e));
        break;
      }
    }
  return c;
}

Formula mso2_to_mso1(const Formula& phi) {
  return map_atoms(phi, [](const std::string& rel, const std::vector<std::string>& args) -> std::optional<Formula> {
    if (rel == kIncidence && args.size() == 2)
      return mk::conj({mk::atom(std::string(kAdjacency), args), mk::neg(mk::atom(std::string(kVertexSort), {args[0]})),
                       mk::atom(std::string(kVertexSort), {args[1]})});
    if (args.size() == 1 && rel != kAdjacency) return mk::atom(rel, args);
    throw ValidationError("atom '" + rel + "' is ill-sorted for the incidence encoding");
  });
}

NondetTransduction large_grid_extraction() {
  throw Error("large grid extraction is an external construction and is not provided here");
}

// ---------------------------------------------------------------------------

namespace {

Signature signature_from_json(const nlohmann::json& j) {
  std::vector<RelationSymbol> rels;
  for (auto it = j.begin(); it != j.end(); ++it) rels.push_back({it.key(), it.value().get<int>()});
  return Signature(rels);
}

nlohmann::ordered_json signature_to_json(const Signature& s) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& r : s.relations()) out[r.name] = r.arity;
  return out;
}

}  // namespace

NondetTransduction parse_transduction(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("transduction: ") + e.what(), e.byte);
  }
  NondetTransduction t;
  try {
    if (j.contains("colors")) t.colors = j.at("colors").get<std::vector<std::string>>();
    auto input = signature_from_json(j.at("input"));
    for (const auto& c : t.colors)
      if (!input.contains(c)) input = input.with({c, 1});
    t.base.input = input;
    t.base.output = signature_from_json(j.at("output"));
    if (j.contains("domain")) {
      const auto& d = j.at("domain");
      t.base.domain_variable = d.value("var", std::string("x"));
      t.base.domain = parse_formula(d.at("formula").get<std::string>());
    }
    for (const auto& r : j.at("relations"))
      t.base.relations.push_back({r.at("name").get<std::string>(), r.at("vars").get<std::vector<std::string>>(),
                                  parse_formula(r.at("formula").get<std::string>())});
    if (j.contains("output_kind"))
      t.base.output_kind = structure_kind_from_string(j.at("output_kind").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("transduction: ") + e.what(), 0);
  }
  t.validate();
  return t;
}

std::string print_transduction(const NondetTransduction& t) {
  nlohmann::ordered_json j;
  j["input"] = signature_to_json(t.input());
  j["output"] = signature_to_json(t.base.output);
  j["colors"] = t.colors;
  j["domain"] = {{"var", t.base.domain_variable}, {"formula", print_formula(t.base.domain)}};
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& d : t.base.relations)
    j["relations"].push_back({{"name", d.relation}, {"vars", d.variables}, {"formula", print_formula(d.formula)}});
  j["output_kind"] = std::string(to_string(t.base.output_kind));
  return j.dump(2) + "\n";
}

}  // namespace cmsovc
