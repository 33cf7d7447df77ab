#include <algorithm>
#include <bit>
#include <unordered_map>

#include "cmsovc/logic.hpp"

namespace cmsovc {

std::size_t ElementSet::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& key) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto w : key) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

constexpr std::size_t kMaxCacheEntries = std::size_t{1} << 22;

struct PlanNode {
  FormulaKind kind = FormulaKind::True;
  std::size_t relation = 0;
  std::vector<int> fo_args;
  int set_arg = -1;
  int residue = 0;
  int modulus = 1;
  std::vector<int> children;
  int slot = -1;
  // Guarded set quantifier: the set ranges over subsets of {e : guard[guard_var := e]}.
  int guard = -1;
  int guard_var = -1;
  bool memo = false;
  bool has_set_quantifier = false;
  std::vector<int> free_fo;
  std::vector<int> free_set;
  std::unordered_map<std::vector<std::uint64_t>, bool, KeyHash> cache;
};

}  // namespace

struct ModelChecker::Impl {
  const Structure& s;
  CheckOptions options;
  std::vector<PlanNode> plan;
  int root = -1;
  std::vector<int> fo;
  std::vector<ElementSet> sets;
  std::size_t input_fo = 0, input_sets = 0;
  std::uint64_t cost = 0;
  std::vector<std::uint64_t> key_buffer;

  Impl(const Structure& structure, CheckOptions opts) : s(structure), options(opts) {}

  int add_fo_slot() {
    fo.push_back(0);
    return static_cast<int>(fo.size()) - 1;
  }
  int add_set_slot() {
    sets.emplace_back(s.size());
    return static_cast<int>(sets.size()) - 1;
  }

  static void merge(std::vector<int>& into, const std::vector<int>& from) {
    for (int v : from)
      if (std::find(into.begin(), into.end(), v) == into.end()) into.push_back(v);
  }

  int lookup(const std::map<std::string, std::vector<int>>& scope, const std::string& v) const {
    auto it = scope.find(v);
    if (it == scope.end() || it->second.empty()) throw ValidationError("missing assignment for variable '" + v + "'");
    return it->second.back();
  }

  int build(const Formula& f, std::map<std::string, std::vector<int>>& fo_scope,
            std::map<std::string, std::vector<int>>& set_scope) {
    PlanNode n;
    n.kind = f.kind();
    switch (f.kind()) {
      case FormulaKind::True:
      case FormulaKind::False: break;
      case FormulaKind::Atom: {
        auto r = s.signature().find(f.relation());
        if (!r) throw ValidationError("relation '" + f.relation() + "' is not in the structure's signature");
        if (s.signature().relations()[*r].arity != static_cast<int>(f.args().size()))
          throw ValidationError("relation '" + f.relation() + "' used with the wrong arity");
        n.relation = *r;
        for (const auto& a : f.args()) n.fo_args.push_back(lookup(fo_scope, a));
        n.free_fo = n.fo_args;
        break;
      }
      case FormulaKind::Equal:
        n.fo_args = {lookup(fo_scope, f.args()[0]), lookup(fo_scope, f.args()[1])};
        n.free_fo = n.fo_args;
        break;
      case FormulaKind::In:
        n.fo_args = {lookup(fo_scope, f.args()[0])};
        n.set_arg = lookup(set_scope, f.args()[1]);
        n.free_fo = n.fo_args;
        n.free_set = {n.set_arg};
        break;
      case FormulaKind::Mod:
        n.set_arg = lookup(set_scope, f.args()[0]);
        n.residue = f.residue();
        n.modulus = f.modulus();
        n.free_set = {n.set_arg};
        break;
      case FormulaKind::Exists:
      case FormulaKind::Forall:
      case FormulaKind::ExistsSet:
      case FormulaKind::ForallSet: {
        const bool set = f.is_set_quantifier();
        auto& scope = set ? set_scope : fo_scope;
        n.slot = set ? add_set_slot() : add_fo_slot();
        scope[f.variable()].push_back(n.slot);
        const int c = build(f.child(), fo_scope, set_scope);
        scope[f.variable()].pop_back();
        n.children = {c};
        break;
      }
      default:
        for (const auto& c : f.children()) n.children.push_back(build(c, fo_scope, set_scope));
        break;
    }
    for (int c : n.children) {
      merge(n.free_fo, plan[static_cast<std::size_t>(c)].free_fo);
      merge(n.free_set, plan[static_cast<std::size_t>(c)].free_set);
      n.has_set_quantifier = n.has_set_quantifier || plan[static_cast<std::size_t>(c)].has_set_quantifier;
    }
    if (f.is_quantifier()) {
      auto& fr = f.is_set_quantifier() ? n.free_set : n.free_fo;
      std::erase(fr, n.slot);
    }
    if (f.is_set_quantifier()) {
      n.has_set_quantifier = true;
      find_guard(n);
    }
    n.memo = f.is_quantifier() && (n.has_set_quantifier || n.free_fo.empty());
    plan.push_back(std::move(n));
    return static_cast<int>(plan.size()) - 1;
  }

  // Recognizes ∀z (z∈X → G) with X not free in G among the conjuncts that
  // constrain X: the conjuncts of the body (∃X) or of the premise (∀X → ...).
  void find_guard(PlanNode& n) {
    const auto& body = plan[static_cast<std::size_t>(n.children[0])];
    std::vector<int> candidates;
    auto conjuncts = [&](int idx) {
      const auto& p = plan[static_cast<std::size_t>(idx)];
      if (p.kind == FormulaKind::And) candidates.insert(candidates.end(), p.children.begin(), p.children.end());
      else candidates.push_back(idx);
    };
    if (n.kind == FormulaKind::ExistsSet) conjuncts(n.children[0]);
    else if (body.kind == FormulaKind::Implies) conjuncts(body.children[0]);
    for (int c : candidates) {
      const auto& q = plan[static_cast<std::size_t>(c)];
      if (q.kind != FormulaKind::Forall) continue;
      const auto& imp = plan[static_cast<std::size_t>(q.children[0])];
      if (imp.kind != FormulaKind::Implies) continue;
      const auto& mem = plan[static_cast<std::size_t>(imp.children[0])];
      if (mem.kind != FormulaKind::In || mem.fo_args[0] != q.slot || mem.set_arg != n.slot) continue;
      const auto& g = plan[static_cast<std::size_t>(imp.children[1])];
      if (std::find(g.free_set.begin(), g.free_set.end(), n.slot) != g.free_set.end()) continue;
      n.guard = imp.children[1];
      n.guard_var = q.slot;
      return;
    }
  }

  void tick() {
    if (++cost > options.max_valuations)
      throw BudgetExceeded("brute-force check exceeded the valuation budget of " +
                           std::to_string(options.max_valuations));
  }

  bool eval(int idx) {
    auto& n = plan[static_cast<std::size_t>(idx)];
    if (!n.memo) return compute(n);
    auto& key = key_buffer;
    key.clear();
    for (int v : n.free_fo) key.push_back(static_cast<std::uint64_t>(fo[static_cast<std::size_t>(v)]));
    for (int v : n.free_set) {
      const auto& w = sets[static_cast<std::size_t>(v)].words();
      key.insert(key.end(), w.begin(), w.end());
    }
    if (auto it = n.cache.find(key); it != n.cache.end()) return it->second;
    auto saved = key;
    const bool r = compute(n);
    if (n.cache.size() >= kMaxCacheEntries) n.cache.clear();
    n.cache.emplace(std::move(saved), r);
    return r;
  }

  bool compute(PlanNode& n) {
    switch (n.kind) {
      case FormulaKind::True: return true;
      case FormulaKind::False: return false;
      case FormulaKind::Atom: {
        int args[8];
        std::vector<int> big;
        std::span<const int> view;
        if (n.fo_args.size() <= 8) {
          for (std::size_t i = 0; i < n.fo_args.size(); ++i) args[i] = fo[static_cast<std::size_t>(n.fo_args[i])];
          view = std::span<const int>(args, n.fo_args.size());
        } else {
          for (int a : n.fo_args) big.push_back(fo[static_cast<std::size_t>(a)]);
          view = big;
        }
        return s.holds(n.relation, view);
      }
      case FormulaKind::Equal:
        return fo[static_cast<std::size_t>(n.fo_args[0])] == fo[static_cast<std::size_t>(n.fo_args[1])];
      case FormulaKind::In:
        return sets[static_cast<std::size_t>(n.set_arg)].contains(fo[static_cast<std::size_t>(n.fo_args[0])]);
      case FormulaKind::Mod:
        return static_cast<int>(sets[static_cast<std::size_t>(n.set_arg)].count() % static_cast<std::size_t>(n.modulus)) ==
               n.residue;
      case FormulaKind::Not: return !eval(n.children[0]);
      case FormulaKind::And:
        for (int c : n.children)
          if (!eval(c)) return false;
        return true;
      case FormulaKind::Or:
        for (int c : n.children)
          if (eval(c)) return true;
        return false;
      case FormulaKind::Implies: return !eval(n.children[0]) || eval(n.children[1]);
      case FormulaKind::Iff: return eval(n.children[0]) == eval(n.children[1]);
      case FormulaKind::Exists:
      case FormulaKind::Forall: {
        const bool want = n.kind == FormulaKind::Exists;
        const int slot = n.slot, child = n.children[0];
        for (std::size_t e = 0; e < s.size(); ++e) {
          tick();
          fo[static_cast<std::size_t>(slot)] = static_cast<int>(e);
          if (eval(child) == want) return want;
        }
        return !want;
      }
      case FormulaKind::ExistsSet:
      case FormulaKind::ForallSet: return quantify_set(n);
    }
    return false;
  }

  bool quantify_set(PlanNode& n) {
    const bool want = n.kind == FormulaKind::ExistsSet;
    std::vector<int> support;
    if (n.guard >= 0) {
      for (std::size_t e = 0; e < s.size(); ++e) {
        tick();
        fo[static_cast<std::size_t>(n.guard_var)] = static_cast<int>(e);
        if (eval(n.guard)) support.push_back(static_cast<int>(e));
      }
    } else {
      for (std::size_t e = 0; e < s.size(); ++e) support.push_back(static_cast<int>(e));
    }
    if (support.size() > 62 || (std::uint64_t{1} << support.size()) > options.max_valuations)
      throw BudgetExceeded("set quantifier over " + std::to_string(support.size()) +
                           " elements exceeds the valuation budget");
    const int slot = n.slot, child = n.children[0];
    sets[static_cast<std::size_t>(slot)] = ElementSet(s.size());
    const std::uint64_t total = std::uint64_t{1} << support.size();
    for (std::uint64_t i = 0; i < total; ++i) {
      tick();
      if (i > 0) sets[static_cast<std::size_t>(slot)].flip(support[static_cast<std::size_t>(std::countr_zero(i))]);
      if (eval(child) == want) return want;
    }
    return !want;
  }
};

ModelChecker::ModelChecker(const Structure& structure, const Formula& formula, std::vector<std::string> element_slots,
                           std::vector<std::string> set_slots, CheckOptions options)
    : impl_(std::make_unique<Impl>(structure, options)) {
  std::map<std::string, std::vector<int>> fo_scope, set_scope;
  for (const auto& v : element_slots) {
    if (is_set_variable(v)) throw ValidationError("'" + v + "' is not a first-order variable");
    fo_scope[v] = {impl_->add_fo_slot()};
  }
  for (const auto& v : set_slots) {
    if (!is_set_variable(v)) throw ValidationError("'" + v + "' is not a monadic variable");
    set_scope[v] = {impl_->add_set_slot()};
  }
  impl_->input_fo = element_slots.size();
  impl_->input_sets = set_slots.size();
  impl_->root = impl_->build(formula, fo_scope, set_scope);
}

ModelChecker::~ModelChecker() = default;

bool ModelChecker::holds(std::span<const int> elements, std::span<const ElementSet> sets) {
  if (elements.size() != impl_->input_fo || sets.size() != impl_->input_sets)
    throw ValidationError("model checker called with the wrong number of arguments");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i] < 0 || static_cast<std::size_t>(elements[i]) >= impl_->s.size())
      throw ValidationError("element argument outside the domain");
    impl_->fo[i] = elements[i];
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].universe_size() != impl_->s.size()) throw ValidationError("set argument over the wrong domain");
    impl_->sets[i] = sets[i];
  }
  impl_->cost = 0;
  return impl_->eval(impl_->root);
}

std::uint64_t ModelChecker::last_cost() const noexcept { return impl_->cost; }

bool check(const Structure& s, const Formula& f, const Valuation& v, const CheckOptions& options) {
  const auto fo_vars = free_element_variables(f);
  const auto set_vars = free_set_variables(f);
  std::vector<int> elements;
  for (const auto& x : fo_vars) {
    auto it = v.elements.find(x);
    if (it == v.elements.end()) throw ValidationError("missing assignment for variable '" + x + "'");
    auto idx = s.index_of(it->second);
    if (!idx) throw ValidationError("assigned element '" + it->second + "' is not in the domain");
    elements.push_back(*idx);
  }
  std::vector<ElementSet> sets;
  for (const auto& x : set_vars) {
    auto it = v.sets.find(x);
    if (it == v.sets.end()) throw ValidationError("missing assignment for variable '" + x + "'");
    ElementSet es(s.size());
    for (const auto& e : it->second) {
      auto idx = s.index_of(e);
      if (!idx) throw ValidationError("assigned element '" + e + "' is not in the domain");
      es.insert(*idx);
    }
    sets.push_back(std::move(es));
  }
  ModelChecker mc(s, f, fo_vars, set_vars, options);
  return mc.holds(elements, sets);
}

std::vector<ElementId> default_universe(const Structure& s) {
  if (s.kind() == StructureKind::GraphIncidence) {
    std::vector<ElementId> out;
    for (const auto& t : s.tuples(kVertexSort)) out.push_back(s.element(t[0]));
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
      return s.require_index(a) < s.require_index(b);
    });
    return out;
  }
  return s.domain();
}

TupleSetSystem define_set_system(const std::vector<ElementId>& universe, std::size_t object_arity,
                                 std::size_t parameter_arity, const TupleOracle& oracle, std::uint64_t max_tuples) {
  if (object_arity == 0) throw ValidationError("a set system needs at least one object variable");
  const auto n = universe.size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < object_arity + parameter_arity; ++i) {
    total *= n;
    if (total > max_tuples) throw BudgetExceeded("set-system enumeration exceeds the tuple budget");
  }
  std::vector<Member> family;
  std::vector<int> params(parameter_arity, 0), objs(object_arity, 0);
  auto advance = [n](std::vector<int>& t) {
    for (auto& x : t) {
      if (static_cast<std::size_t>(++x) < n) return true;
      x = 0;
    }
    return false;
  };
  if (n == 0) return TupleSetSystem(universe, static_cast<int>(object_arity), {});
  TupleSetSystem shape(universe, static_cast<int>(object_arity), {});
  do {
    Member m;
    std::fill(objs.begin(), objs.end(), 0);
    do {
      if (oracle(objs, params)) m.push_back(shape.encode(objs));
    } while (advance(objs));
    family.push_back(std::move(m));
  } while (advance(params));
  return TupleSetSystem(universe, static_cast<int>(object_arity), std::move(family));
}

TupleSetSystem define_set_system(const Structure& s, const PartitionedFormula& f, const SetSystemOptions& options) {
  const auto universe = options.universe ? *options.universe : default_universe(s);
  std::vector<int> where;
  for (const auto& e : universe) where.push_back(s.require_index(e));
  auto slots = f.objects;
  slots.insert(slots.end(), f.parameters.begin(), f.parameters.end());
  ModelChecker mc(s, f.formula, slots, {}, options.check);
  std::vector<int> args(slots.size());
  return define_set_system(
      universe, f.objects.size(), f.parameters.size(),
      [&](std::span<const int> objs, std::span<const int> params) {
        std::size_t i = 0;
        for (int o : objs) args[i++] = where[static_cast<std::size_t>(o)];
        for (int p : params) args[i++] = where[static_cast<std::size_t>(p)];
        return mc.holds(args);
      },
      options.max_tuples);
}

}  // namespace cmsovc
