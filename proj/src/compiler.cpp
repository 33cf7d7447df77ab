#include "cmsovc/compiler.hpp"

#include <algorithm>

namespace cmsovc {

AugmentedTree augment(const Tree& t, const std::vector<std::string>& tracks,
                      const std::vector<std::vector<int>>& marked) {
  if (marked.size() != tracks.size()) throw ValidationError("one mark list per track expected");
  if (tracks.size() > 32) throw BudgetExceeded("too many tracks");
  AugmentedTree out{t, tracks, std::vector<std::uint32_t>(t.size(), 0)};
  for (std::size_t i = 0; i < tracks.size(); ++i)
    for (int v : marked[i]) {
      if (v < 0 || static_cast<std::size_t>(v) >= t.size()) throw ValidationError("marked node outside the tree");
      out.bits[static_cast<std::size_t>(v)] |= 1U << i;
    }
  return out;
}

AugmentedTree augment(const Tree& t, const std::vector<std::string>& tracks, const Valuation& v) {
  std::vector<std::vector<int>> marked(tracks.size());
  auto node = [&](const std::string& name) {
    auto n = t.node(name);
    if (!n) throw ValidationError("valuation uses '" + name + "', which is not a node of the tree");
    return *n;
  };
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (is_set_variable(tracks[i])) {
      if (auto it = v.sets.find(tracks[i]); it != v.sets.end())
        for (const auto& e : it->second) marked[i].push_back(node(e));
    } else if (auto it = v.elements.find(tracks[i]); it != v.elements.end()) {
      marked[i].push_back(node(it->second));
    }
  }
  return augment(t, tracks, marked);
}

Compiler::Compiler(std::vector<std::string> alphabet, CompileOptions options)
    : alphabet_(std::move(alphabet)), options_(options) {
  TrackAlphabet check(alphabet_, {});
  (void)check;
}

TreeAutomaton Compiler::align(const TreeAutomaton& a, const TrackAlphabet& target) {
  return cylindrify(a, target, options_.budget);
}

TreeAutomaton Compiler::combine(BoolOp op, const TreeAutomaton& a, const TreeAutomaton& b) {
  const auto target = a.alphabet().united(b.alphabet());
  const auto x = align(a, target), y = align(b, target);
  return boolean_compose(op, x, &y, options_.budget);
}

TreeAutomaton Compiler::rec(const Formula& f) {
  const auto key = print_formula(f);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const TrackAlphabet alpha(alphabet_, free_variables(f));
  TreeAutomaton out;
  switch (f.kind()) {
    case FormulaKind::True: out = constant_automaton(alpha, true); break;
    case FormulaKind::False: out = constant_automaton(alpha, false); break;
    case FormulaKind::Atom: {
      const auto& r = f.relation();
      const auto& args = f.args();
      if ((r == kLeftChild || r == kRightChild) && args.size() == 2) {
        out = child_automaton(alpha, args[0], args[1], r == kLeftChild);
      } else if (r.rfind(kLabelPrefix, 0) == 0 && args.size() == 1) {
        auto b = alpha.base_index(r.substr(kLabelPrefix.size()));
        if (!b) throw ValidationError("label atom '" + r + "' names a symbol outside the alphabet");
        out = coincidence_automaton(alpha, {args[0]}, *b);
      } else {
        throw ValidationError("atom '" + r + "' is outside the tree signature");
      }
      break;
    }
    case FormulaKind::Equal: out = coincidence_automaton(alpha, f.args()); break;
    case FormulaKind::In: out = coincidence_automaton(alpha, f.args()); break;
    case FormulaKind::Mod: out = modular_atom_automaton(alpha, f.args()[0], f.residue(), f.modulus()); break;
    case FormulaKind::Not: out = complement(rec(f.child())); break;
    case FormulaKind::And:
    case FormulaKind::Or: {
      const auto op = f.kind() == FormulaKind::And ? BoolOp::And : BoolOp::Or;
      out = rec(f.child(0));
      for (std::size_t i = 1; i < f.children().size(); ++i) out = combine(op, out, rec(f.child(i)));
      break;
    }
    case FormulaKind::Implies: out = combine(BoolOp::Or, complement(rec(f.child(0))), rec(f.child(1))); break;
    case FormulaKind::Iff: {
      const auto a = rec(f.child(0)), b = rec(f.child(1));
      out = combine(BoolOp::Or, combine(BoolOp::And, a, b), combine(BoolOp::And, complement(a), complement(b)));
      break;
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::ExistsSet:
    case FormulaKind::ForallSet: {
      auto body = rec(f.child());
      // Trees are non-empty, so a vacuous quantifier changes nothing.
      if (!body.alphabet().track_index(f.variable())) {
        out = body;
        break;
      }
      const auto kind = f.is_set_quantifier() ? MarkerKind::Set : MarkerKind::Element;
      const auto mode = f.kind() == FormulaKind::Exists || f.kind() == FormulaKind::ExistsSet ? QuantifierMode::Exists
                                                                                            : QuantifierMode::Forall;
      out = quantify_marker(body, f.variable(), kind, mode, options_.budget);
      break;
    }
  }
  // Bring the result to the canonical track order of this subformula.
  if (!(out.alphabet() == alpha)) out = align(out, alpha);
  // Only markings with one node per first-order track are ever read; dropping the rest keeps
  // products small.
  for (const auto& t : alpha.tracks()) {
    if (is_set_variable(t) || f.kind() == FormulaKind::True || f.kind() == FormulaKind::False) continue;
    const auto one = exactly_one_automaton(alpha, t);
    out = boolean_compose(BoolOp::And, out, &one, options_.budget);
  }
  cache_.emplace(key, out);
  return out;
}

TreeAutomaton Compiler::compile(const Formula& f, const std::vector<std::string>& tracks) {
  for (const auto& v : free_variables(f))
    if (std::find(tracks.begin(), tracks.end(), v) == tracks.end())
      throw ValidationError("free variable '" + v + "' has no track");
  const TrackAlphabet target(alphabet_, tracks);
  auto out = align(rec(f), target);
  for (const auto& t : tracks) {
    if (is_set_variable(t)) continue;
    const auto one = exactly_one_automaton(target, t);
    out = boolean_compose(BoolOp::And, out, &one, options_.budget);
  }
  return out;
}

TreeAutomaton compile(const Formula& f, const std::vector<std::string>& alphabet,
                      const std::vector<std::string>& tracks, const CompileOptions& options) {
  return Compiler(alphabet, options).compile(f, tracks);
}

}  // namespace cmsovc
