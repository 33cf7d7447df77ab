#include "cmsovc/automata.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cmsovc {

TrackAlphabet::TrackAlphabet(std::vector<std::string> base, std::vector<std::string> tracks)
    : base_(std::move(base)), tracks_(std::move(tracks)) {
  if (base_.empty()) throw ValidationError("alphabet needs at least one base symbol");
  if (tracks_.size() > 20) throw BudgetExceeded("too many marker tracks");
  std::set<std::string> b(base_.begin(), base_.end()), t(tracks_.begin(), tracks_.end());
  if (b.size() != base_.size()) throw ValidationError("duplicate base symbol");
  if (t.size() != tracks_.size()) throw ValidationError("duplicate track name");
}

std::optional<int> TrackAlphabet::base_index(std::string_view name) const {
  for (std::size_t i = 0; i < base_.size(); ++i)
    if (base_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> TrackAlphabet::track_index(std::string_view name) const {
  for (std::size_t i = 0; i < tracks_.size(); ++i)
    if (tracks_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

int TrackAlphabet::require_track(std::string_view name) const {
  auto t = track_index(name);
  if (!t) throw ValidationError("unknown marker track '" + std::string(name) + "'");
  return *t;
}

std::string TrackAlphabet::symbol_name(int symbol) const {
  std::string out = base_.at(static_cast<std::size_t>(base_of(symbol)));
  if (tracks_.empty()) return out;
  out += ':';
  for (std::size_t i = 0; i < tracks_.size(); ++i) out += bit(symbol, static_cast<int>(i)) ? '1' : '0';
  return out;
}

TrackAlphabet TrackAlphabet::united(const TrackAlphabet& other) const {
  if (base_ != other.base_) throw ValidationError("alphabet mismatch: different base symbols");
  auto tracks = tracks_;
  for (const auto& t : other.tracks_)
    if (std::find(tracks.begin(), tracks.end(), t) == tracks.end()) tracks.push_back(t);
  return TrackAlphabet(base_, std::move(tracks));
}

TrackAlphabet TrackAlphabet::without(std::string_view track) const {
  auto tracks = tracks_;
  tracks.erase(tracks.begin() + require_track(track));
  return TrackAlphabet(base_, std::move(tracks));
}

TrackAlphabet TrackAlphabet::with_track(std::string track) const {
  auto tracks = tracks_;
  tracks.push_back(std::move(track));
  return TrackAlphabet(base_, std::move(tracks));
}

TreeAutomaton::TreeAutomaton(TrackAlphabet alphabet, int states, std::vector<int> table, std::vector<bool> accepting)
    : alphabet_(std::move(alphabet)), states_(states), table_(std::move(table)), accepting_(std::move(accepting)) {
  if (states_ < 1) throw ValidationError("automaton needs at least one state");
  const auto q1 = static_cast<std::size_t>(states_) + 1;
  if (table_.size() != q1 * q1 * alphabet_.size()) throw ValidationError("transition table has the wrong size");
  if (accepting_.size() != static_cast<std::size_t>(states_)) throw ValidationError("accepting set has the wrong size");
  for (int q : table_)
    if (q < 0 || q >= states_) throw ValidationError("transition leads outside the state set");
}

std::string AugmentedTree::symbol_name(int node) const {
  std::string out = tree.symbol(node);
  if (tracks.empty()) return out;
  out += ':';
  for (std::size_t i = 0; i < tracks.size(); ++i) out += (bits.at(static_cast<std::size_t>(node)) >> i) & 1U ? '1' : '0';
  return out;
}

RunLabeling run_symbols(const TreeAutomaton& a, const Tree& shape, const std::vector<int>& symbols) {
  if (symbols.size() != shape.size()) throw ValidationError("one symbol per node expected");
  RunLabeling rho(shape.size(), TreeAutomaton::kBottom);
  for (int v : shape.postorder()) {
    const int l = shape.left(v), r = shape.right(v);
    const int sym = symbols[static_cast<std::size_t>(v)];
    if (sym < 0 || static_cast<std::size_t>(sym) >= a.alphabet().size()) throw ValidationError("unknown symbol id");
    rho[static_cast<std::size_t>(v)] = a.delta(l == kNoNode ? TreeAutomaton::kBottom : rho[static_cast<std::size_t>(l)],
                                               r == kNoNode ? TreeAutomaton::kBottom : rho[static_cast<std::size_t>(r)],
                                               sym);
  }
  return rho;
}

std::vector<int> symbols_for(const TreeAutomaton& a, const AugmentedTree& t) {
  const auto& alpha = a.alphabet();
  std::vector<int> base(t.tree.alphabet().size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto b = alpha.base_index(t.tree.alphabet()[i]);
    base[i] = b ? *b : -1;
  }
  std::vector<int> track_pos;
  for (const auto& name : alpha.tracks()) {
    auto it = std::find(t.tracks.begin(), t.tracks.end(), name);
    if (it == t.tracks.end()) throw ValidationError("tree has no track '" + name + "'");
    track_pos.push_back(static_cast<int>(it - t.tracks.begin()));
  }
  std::vector<int> out(t.tree.size());
  for (std::size_t v = 0; v < t.tree.size(); ++v) {
    const int b = base[static_cast<std::size_t>(t.tree.label(static_cast<int>(v)))];
    if (b < 0) throw ValidationError("symbol '" + t.tree.symbol(static_cast<int>(v)) + "' is not in the alphabet");
    std::uint32_t bits = 0;
    const auto node_bits = t.bits.empty() ? 0U : t.bits[v];
    for (std::size_t i = 0; i < track_pos.size(); ++i)
      if ((node_bits >> track_pos[i]) & 1U) bits |= 1U << i;
    out[v] = alpha.symbol(b, bits);
  }
  return out;
}

RunLabeling run(const TreeAutomaton& a, const AugmentedTree& t) { return run_symbols(a, t.tree, symbols_for(a, t)); }

RunLabeling run(const TreeAutomaton& a, const Tree& t) {
  AugmentedTree aug{t, a.alphabet().tracks(), std::vector<std::uint32_t>(t.size(), 0)};
  return run(a, aug);
}

bool accepts(const TreeAutomaton& a, const Tree& t) {
  if (t.size() == 0) return false;
  return a.accepting(run(a, t)[static_cast<std::size_t>(t.root())]);
}

bool accepts(const TreeAutomaton& a, const AugmentedTree& t) {
  if (t.tree.size() == 0) return false;
  return a.accepting(run(a, t)[static_cast<std::size_t>(t.tree.root())]);
}

namespace {

void check_table_budget(std::size_t states, std::size_t symbols, const AutomatonBudget& budget) {
  if (states > budget.max_states)
    throw BudgetExceeded("automaton exceeds the state budget of " + std::to_string(budget.max_states));
  if ((states + 1) * (states + 1) * symbols > budget.max_table_entries)
    throw BudgetExceeded("automaton table exceeds " + std::to_string(budget.max_table_entries) + " entries");
}

TreeAutomaton tabulate(const TrackAlphabet& alpha, int states, const std::function<int(int, int, int)>& f,
                       const std::function<bool(int)>& accept) {
  const auto q1 = static_cast<std::size_t>(states) + 1;
  const auto s = alpha.size();
  std::vector<int> table(q1 * q1 * s);
  for (int l = -1; l < states; ++l)
    for (int r = -1; r < states; ++r)
      for (std::size_t sym = 0; sym < s; ++sym)
        table[(static_cast<std::size_t>(l + 1) * q1 + static_cast<std::size_t>(r + 1)) * s + sym] =
            f(l, r, static_cast<int>(sym));
  std::vector<bool> acc(static_cast<std::size_t>(states));
  for (int q = 0; q < states; ++q) acc[static_cast<std::size_t>(q)] = accept(q);
  return TreeAutomaton(alpha, states, std::move(table), std::move(acc));
}

// Builds the automaton whose states are the keys reachable bottom-up from the
// leaf transitions. step(l, r, sym) receives nullptr for a missing child.
template <class Key, class Step, class Accept>
TreeAutomaton explore(const TrackAlphabet& alpha, Step step, Accept accept, const AutomatonBudget& budget) {
  const auto s = alpha.size();
  std::vector<Key> keys;
  std::map<Key, int> ids;
  std::unordered_map<std::uint64_t, std::vector<int>> rows;
  auto intern = [&](Key&& k) {
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(keys.size());
    ids.emplace(k, id);
    keys.push_back(std::move(k));
    check_table_budget(keys.size(), s, budget);
    return id;
  };
  auto compute = [&](int l, int r) {
    std::optional<Key> kl, kr;
    if (l >= 0) kl = keys[static_cast<std::size_t>(l)];
    if (r >= 0) kr = keys[static_cast<std::size_t>(r)];
    std::vector<int> row(s);
    for (std::size_t sym = 0; sym < s; ++sym)
      row[sym] = intern(step(kl ? &*kl : nullptr, kr ? &*kr : nullptr, static_cast<int>(sym)));
    rows[(static_cast<std::uint64_t>(l + 1) << 32) | static_cast<std::uint32_t>(r + 1)] = std::move(row);
  };
  compute(-1, -1);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const int ki = static_cast<int>(k);
    compute(ki, -1);
    compute(-1, ki);
    for (int j = 0; j <= ki; ++j) {
      compute(ki, j);
      if (j != ki) compute(j, ki);
    }
  }
  const int states = static_cast<int>(keys.size());
  const auto q1 = static_cast<std::size_t>(states) + 1;
  std::vector<int> table(q1 * q1 * s);
  for (const auto& [pair, row] : rows) {
    const auto l = static_cast<std::size_t>(pair >> 32), r = static_cast<std::size_t>(pair & 0xffffffffU);
    std::copy(row.begin(), row.end(), table.begin() + static_cast<std::ptrdiff_t>((l * q1 + r) * s));
  }
  std::vector<bool> acc(keys.size());
  for (std::size_t q = 0; q < keys.size(); ++q) acc[q] = accept(keys[q]);
  return TreeAutomaton(alpha, states, std::move(table), std::move(acc));
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0xff51afd7ed558ccdULL;
}

}  // namespace

TreeAutomaton complement(const TreeAutomaton& a) {
  auto acc = a.accepting_states();
  acc.flip();
  return TreeAutomaton(a.alphabet(), a.states(), a.table(), std::move(acc));
}

TreeAutomaton boolean_compose(BoolOp op, const TreeAutomaton& a, const TreeAutomaton* b,
                              const AutomatonBudget& budget) {
  if (op == BoolOp::Not) return complement(a);
  if (!b) throw ValidationError("binary boolean operation needs two automata");
  if (!(a.alphabet() == b->alphabet())) throw ValidationError("alphabet mismatch in boolean composition");
  using Key = std::pair<int, int>;
  auto step = [&](const Key* l, const Key* r, int sym) {
    return Key{a.delta(l ? l->first : TreeAutomaton::kBottom, r ? r->first : TreeAutomaton::kBottom, sym),
               b->delta(l ? l->second : TreeAutomaton::kBottom, r ? r->second : TreeAutomaton::kBottom, sym)};
  };
  auto accept = [&](const Key& k) {
    return op == BoolOp::And ? a.accepting(k.first) && b->accepting(k.second)
                             : a.accepting(k.first) || b->accepting(k.second);
  };
  return minimize(explore<Key>(a.alphabet(), step, accept, budget));
}

TreeAutomaton cylindrify(const TreeAutomaton& a, const TrackAlphabet& target, const AutomatonBudget& budget) {
  if (a.alphabet() == target) return a;
  const auto& src = a.alphabet();
  if (src.base() != target.base()) throw ValidationError("alphabet mismatch: different base symbols");
  std::vector<int> pos;
  for (const auto& t : src.tracks()) pos.push_back(target.require_track(t));
  check_table_budget(static_cast<std::size_t>(a.states()), target.size(), budget);
  std::vector<int> project(target.size());
  for (std::size_t sym = 0; sym < target.size(); ++sym) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (target.bit(static_cast<int>(sym), pos[i])) bits |= 1U << i;
    project[sym] = src.symbol(target.base_of(static_cast<int>(sym)), bits);
  }
  return tabulate(
      target, a.states(), [&](int l, int r, int sym) { return a.delta(l, r, project[static_cast<std::size_t>(sym)]); },
      [&](int q) { return a.accepting(q); });
}

TreeAutomaton rename_tracks(const TreeAutomaton& a, const std::vector<std::string>& new_names) {
  if (new_names.size() != a.alphabet().tracks().size()) throw ValidationError("track renaming has the wrong length");
  return TreeAutomaton(TrackAlphabet(a.alphabet().base(), new_names), a.states(), a.table(), a.accepting_states());
}

TreeAutomaton minimize(const TreeAutomaton& in) {
  // Reachable part first.
  const auto reach = explore<int>(
      in.alphabet(),
      [&](const int* l, const int* r, int sym) {
        return in.delta(l ? *l : TreeAutomaton::kBottom, r ? *r : TreeAutomaton::kBottom, sym);
      },
      [&](int q) { return in.accepting(q); }, AutomatonBudget{static_cast<std::size_t>(in.states()) + 1, SIZE_MAX});
  const int n = reach.states();
  const auto s = static_cast<int>(reach.alphabet().size());
  std::vector<int> cls(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) cls[static_cast<std::size_t>(q)] = reach.accepting(q) ? 1 : 0;
  int count = -1;
  auto signature_hash = [&](int q) {
    std::uint64_t h = mix(0, static_cast<std::uint64_t>(cls[static_cast<std::size_t>(q)]));
    for (int o = -1; o < n; ++o)
      for (int sym = 0; sym < s; ++sym) {
        h = mix(h, static_cast<std::uint64_t>(cls[static_cast<std::size_t>(reach.delta(q, o, sym))]));
        h = mix(h, static_cast<std::uint64_t>(cls[static_cast<std::size_t>(reach.delta(o, q, sym))]));
      }
    return h;
  };
  auto same_signature = [&](int p, int q) {
    if (cls[static_cast<std::size_t>(p)] != cls[static_cast<std::size_t>(q)]) return false;
    for (int o = -1; o < n; ++o)
      for (int sym = 0; sym < s; ++sym) {
        if (cls[static_cast<std::size_t>(reach.delta(p, o, sym))] != cls[static_cast<std::size_t>(reach.delta(q, o, sym))])
          return false;
        if (cls[static_cast<std::size_t>(reach.delta(o, p, sym))] != cls[static_cast<std::size_t>(reach.delta(o, q, sym))])
          return false;
      }
    return true;
  };
  while (true) {
    // Group by hash, then split groups exactly against their representatives.
    std::map<std::uint64_t, std::vector<int>> reps;  // hash -> representatives
    std::vector<int> next(static_cast<std::size_t>(n));
    std::vector<int> rep_class;
    std::vector<int> rep_state;
    for (int q = 0; q < n; ++q) {
      auto& bucket = reps[signature_hash(q)];
      int found = -1;
      for (int r : bucket)
        if (same_signature(rep_state[static_cast<std::size_t>(r)], q)) {
          found = r;
          break;
        }
      if (found < 0) {
        found = static_cast<int>(rep_state.size());
        rep_state.push_back(q);
        bucket.push_back(found);
      }
      next[static_cast<std::size_t>(q)] = found;
    }
    const int new_count = static_cast<int>(rep_state.size());
    cls = std::move(next);
    if (new_count == count) break;
    count = new_count;
  }
  std::vector<int> rep(static_cast<std::size_t>(count), -1);
  for (int q = 0; q < n; ++q)
    if (rep[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] < 0) rep[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] = q;
  return tabulate(
      reach.alphabet(), count,
      [&](int l, int r, int sym) {
        const int ql = l < 0 ? TreeAutomaton::kBottom : rep[static_cast<std::size_t>(l)];
        const int qr = r < 0 ? TreeAutomaton::kBottom : rep[static_cast<std::size_t>(r)];
        return cls[static_cast<std::size_t>(reach.delta(ql, qr, sym))];
      },
      [&](int c) { return reach.accepting(rep[static_cast<std::size_t>(c)]); });
}

TreeAutomaton quantify_marker(const TreeAutomaton& a, const std::string& track, MarkerKind kind, QuantifierMode mode,
                              const AutomatonBudget& budget) {
  const int ti = a.alphabet().require_track(track);
  if (mode == QuantifierMode::Forall)
    return complement(quantify_marker(complement(a), track, kind, QuantifierMode::Exists, budget));
  TreeAutomaton src = a;
  if (kind == MarkerKind::Element) {
    const auto one = exactly_one_automaton(a.alphabet(), track);
    src = boolean_compose(BoolOp::And, a, &one, budget);
  }
  const auto& in = src.alphabet();
  const auto out = in.without(track);
  auto lift = [&](int sym, std::uint32_t b) {
    const auto bits = out.bits_of(sym);
    const std::uint32_t low = bits & ((1U << ti) - 1U);
    const std::uint32_t high = bits >> ti;
    return in.symbol(out.base_of(sym), low | (b << ti) | (high << (ti + 1)));
  };
  using Key = std::vector<int>;
  static const Key bottom{TreeAutomaton::kBottom};
  auto step = [&](const Key* l, const Key* r, int sym) {
    const Key& ls = l ? *l : bottom;
    const Key& rs = r ? *r : bottom;
    const int s0 = lift(sym, 0), s1 = lift(sym, 1);
    Key out_set;
    for (int ql : ls)
      for (int qr : rs) {
        out_set.push_back(src.delta(ql, qr, s0));
        out_set.push_back(src.delta(ql, qr, s1));
      }
    std::sort(out_set.begin(), out_set.end());
    out_set.erase(std::unique(out_set.begin(), out_set.end()), out_set.end());
    return out_set;
  };
  auto accept = [&](const Key& k) {
    return std::any_of(k.begin(), k.end(), [&](int q) { return src.accepting(q); });
  };
  return minimize(explore<Key>(out, step, accept, budget));
}

TreeAutomaton constant_automaton(const TrackAlphabet& alphabet, bool accept) {
  return tabulate(alphabet, 1, [](int, int, int) { return 0; }, [accept](int) { return accept; });
}

TreeAutomaton exactly_one_automaton(const TrackAlphabet& alphabet, const std::string& track) {
  const int t = alphabet.require_track(track);
  return tabulate(
      alphabet, 3,
      [&](int l, int r, int sym) {
        const int c = std::max(l, 0) + std::max(r, 0) + (alphabet.bit(sym, t) ? 1 : 0);
        return std::min(c, 2);
      },
      [](int q) { return q == 1; });
}

TreeAutomaton modular_atom_automaton(const TrackAlphabet& alphabet, const std::string& track, int a, int p) {
  if (p < 2) throw ValidationError("modulus must be at least 2");
  if (a < 0 || a >= p) throw ValidationError("residue must lie in [0, p)");
  const int t = alphabet.require_track(track);
  return tabulate(
      alphabet, p,
      [&](int l, int r, int sym) { return (std::max(l, 0) + std::max(r, 0) + (alphabet.bit(sym, t) ? 1 : 0)) % p; },
      [a](int q) { return q == a; });
}

TreeAutomaton coincidence_automaton(const TrackAlphabet& alphabet, const std::vector<std::string>& tracks,
                                    std::optional<int> base) {
  std::uint32_t mask = 0;
  for (const auto& t : tracks) mask |= 1U << alphabet.require_track(t);
  if (base && (*base < 0 || static_cast<std::size_t>(*base) >= alphabet.base().size()))
    throw ValidationError("base symbol outside the alphabet");
  return tabulate(
      alphabet, 2,
      [&](int l, int r, int sym) {
        if (l == 1 || r == 1) return 1;
        const bool here = (alphabet.bits_of(sym) & mask) == mask && (!base || alphabet.base_of(sym) == *base);
        return here ? 1 : 0;
      },
      [](int q) { return q == 1; });
}

TreeAutomaton child_automaton(const TrackAlphabet& alphabet, const std::string& parent, const std::string& child,
                              bool left) {
  const int tp = alphabet.require_track(parent), tc = alphabet.require_track(child);
  // 0: nothing yet, 1: subtree root is marked `child`, 2: pattern found.
  return tabulate(
      alphabet, 3,
      [&](int l, int r, int sym) {
        if (l == 2 || r == 2) return 2;
        if (alphabet.bit(sym, tp) && (left ? l : r) == 1) return 2;
        return alphabet.bit(sym, tc) ? 1 : 0;
      },
      [](int q) { return q == 2; });
}

std::string dump_automaton(const TreeAutomaton& a) {
  std::ostringstream out;
  const auto& alpha = a.alphabet();
  out << "base:";
  for (const auto& b : alpha.base()) out << ' ' << b;
  out << "\ntracks:";
  for (const auto& t : alpha.tracks()) out << ' ' << t;
  out << "\nstates: " << a.states() << "\nsymbols: " << alpha.size() << "\naccepting:";
  for (int q = 0; q < a.states(); ++q)
    if (a.accepting(q)) out << ' ' << q;
  out << "\ntransitions:\n";
  auto name = [](int q) { return q == TreeAutomaton::kBottom ? std::string("_") : std::to_string(q); };
  for (int l = -1; l < a.states(); ++l)
    for (int r = -1; r < a.states(); ++r)
      for (std::size_t sym = 0; sym < alpha.size(); ++sym)
        out << name(l) << ' ' << name(r) << ' ' << alpha.symbol_name(static_cast<int>(sym)) << " -> "
            << a.delta(l, r, static_cast<int>(sym)) << '\n';
  return out.str();
}

}  // namespace cmsovc
