#include "cmsovc/compression.hpp"

#include <algorithm>
#include <set>

namespace cmsovc {

namespace {

void check_tuple(const NodeTuple& t, std::size_t arity, std::size_t n, const char* what) {
  if (!t) return;
  if (t->size() != arity)
    throw ValidationError(std::string(what) + " tuple has " + std::to_string(t->size()) + " entries, expected " +
                          std::to_string(arity));
  for (int v : *t)
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw ValidationError(std::string(what) + " tuple leaves the tree");
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > cap / base) throw BudgetExceeded("enumeration exceeds " + std::to_string(cap));
    out *= base;
  }
  return out;
}

}  // namespace

AnchorSet compute_anchor_set(const Tree& t, std::vector<int> a) {
  if (a.empty()) throw ValidationError("anchor set A must be non-empty");
  const auto n = t.size();
  for (int v : a)
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw ValidationError("A contains a node outside the tree");
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::vector<bool> in_a(n, false), below(n, false);
  for (int v : a) in_a[static_cast<std::size_t>(v)] = true;
  for (int v : t.postorder()) {
    bool b = in_a[static_cast<std::size_t>(v)];
    for (int c : {t.left(v), t.right(v)})
      if (c != kNoNode && below[static_cast<std::size_t>(c)]) b = true;
    below[static_cast<std::size_t>(v)] = b;
  }
  AnchorSet out{t, a, {}, std::vector<bool>(n, false)};
  for (std::size_t v = 0; v < n; ++v) {
    const int l = t.left(static_cast<int>(v)), r = t.right(static_cast<int>(v));
    const bool branching = l != kNoNode && r != kNoNode && below[static_cast<std::size_t>(l)] &&
                           below[static_cast<std::size_t>(r)];
    if (static_cast<int>(v) == t.root() || in_a[v] || branching) {
      out.member[v] = true;
      out.nodes.push_back(static_cast<int>(v));
    }
  }
  return out;
}

ContractedTree contract(const AnchorSet& anchors) {
  const auto& t = anchors.tree;
  const auto n = t.size();
  ContractedTree c;
  c.anchors = anchors;
  c.root = t.root();
  c.left.assign(n, kNoNode);
  c.right.assign(n, kNoNode);
  c.anchor_map.assign(n, kNoNode);
  c.fibers.assign(n, {});
  // Parents come after children in postorder, so walk it backwards.
  const auto& post = t.postorder();
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    const int v = *it;
    const auto sv = static_cast<std::size_t>(v);
    c.anchor_map[sv] = anchors.member[sv] ? v : c.anchor_map[static_cast<std::size_t>(t.parent(v))];
  }
  for (int v : anchors.nodes) {
    if (v == t.root()) continue;
    const int u = c.anchor_map[static_cast<std::size_t>(t.parent(v))];
    const bool left = t.left(u) != kNoNode && t.is_ancestor(t.left(u), v);
    auto& slot = (left ? c.left : c.right)[static_cast<std::size_t>(u)];
    if (slot != kNoNode) throw Error("contracted node has two children on one side");
    slot = v;
  }
  for (int v : post) {
    c.fibers[static_cast<std::size_t>(c.anchor_map[static_cast<std::size_t>(v)])].push_back(v);
    if (anchors.member[static_cast<std::size_t>(v)]) c.postorder.push_back(v);
  }
  return c;
}

int ContractedTree::child_count(int u) const {
  return (left.at(static_cast<std::size_t>(u)) != kNoNode) + (right.at(static_cast<std::size_t>(u)) != kNoNode);
}

std::vector<int> ContractedTree::children(int u) const {
  std::vector<int> out;
  for (int c : {left.at(static_cast<std::size_t>(u)), right.at(static_cast<std::size_t>(u))})
    if (c != kNoNode) out.push_back(c);
  return out;
}

std::pair<Tree, std::vector<int>> ContractedTree::shape() const {
  const auto& b = anchors.nodes;
  std::vector<int> pos(tree().size(), kNoNode);
  for (std::size_t i = 0; i < b.size(); ++i) pos[static_cast<std::size_t>(b[i])] = static_cast<int>(i);
  std::vector<int> labels, l, r;
  std::vector<std::string> names;
  auto at = [&](int v) { return v == kNoNode ? kNoNode : pos[static_cast<std::size_t>(v)]; };
  for (int v : b) {
    labels.push_back(tree().label(v));
    l.push_back(at(left[static_cast<std::size_t>(v)]));
    r.push_back(at(right[static_cast<std::size_t>(v)]));
    names.push_back(tree().name(v));
  }
  return {Tree(tree().alphabet(), labels, l, r, names), b};
}

int StateTransformation::apply(std::span<const int> inputs) const {
  if (inputs.size() != static_cast<std::size_t>(arity))
    throw ValidationError("transformation of arity " + std::to_string(arity) + " applied to " +
                          std::to_string(inputs.size()) + " children");
  std::size_t i = 0;
  for (int q : inputs) {
    if (q < 0 || q >= states) throw ValidationError("state outside the transformation's domain");
    i = i * static_cast<std::size_t>(states) + static_cast<std::size_t>(q);
  }
  return values.at(i);
}

int EmulationAutomaton::intern(const DeltaLabel& label) {
  auto [it, fresh] = ids_.emplace(label, static_cast<int>(labels_.size()));
  if (fresh) labels_.push_back(label);
  return it->second;
}

int EmulationAutomaton::delta(int label, std::uint32_t bits, std::span<const int> children) const {
  const auto& f = labels_.at(static_cast<std::size_t>(label));
  return f.at(bits).apply(children);
}

RunLabeling EmulationAutomaton::run(const DeltaLabeledTree& t, const NodeTuple& objects) {
  const auto& c = t.contracted;
  RunLabeling rho(c.tree().size(), TreeAutomaton::kBottom);
  for (int u : c.postorder) {
    std::uint32_t bits = 0;
    if (objects)
      for (std::size_t i = 0; i < objects->size(); ++i)
        if ((*objects)[i] == u) bits |= 1U << i;
    std::vector<int> kids;
    for (int k : c.children(u)) kids.push_back(rho[static_cast<std::size_t>(k)]);
    rho[static_cast<std::size_t>(u)] = delta(intern(t.labels.at(static_cast<std::size_t>(u))), bits, kids);
  }
  return rho;
}

Emulation::Emulation(TreeAutomaton a, std::vector<std::string> objects, std::vector<std::string> parameters)
    : a_(std::move(a)), x_(std::move(objects)), y_(std::move(parameters)) {
  const auto& alpha = a_.alphabet();
  for (const auto& v : x_) x_tracks_.push_back(alpha.require_track(v));
  for (const auto& v : y_) y_tracks_.push_back(alpha.require_track(v));
  for (const auto& t : alpha.tracks())
    if (std::find(x_.begin(), x_.end(), t) == x_.end() && std::find(y_.begin(), y_.end(), t) == y_.end())
      throw ValidationError("automaton track '" + t + "' is neither an object nor a parameter");
  if (x_.size() > 16) throw BudgetExceeded("too many object variables");
}

RunLabeling Emulation::run_original(const Tree& t, const NodeTuple& p, const NodeTuple& q) const {
  check_tuple(p, x_.size(), t.size(), "object");
  check_tuple(q, y_.size(), t.size(), "parameter");
  std::vector<std::string> tracks;
  std::vector<std::vector<int>> marked;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    tracks.push_back(x_[i]);
    marked.push_back(p ? std::vector<int>{(*p)[i]} : std::vector<int>{});
  }
  for (std::size_t i = 0; i < y_.size(); ++i) {
    tracks.push_back(y_[i]);
    marked.push_back(q ? std::vector<int>{(*q)[i]} : std::vector<int>{});
  }
  return run(a_, augment(t, tracks, marked));
}

std::vector<int> Emulation::fiber_symbols(const ContractedTree& c, const NodeTuple& p, const NodeTuple& q, int u,
                                          std::optional<std::uint32_t> bits_at_u) const {
  const auto& t = c.tree();
  const auto& alpha = a_.alphabet();
  std::vector<int> out(t.size(), 0);
  for (int w : c.fibers.at(static_cast<std::size_t>(u))) {
    auto b = alpha.base_index(t.symbol(w));
    if (!b) throw ValidationError("tree symbol '" + t.symbol(w) + "' is not in the automaton's alphabet");
    std::uint32_t bits = 0;
    if (q)
      for (std::size_t i = 0; i < y_.size(); ++i)
        if ((*q)[i] == w) bits |= 1U << y_tracks_[i];
    if (bits_at_u) {
      if (w == u)
        for (std::size_t i = 0; i < x_.size(); ++i)
          if (*bits_at_u >> i & 1U) bits |= 1U << x_tracks_[i];
    } else if (p) {
      for (std::size_t i = 0; i < x_.size(); ++i)
        if ((*p)[i] == w) bits |= 1U << x_tracks_[i];
    }
    out[static_cast<std::size_t>(w)] = alpha.symbol(*b, bits);
  }
  return out;
}

StateTransformation Emulation::simulate(const ContractedTree& c, const std::vector<int>& symbols, int u) const {
  const auto& t = c.tree();
  const auto holes = c.children(u);
  const int q = a_.states();
  StateTransformation f;
  f.arity = static_cast<int>(holes.size());
  f.states = q;
  std::size_t combos = 1;
  for (std::size_t i = 0; i < holes.size(); ++i) combos *= static_cast<std::size_t>(q);
  f.values.resize(combos);
  std::vector<int> st(t.size(), TreeAutomaton::kBottom);
  std::vector<int> hole_state(holes.size());
  const auto& fiber = c.fibers[static_cast<std::size_t>(u)];
  for (std::size_t combo = 0; combo < combos; ++combo) {
    auto rest = combo;
    for (std::size_t i = holes.size(); i-- > 0;) {
      hole_state[i] = static_cast<int>(rest % static_cast<std::size_t>(q));
      rest /= static_cast<std::size_t>(q);
    }
    auto state_of = [&](int child) {
      if (child == kNoNode) return TreeAutomaton::kBottom;
      if (c.anchors.contains(child)) {
        for (std::size_t i = 0; i < holes.size(); ++i)
          if (holes[i] == child) return hole_state[i];
        throw Error("fiber reaches a B node that is not a contracted child");
      }
      return st[static_cast<std::size_t>(child)];
    };
    for (int w : fiber)
      st[static_cast<std::size_t>(w)] = a_.delta(state_of(t.left(w)), state_of(t.right(w)),
                                                 symbols[static_cast<std::size_t>(w)]);
    f.values[combo] = st[static_cast<std::size_t>(u)];
  }
  return f;
}

StateTransformation Emulation::context_transform(const ContractedTree& c, const NodeTuple& p, const NodeTuple& q,
                                                 int u) const {
  if (u < 0 || static_cast<std::size_t>(u) >= c.tree().size() || !c.anchors.contains(u))
    throw ValidationError("context transformation asked for a node outside B");
  check_tuple(p, x_.size(), c.tree().size(), "object");
  check_tuple(q, y_.size(), c.tree().size(), "parameter");
  return simulate(c, fiber_symbols(c, p, q, u, std::nullopt), u);
}

DeltaLabeledTree Emulation::delta_labeling(const ContractedTree& c, const NodeTuple& q,
                                           const EmulationOptions& opts) const {
  check_tuple(q, y_.size(), c.tree().size(), "parameter");
  DeltaLabeledTree out{c, std::vector<DeltaLabel>(c.tree().size()), q};
  const std::uint32_t points = 1U << x_.size();
  for (int u : c.anchors.nodes) {
    auto& label = out.labels[static_cast<std::size_t>(u)];
    for (std::uint32_t bits = 0; bits < points; ++bits) {
      label.push_back(simulate(c, fiber_symbols(c, std::nullopt, q, u, bits), u));
      if (!opts.check_representatives) continue;
      // A representative puts x_i on u when the bit is set and elsewhere in A otherwise.
      std::optional<int> other;
      for (int a : c.anchors.anchors)
        if (a != u) {
          other = a;
          break;
        }
      if (bits + 1 != points && !other) continue;
      std::vector<int> rep;
      for (std::size_t i = 0; i < x_.size(); ++i) rep.push_back(bits >> i & 1U ? u : *other);
      if (!(simulate(c, fiber_symbols(c, rep, q, u, std::nullopt), u) == label.back()))
        throw Error("f_u depends on the representative object tuple at node " + c.tree().name(u));
    }
  }
  return out;
}

bool Emulation::agrees(const DeltaLabeledTree& d, const NodeTuple& p, const NodeTuple& q) const {
  const auto rho = run_original(d.contracted.tree(), p, q);
  EmulationAutomaton em(a_);
  const auto sim = em.run(d, p);
  for (int u : d.contracted.anchors.nodes)
    if (rho[static_cast<std::size_t>(u)] != sim[static_cast<std::size_t>(u)]) return false;
  return true;
}

bool Emulation::verify_emulation(const Tree& t, const std::vector<int>& a, const NodeTuple& p,
                                 const NodeTuple& q) const {
  const auto anchors = compute_anchor_set(t, a);
  check_tuple(p, x_.size(), t.size(), "object");
  check_tuple(q, y_.size(), t.size(), "parameter");
  if (p)
    for (int v : *p)
      if (!std::binary_search(anchors.anchors.begin(), anchors.anchors.end(), v))
        throw ValidationError("object tuple must lie in A");
  if (q)
    for (int v : *q)
      if (!anchors.contains(v)) throw ValidationError("parameter tuple must lie in B");
  const auto c = contract(anchors);
  return agrees(delta_labeling(c, q), p, q);
}

DeltaLabeledTree Emulation::corrupt(const DeltaLabeledTree& d, const NodeTuple& p, int u) const {
  if (a_.states() < 2) throw ValidationError("corruption needs at least two states");
  const auto& c = d.contracted;
  if (u < 0 || static_cast<std::size_t>(u) >= c.tree().size() || !c.anchors.contains(u))
    throw ValidationError("corrupted node must lie in B");
  EmulationAutomaton em(a_);
  const auto rho = em.run(d, p);
  std::uint32_t bits = 0;
  if (p)
    for (std::size_t i = 0; i < p->size(); ++i)
      if ((*p)[i] == u) bits |= 1U << i;
  std::size_t index = 0;
  for (int k : c.children(u))
    index = index * static_cast<std::size_t>(a_.states()) + static_cast<std::size_t>(rho[static_cast<std::size_t>(k)]);
  auto out = d;
  auto& v = out.labels[static_cast<std::size_t>(u)].at(bits).values.at(index);
  v = (v + 1) % a_.states();
  return out;
}

Emulation emulation_for(const PartitionedFormula& f, const std::vector<std::string>& alphabet,
                        const CompileOptions& options) {
  auto tracks = f.objects;
  tracks.insert(tracks.end(), f.parameters.begin(), f.parameters.end());
  return Emulation(compile(f.formula, alphabet, tracks, options), f.objects, f.parameters);
}

BigInt theorem_constant(std::size_t states, std::size_t objects, std::size_t parameters) {
  if (objects > 20) throw BudgetExceeded("constant exponent too large");
  const auto q = static_cast<unsigned long long>(states);
  const unsigned long long exp = (1ULL << objects) * (q * q + q + 1);
  if (exp > 10000000ULL) throw BudgetExceeded("constant exponent too large");
  const BigInt per_parameter = boost::multiprecision::pow(BigInt(states), static_cast<unsigned>(exp));
  BigInt c = boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(parameters));
  c *= parameters + 1;
  c *= boost::multiprecision::pow(per_parameter, static_cast<unsigned>(parameters));
  return c;
}

BoundVerifier::BoundVerifier(const Emulation& e, Tree t, std::uint64_t max_runs) : e_(e), t_(std::move(t)) {
  n_ = t_.size();
  const auto x = e_.objects().size(), y = e_.parameters().size();
  const auto total = checked_pow(n_, x + y, max_runs);
  q_count_ = checked_pow(n_, y, max_runs);
  accept_.assign(total, false);
  const auto& a = e_.automaton();
  std::vector<int> p(x), q(y);
  for (std::uint64_t code = 0; code < total; ++code) {
    auto rest = code;
    for (std::size_t i = y; i-- > 0;) {
      q[i] = static_cast<int>(rest % n_);
      rest /= n_;
    }
    for (std::size_t i = x; i-- > 0;) {
      p[i] = static_cast<int>(rest % n_);
      rest /= n_;
    }
    const auto rho = e_.run_original(t_, p, q);
    accept_[code] = a.accepting(rho[static_cast<std::size_t>(t_.root())]);
  }
}

BoundReport BoundVerifier::verify(const std::vector<int>& a, bool count_labelings) const {
  const auto anchors = compute_anchor_set(t_, a);
  const auto& as = anchors.anchors;
  const auto x = e_.objects().size(), y = e_.parameters().size();
  BoundReport r;
  r.anchors = as.size();
  // Codes of A^x in V^x numbering.
  std::vector<std::uint64_t> p_codes{0};
  for (std::size_t i = 0; i < x; ++i) {
    std::vector<std::uint64_t> next;
    for (auto c : p_codes)
      for (int v : as) next.push_back(c * n_ + static_cast<std::uint64_t>(v));
    p_codes.swap(next);
  }
  std::set<std::vector<bool>> traces;
  std::vector<bool> trace(p_codes.size());
  for (std::uint64_t qc = 0; qc < q_count_; ++qc) {
    for (std::size_t i = 0; i < p_codes.size(); ++i) trace[i] = accept_[p_codes[i] * q_count_ + qc];
    traces.insert(trace);
  }
  r.observed = traces.size();
  r.bound = theorem_constant(static_cast<std::size_t>(e_.automaton().states()), x, y) *
            boost::multiprecision::pow(BigInt(as.size()), static_cast<unsigned>(y));
  r.pass = BigInt(r.observed) <= r.bound;
  if (count_labelings) {
    const auto c = contract(anchors);
    const EmulationOptions fast{false};
    const auto baseline = e_.delta_labeling(c, std::nullopt, fast).labels;
    std::set<std::vector<DeltaLabel>> seen;
    std::vector<int> q(y);
    for (std::uint64_t qc = 0; qc < q_count_; ++qc) {
      auto rest = qc;
      for (std::size_t i = y; i-- > 0;) {
        q[i] = static_cast<int>(rest % n_);
        rest /= n_;
      }
      auto labels = e_.delta_labeling(c, q, fast).labels;
      std::size_t diff = 0;
      for (int u : anchors.nodes)
        if (!(labels[static_cast<std::size_t>(u)] == baseline[static_cast<std::size_t>(u)])) ++diff;
      if (diff > y) r.label_diff_ok = false;
      seen.insert(std::move(labels));
    }
    r.labelings = seen.size();
    r.pass = r.pass && r.label_diff_ok && r.observed <= *r.labelings && BigInt(*r.labelings) <= r.bound;
  }
  return r;
}

}  // namespace cmsovc
