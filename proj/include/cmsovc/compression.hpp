#pragma once

// Compression of a tree around a set of anchor nodes A. The tree is cut into
// fibers hanging below the nodes of B (root, A, and the branching points of A);
// each fiber is summarized by the state transformation it induces, and an
// automaton on the contracted tree reproduces the original run on B. Counting
// the possible contracted labelings bounds the number of traces of a
// parameterized formula on A.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cmsovc/automata.hpp"
#include "cmsovc/compiler.hpp"
#include "cmsovc/logic.hpp"

namespace cmsovc {

using BigInt = boost::multiprecision::cpp_int;

/// One node per variable, or nullopt for the empty valuation (no marks at all).
using NodeTuple = std::optional<std::vector<int>>;

struct AnchorSet {
  Tree tree;
  /// A, sorted.
  std::vector<int> anchors;
  /// B, sorted.
  std::vector<int> nodes;
  /// Per tree node, membership in B.
  std::vector<bool> member;

  bool contains(int v) const { return member.at(static_cast<std::size_t>(v)); }
};

/// B = {root} ∪ A ∪ {u : both child subtrees of u meet A}.
AnchorSet compute_anchor_set(const Tree& t, std::vector<int> a);

struct ContractedTree {
  AnchorSet anchors;
  int root = kNoNode;
  /// Per tree node: contracted children (kNoNode when absent or when the node is not in B).
  std::vector<int> left, right;
  /// Per tree node: least ancestor-or-self in B.
  std::vector<int> anchor_map;
  /// B nodes, children first.
  std::vector<int> postorder;
  /// Per B node: its fiber (nodes anchored to it) children first; empty outside B.
  std::vector<std::vector<int>> fibers;

  const Tree& tree() const noexcept { return anchors.tree; }
  int child_count(int u) const;
  /// Contracted children of u, left one first.
  std::vector<int> children(int u) const;
  /// The contracted tree as a Tree over B (names and symbols of the original nodes), plus the
  /// original node of each position.
  std::pair<Tree, std::vector<int>> shape() const;
};

ContractedTree contract(const AnchorSet& anchors);

/// Map from hole states to a state: constant, unary or binary.
struct StateTransformation {
  int arity = 0;
  int states = 0;
  /// Binary: values[l * states + r]; unary: values[q]; constant: values[0].
  std::vector<int> values;

  int apply(std::span<const int> inputs) const;
  auto operator<=>(const StateTransformation&) const = default;
};

/// f_u: one transformation per assignment of the object bits at u (bit i = object variable i).
using DeltaLabel = std::vector<StateTransformation>;

struct DeltaLabeledTree {
  ContractedTree contracted;
  /// Per tree node; empty outside B.
  std::vector<DeltaLabel> labels;
  NodeTuple parameters;
};

/// Automaton on contracted trees. Its states are those of the original automaton; labels are
/// interned on first use, never enumerated.
class EmulationAutomaton {
 public:
  explicit EmulationAutomaton(const TreeAutomaton& a) : states_(a.states()), accepting_(a.accepting_states()) {}

  int states() const noexcept { return states_; }
  bool accepting(int q) const { return accepting_.at(static_cast<std::size_t>(q)); }
  int intern(const DeltaLabel& label);
  std::size_t interned() const noexcept { return labels_.size(); }
  /// Evaluates the label at the object bits and applies it to the child states.
  /// Throws ValidationError when the transformation's arity differs from the child count.
  int delta(int label, std::uint32_t bits, std::span<const int> children) const;
  /// Per tree node state, kBottom outside B.
  RunLabeling run(const DeltaLabeledTree& t, const NodeTuple& objects);

 private:
  int states_;
  std::vector<bool> accepting_;
  std::map<DeltaLabel, int> ids_;
  std::vector<DeltaLabel> labels_;
};

struct EmulationOptions {
  /// Recompute every f_u entry from a concrete representative tuple when A has one.
  bool check_representatives = true;
};

/// An automaton whose tracks are split into object tracks x̄ and parameter tracks ȳ.
class Emulation {
 public:
  Emulation(TreeAutomaton a, std::vector<std::string> objects, std::vector<std::string> parameters);

  const TreeAutomaton& automaton() const noexcept { return a_; }
  const std::vector<std::string>& objects() const noexcept { return x_; }
  const std::vector<std::string>& parameters() const noexcept { return y_; }

  /// Run of the automaton on T with p̄ and q̄ marked.
  RunLabeling run_original(const Tree& t, const NodeTuple& p, const NodeTuple& q) const;

  /// State transformation of the context below u (contracted children become holes).
  StateTransformation context_transform(const ContractedTree& c, const NodeTuple& p, const NodeTuple& q, int u) const;

  DeltaLabeledTree delta_labeling(const ContractedTree& c, const NodeTuple& q, const EmulationOptions& opts = {}) const;

  /// True when the emulation run agrees with the original run on every node of B.
  bool agrees(const DeltaLabeledTree& d, const NodeTuple& p, const NodeTuple& q) const;

  /// Checks the emulation claim; p̄ must lie in A, q̄ in B.
  bool verify_emulation(const Tree& t, const std::vector<int>& a, const NodeTuple& p, const NodeTuple& q) const;

  /// Copy of d with the f_u entry used by the run under p̄ redirected to another state.
  /// Needs at least two states.
  DeltaLabeledTree corrupt(const DeltaLabeledTree& d, const NodeTuple& p, int u) const;

 private:
  std::vector<int> fiber_symbols(const ContractedTree& c, const NodeTuple& p, const NodeTuple& q, int u,
                                 std::optional<std::uint32_t> bits_at_u) const;
  StateTransformation simulate(const ContractedTree& c, const std::vector<int>& symbols, int u) const;

  TreeAutomaton a_;
  std::vector<std::string> x_, y_;
  std::vector<int> x_tracks_, y_tracks_;
};

Emulation emulation_for(const PartitionedFormula& f, const std::vector<std::string>& alphabet,
                        const CompileOptions& options = {});

/// c = 2^|y| · (|y|+1) · (|Q|^(2^|x| · (|Q|²+|Q|+1)))^|y|.
BigInt theorem_constant(std::size_t states, std::size_t objects, std::size_t parameters);

struct BoundReport {
  std::size_t anchors = 0;
  /// |S(T)[A]|: distinct traces on A^x̄ over all parameter tuples in V(T)^ȳ.
  std::size_t observed = 0;
  /// Distinct contracted labelings, when requested.
  std::optional<std::size_t> labelings;
  /// Every labeling differs from the baseline in at most |ȳ| nodes.
  bool label_diff_ok = true;
  BigInt bound;
  bool pass = false;
};

/// Exact trace counting on one tree. Precomputes acceptance for all of V(T)^(x̄ȳ).
class BoundVerifier {
 public:
  BoundVerifier(const Emulation& e, Tree t, std::uint64_t max_runs = std::uint64_t{1} << 24);

  BoundReport verify(const std::vector<int>& a, bool count_labelings = false) const;
  const Tree& tree() const noexcept { return t_; }

 private:
  const Emulation& e_;
  Tree t_;
  std::size_t n_ = 0;
  std::uint64_t q_count_ = 1;
  std::vector<bool> accept_;
};

}  // namespace cmsovc
