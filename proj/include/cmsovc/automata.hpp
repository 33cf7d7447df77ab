#pragma once

// Deterministic bottom-up automata on binary trees. Alphabets are explicit
// products of a base alphabet with bit tracks (one per marker variable);
// transitions live in a dense table indexed by (left, right, symbol) where a
// missing child is kBottom.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmsovc/error.hpp"
#include "cmsovc/structures.hpp"

namespace cmsovc {

class TrackAlphabet {
 public:
  TrackAlphabet() = default;
  TrackAlphabet(std::vector<std::string> base, std::vector<std::string> tracks);

  const std::vector<std::string>& base() const noexcept { return base_; }
  const std::vector<std::string>& tracks() const noexcept { return tracks_; }
  std::size_t size() const noexcept { return base_.size() << tracks_.size(); }

  int symbol(int base_index, std::uint32_t bits) const {
    return (base_index << static_cast<int>(tracks_.size())) | static_cast<int>(bits);
  }
  int base_of(int symbol) const noexcept { return symbol >> static_cast<int>(tracks_.size()); }
  std::uint32_t bits_of(int symbol) const noexcept {
    return static_cast<std::uint32_t>(symbol) & ((1U << tracks_.size()) - 1U);
  }
  bool bit(int symbol, int track) const noexcept { return (bits_of(symbol) >> track) & 1U; }

  std::optional<int> base_index(std::string_view name) const;
  std::optional<int> track_index(std::string_view name) const;
  int require_track(std::string_view name) const;
  /// "a" without tracks, "a:01" with the bits in track order otherwise.
  std::string symbol_name(int symbol) const;

  /// Same base, tracks of this followed by the new ones of `other` (bases must match).
  TrackAlphabet united(const TrackAlphabet& other) const;
  TrackAlphabet without(std::string_view track) const;
  TrackAlphabet with_track(std::string track) const;

  bool operator==(const TrackAlphabet&) const = default;

 private:
  std::vector<std::string> base_;
  std::vector<std::string> tracks_;
};

struct AutomatonBudget {
  std::size_t max_states = 100000;
  std::size_t max_table_entries = 10000000;
};

class TreeAutomaton {
 public:
  static constexpr int kBottom = -1;

  TreeAutomaton() = default;
  /// `table` has (states+1)^2 * |alphabet| entries, indexed by
  /// ((left+1)*(states+1) + (right+1)) * |alphabet| + symbol.
  TreeAutomaton(TrackAlphabet alphabet, int states, std::vector<int> table, std::vector<bool> accepting);

  const TrackAlphabet& alphabet() const noexcept { return alphabet_; }
  int states() const noexcept { return states_; }
  bool accepting(int q) const { return accepting_.at(static_cast<std::size_t>(q)); }
  const std::vector<bool>& accepting_states() const noexcept { return accepting_; }
  const std::vector<int>& table() const noexcept { return table_; }

  int delta(int left, int right, int symbol) const {
    const auto q1 = static_cast<std::size_t>(states_) + 1;
    return table_[((static_cast<std::size_t>(left + 1) * q1 + static_cast<std::size_t>(right + 1)) * alphabet_.size()) +
                  static_cast<std::size_t>(symbol)];
  }

  bool operator==(const TreeAutomaton&) const = default;

 private:
  TrackAlphabet alphabet_;
  int states_ = 0;
  std::vector<int> table_;
  std::vector<bool> accepting_;
};

/// ρ: one state per tree node.
using RunLabeling = std::vector<int>;

/// A tree whose nodes carry one bit per track in addition to their base symbol.
struct AugmentedTree {
  Tree tree;
  std::vector<std::string> tracks;
  /// Per node, bit i set when the node is marked on tracks[i].
  std::vector<std::uint32_t> bits;

  std::string symbol_name(int node) const;
};

/// Runs over explicit per-node symbol ids of A's alphabet.
RunLabeling run_symbols(const TreeAutomaton& a, const Tree& shape, const std::vector<int>& symbols);
/// Runs over a plain tree; A must have no tracks.
RunLabeling run(const TreeAutomaton& a, const Tree& t);
/// Runs over an augmented tree; tracks are matched by name.
RunLabeling run(const TreeAutomaton& a, const AugmentedTree& t);
bool accepts(const TreeAutomaton& a, const Tree& t);
bool accepts(const TreeAutomaton& a, const AugmentedTree& t);

/// Per-node symbol ids of `t` in A's alphabet.
std::vector<int> symbols_for(const TreeAutomaton& a, const AugmentedTree& t);

enum class BoolOp { And, Or, Not };

TreeAutomaton complement(const TreeAutomaton& a);
/// Product (And/Or) or complement (Not, b ignored). Binary ops need equal alphabets.
TreeAutomaton boolean_compose(BoolOp op, const TreeAutomaton& a, const TreeAutomaton* b = nullptr,
                              const AutomatonBudget& budget = {});
/// A over a larger alphabet, ignoring the extra tracks.
TreeAutomaton cylindrify(const TreeAutomaton& a, const TrackAlphabet& target, const AutomatonBudget& budget = {});
/// Renames tracks (a bijection on track names).
TreeAutomaton rename_tracks(const TreeAutomaton& a, const std::vector<std::string>& new_names);
/// Coarsest congruence quotient, with unreachable states removed.
TreeAutomaton minimize(const TreeAutomaton& a);

enum class MarkerKind { Set, Element };
enum class QuantifierMode { Exists, Forall };

TreeAutomaton quantify_marker(const TreeAutomaton& a, const std::string& track, MarkerKind kind, QuantifierMode mode,
                              const AutomatonBudget& budget = {});

// Small fixed automata over an alphabet that contains the named tracks.
TreeAutomaton constant_automaton(const TrackAlphabet& alphabet, bool accept);
/// Accepts iff exactly one node is marked on `track`.
TreeAutomaton exactly_one_automaton(const TrackAlphabet& alphabet, const std::string& track);
/// Accepts iff |marked nodes| ≡ a (mod p).
TreeAutomaton modular_atom_automaton(const TrackAlphabet& alphabet, const std::string& track, int a, int p);
/// Accepts iff some node is marked on every listed track (and has base symbol `base` when given).
TreeAutomaton coincidence_automaton(const TrackAlphabet& alphabet, const std::vector<std::string>& tracks,
                                    std::optional<int> base = std::nullopt);
/// Accepts iff some node marked `parent` has its left (or right) child marked `child`.
TreeAutomaton child_automaton(const TrackAlphabet& alphabet, const std::string& parent, const std::string& child,
                              bool left);

/// Text table: header lines then one "l r symbol -> q" line per entry, "_" for ⊥.
std::string dump_automaton(const TreeAutomaton& a);

}  // namespace cmsovc
