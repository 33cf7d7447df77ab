#pragma once

// Formula-to-automaton compilation over labelled binary trees. Atoms become
// small fixed automata; connectives use products and complements; quantifiers
// use marker projection. The result reads one bit track per free variable.

#include <map>
#include <string>
#include <vector>

#include "cmsovc/automata.hpp"
#include "cmsovc/logic.hpp"

namespace cmsovc {

/// Tree with one track per variable. First-order variables mark their node,
/// monadic variables mark their set; variables missing from `v` give all-zero
/// tracks.
AugmentedTree augment(const Tree& t, const std::vector<std::string>& tracks, const Valuation& v);
/// Same, with the marks given as node indices per track.
AugmentedTree augment(const Tree& t, const std::vector<std::string>& tracks,
                      const std::vector<std::vector<int>>& marked);

struct CompileOptions {
  AutomatonBudget budget;
};

/// Compiles formulas over tree_signature(alphabet); caches subformula automata.
class Compiler {
 public:
  explicit Compiler(std::vector<std::string> alphabet, CompileOptions options = {});

  /// Automaton over alphabet × {0,1}^tracks. Every free variable of f must be a
  /// track. First-order tracks are constrained to exactly one mark.
  TreeAutomaton compile(const Formula& f, const std::vector<std::string>& tracks);

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  std::size_t cache_size() const noexcept { return cache_.size(); }

 private:
  TreeAutomaton rec(const Formula& f);
  TreeAutomaton align(const TreeAutomaton& a, const TrackAlphabet& target);
  TreeAutomaton combine(BoolOp op, const TreeAutomaton& a, const TreeAutomaton& b);

  std::vector<std::string> alphabet_;
  CompileOptions options_;
  std::map<std::string, TreeAutomaton> cache_;
};

TreeAutomaton compile(const Formula& f, const std::vector<std::string>& alphabet,
                      const std::vector<std::string>& tracks, const CompileOptions& options = {});

}  // namespace cmsovc
