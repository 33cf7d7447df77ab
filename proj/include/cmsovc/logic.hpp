#pragma once

// CMSO syntax, the prefix text format, and the brute-force model checker used
// as the correctness oracle everywhere else.
//
// Text grammar (fully parenthesized prefix):
//   form := (R v ...) | (= v v) | (in v V) | (mod V a p) | (true) | (false)
//         | (not form) | (and form form ...) | (or form form ...)
//         | (implies form form) | (iff form form)
//         | (exists v form) | (forall v form) | (existsS V form) | (forallS V form)
// Names starting with an uppercase ASCII letter are monadic; all others are
// first-order.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmsovc/error.hpp"
#include "cmsovc/setsys.hpp"
#include "cmsovc/structures.hpp"

namespace cmsovc {

enum class Dialect { MSO, C2MSO, CMSO };
std::string_view to_string(Dialect d);
Dialect dialect_from_string(std::string_view text);

enum class FormulaKind {
  True,
  False,
  Atom,
  Equal,
  In,
  Mod,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Exists,
  Forall,
  ExistsSet,
  ForallSet,
};

bool is_set_variable(std::string_view name);

class Formula {
 public:
  struct Node {
    FormulaKind kind = FormulaKind::True;
    std::string name;               // relation (Atom) or bound variable (quantifiers)
    std::vector<std::string> args;  // Atom args; Equal {x,y}; In {x,X}; Mod {X}
    int residue = 0;
    int modulus = 0;
    std::vector<Formula> children;
  };

  /// The formula "true".
  Formula();
  explicit Formula(Node node);

  FormulaKind kind() const noexcept { return node_->kind; }
  const std::string& relation() const noexcept { return node_->name; }
  const std::string& variable() const noexcept { return node_->name; }
  const std::vector<std::string>& args() const noexcept { return node_->args; }
  int residue() const noexcept { return node_->residue; }
  int modulus() const noexcept { return node_->modulus; }
  const std::vector<Formula>& children() const noexcept { return node_->children; }
  const Formula& child(std::size_t i = 0) const { return node_->children.at(i); }
  /// Identity of the shared node (stable while the formula is alive).
  const Node* id() const noexcept { return node_.get(); }

  bool is_quantifier() const noexcept;
  bool is_set_quantifier() const noexcept;

  /// Structural equality.
  bool operator==(const Formula& other) const;

 private:
  std::shared_ptr<const Node> node_;
};

/// Formula builders. `conj`/`disj` of no operands are true/false, of one operand the operand.
namespace mk {
Formula truth();
Formula falsity();
Formula atom(std::string relation, std::vector<std::string> args);
Formula eq(std::string x, std::string y);
Formula in(std::string x, std::string set);
Formula mod(std::string set, int residue, int modulus);
Formula neg(Formula f);
Formula conj(std::vector<Formula> fs);
Formula disj(std::vector<Formula> fs);
Formula implies(Formula a, Formula b);
Formula iff(Formula a, Formula b);
Formula exists(std::string x, Formula f);
Formula forall(std::string x, Formula f);
Formula exists_set(std::string x, Formula f);
Formula forall_set(std::string x, Formula f);
/// Quantifier of the sort matching the variable name.
Formula exists_any(std::string x, Formula f);
Formula forall_any(std::string x, Formula f);
/// X ⊆ Y as ∀z (z∈X → z∈Y).
Formula subset(const std::string& x, const std::string& y);
}  // namespace mk

struct ParseOptions {
  Dialect dialect = Dialect::CMSO;
  /// When set, every free variable must be listed here ("unbound variable" otherwise).
  std::optional<std::vector<std::string>> free;
};

Formula parse_formula(std::string_view text, const ParseOptions& options = {});
std::string print_formula(const Formula& f);

/// Least dialect containing f.
Dialect required_dialect(const Formula& f);
/// Throws ValidationError when f does not belong to `dialect`.
void check_dialect(const Formula& f, Dialect dialect);

/// Free variables in order of first occurrence.
std::vector<std::string> free_variables(const Formula& f);
std::vector<std::string> free_element_variables(const Formula& f);
std::vector<std::string> free_set_variables(const Formula& f);
/// Relation names used, with arities (throws on inconsistent arities).
std::map<std::string, int> relations_used(const Formula& f);

/// Capture-avoiding simultaneous renaming of free variables.
Formula rename_free(const Formula& f, const std::map<std::string, std::string>& renaming);
/// Replaces each relation atom R(v...) by rewrite(R, v...), with bound variables
/// renamed apart from the free variables of the results.
Formula map_atoms(const Formula& f,
                  const std::function<std::optional<Formula>(const std::string&, const std::vector<std::string>&)>& rewrite);
/// Name of the form base#k unused in f and in `avoid`.
std::string fresh_variable(const std::string& base, const std::set<std::string>& avoid);
std::set<std::string> all_variables(const Formula& f);

struct PartitionedFormula {
  Formula formula;
  std::vector<std::string> objects;
  std::vector<std::string> parameters;

  /// Validates the partition against the formula's free variables.
  PartitionedFormula(Formula formula, std::vector<std::string> objects, std::vector<std::string> parameters);
};

struct Valuation {
  std::map<std::string, ElementId> elements;
  std::map<std::string, std::set<ElementId>> sets;
};

struct CheckOptions {
  /// Cap on quantifier iterations per top-level query.
  std::uint64_t max_valuations = std::uint64_t{1} << 30;
};

/// Bitset over domain positions.
class ElementSet {
 public:
  ElementSet() = default;
  explicit ElementSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}
  std::size_t universe_size() const noexcept { return n_; }
  bool contains(int i) const { return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1U; }
  void insert(int i) { words_[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63); }
  void erase(int i) { words_[static_cast<std::size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void flip(int i) { words_[static_cast<std::size_t>(i) >> 6] ^= std::uint64_t{1} << (i & 63); }
  std::size_t count() const;
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  bool operator==(const ElementSet&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Brute-force evaluator for one formula over one structure. Free variables are
/// bound positionally through the slot lists given at construction.
class ModelChecker {
 public:
  ModelChecker(const Structure& structure, const Formula& formula, std::vector<std::string> element_slots,
               std::vector<std::string> set_slots = {}, CheckOptions options = {});
  ~ModelChecker();
  ModelChecker(const ModelChecker&) = delete;
  ModelChecker& operator=(const ModelChecker&) = delete;

  bool holds(std::span<const int> elements, std::span<const ElementSet> sets = {});
  /// Quantifier iterations spent by the last query.
  std::uint64_t last_cost() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// S ⊨ φ[v].
bool check(const Structure& s, const Formula& f, const Valuation& v = {}, const CheckOptions& options = {});

struct SetSystemOptions {
  CheckOptions check;
  /// Cap on |universe|^(|x̄|+|ȳ|).
  std::uint64_t max_tuples = std::uint64_t{1} << 26;
  /// Elements over which object and parameter tuples range; defaults to the
  /// whole domain, or the vertex elements of an incidence-encoded graph.
  std::optional<std::vector<ElementId>> universe;
};

/// Decides φ(ū, v̄) for universe positions ū (objects) and v̄ (parameters).
using TupleOracle = std::function<bool(std::span<const int> objects, std::span<const int> parameters)>;

/// Set system over `universe` with one member {ū : oracle(ū, v̄)} per parameter tuple v̄.
TupleSetSystem define_set_system(const std::vector<ElementId>& universe, std::size_t object_arity,
                                 std::size_t parameter_arity, const TupleOracle& oracle,
                                 std::uint64_t max_tuples = std::uint64_t{1} << 26);
/// Brute-force S^φ(S).
TupleSetSystem define_set_system(const Structure& s, const PartitionedFormula& f, const SetSystemOptions& options = {});

/// Universe used by define_set_system when none is given.
std::vector<ElementId> default_universe(const Structure& s);

}  // namespace cmsovc
