#pragma once

// Formula-defined structure transformers: a domain formula γ(x) plus one
// defining formula per output relation, optionally preceded by guessing unary
// colour predicates. Includes the syntactic pull-back of output formulas and
// a few fixed transductions on graphs and grids.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cmsovc/logic.hpp"
#include "cmsovc/structures.hpp"

namespace cmsovc {

struct RelationDefinition {
  std::string relation;
  /// Free variables of `formula`, in argument order.
  std::vector<std::string> variables;
  Formula formula;
};

struct Transduction {
  Signature input;
  Signature output;
  std::string domain_variable = "x";
  Formula domain;
  /// One per output relation.
  std::vector<RelationDefinition> relations;
  StructureKind output_kind = StructureKind::Generic;

  /// Throws ValidationError on arity mismatches, unknown relations or stray free variables.
  void validate() const;
  const RelationDefinition& definition(std::string_view relation) const;
};

/// Unary colour predicates guessed before a deterministic transduction over input ∪ colours.
struct NondetTransduction {
  std::vector<std::string> colors;
  Transduction base;

  void validate() const;
  /// The input signature without the colours.
  Signature input() const;
};

/// Colour name -> elements carrying it.
using Coloring = std::map<std::string, std::set<ElementId>>;

/// Domain D = {a : γ(a)}, each output relation restricted to tuples over D.
Structure apply(const Transduction& t, const Structure& s, const CheckOptions& options = {});

/// s expanded by the coloring (colours missing from the map are empty).
Structure colored(const Structure& s, const std::vector<std::string>& colors, const Coloring& c);
Structure apply(const NondetTransduction& t, const Structure& s, const Coloring& c, const CheckOptions& options = {});
/// Images under every colouring, deduplicated. Refuses more than `max_colorings` colourings.
std::set<Structure> apply_all(const NondetTransduction& t, const Structure& s, const CheckOptions& options = {},
                              std::uint64_t max_colorings = std::uint64_t{1} << 16);

/// ψ over the input signature with  s ⊨ ψ(ū)  iff  ū ∈ dom(t(s)) and t(s) ⊨ φ(ū).
Formula backward_translate(const Transduction& t, const Formula& phi);
/// Transduction equal to applying `first` and then `second`.
Transduction compose(const Transduction& first, const Transduction& second);

/// Same domain (as a set) and same relation contents, ignoring element order and kind.
bool same_content(const Structure& a, const Structure& b);

// Fixed transductions ---------------------------------------------------------

/// Grid graph (adjacency encoding) plus colours A0..A2, B0..B2 to the H/V grid.
NondetTransduction grid_recovery();
/// A_t = cells (i,j) with i ≡ t (mod 3), B_t = cells with j ≡ t (mod 3).
Coloring canonical_coloring(int n);

/// Incidence-encoded host plus colours D (one vertex per branch set), F (edges inside branch
/// sets) and L (one witness edge per minor edge) to the adjacency encoding of the minor.
NondetTransduction minor_transduction();

struct MinorModel {
  Graph minor;
  /// Host vertex names per minor vertex, in the minor's vertex order.
  std::vector<std::vector<std::string>> branch_sets;
};

/// Throws ValidationError unless the branch sets are non-empty, disjoint and connected, and
/// every minor edge has a host edge between its branch sets.
void validate_minor_model(const Graph& host, const MinorModel& model);
Coloring minor_valuation(const Graph& host, const MinorModel& model);

/// Rewrites a formula over the incidence encoding (inc, vert, labels) into one over the
/// adjacency encoding of the incidence graph, where vert marks the original vertices.
Formula mso2_to_mso1(const Formula& phi);

/// Placeholder for the C2MSO transduction that extracts large grid graphs from graphs of
/// unbounded treewidth. Its construction is external; calling this throws.
NondetTransduction large_grid_extraction();

// Text format -----------------------------------------------------------------

/// JSON: {"input": {"E": 2}, "output": {...}, "colors": [...], "domain": {"var": "x",
/// "formula": "..."}, "relations": [{"name": .., "vars": [..], "formula": ".."}], "output_kind": ..}
NondetTransduction parse_transduction(std::string_view text);
std::string print_transduction(const NondetTransduction& t);

}  // namespace cmsovc
