#pragma once

// Cliquewidth expressions (introduce, disjoint union, join, relabel), their
// parse trees as labelled binary trees, the tree-to-graph interpretation, and
// set-system computation on bounded-width graphs through tree automata.

#include <string>
#include <string_view>
#include <vector>

#include "cmsovc/compiler.hpp"
#include "cmsovc/setsys.hpp"
#include "cmsovc/transduce.hpp"

namespace cmsovc {

enum class KOp { Intro, Union, Join, Relabel };

/// Text: (intro v i [label]) | (union e e) | (join i j e) | (relabel i j e), colours from 1.
struct KExpression {
  KOp op = KOp::Intro;
  /// Intro only.
  std::string vertex;
  std::string label;
  /// Intro: colour in i. Join: i, j. Relabel: i -> j.
  int i = 0, j = 0;
  std::vector<KExpression> children;
};

KExpression parse_kexpression(std::string_view text);
std::string print_kexpression(const KExpression& e);
int max_color(const KExpression& e);
/// Labels used by introduce operations, sorted.
std::vector<std::string> expression_labels(const KExpression& e);
/// Throws ValidationError on colours outside [1,k], repeated vertex names or joins with i = j.
void validate_kexpression(const KExpression& e, int k);

/// Adjacency-encoded graph; vertices in introduction order. Every name in `labels` becomes a
/// vertex label (possibly empty) in addition to the ones the expression uses.
Graph eval_kexpression(const KExpression& e, int k, const std::vector<std::string>& labels = {});

/// Σ_k: intro:c, intro:c:L for each label L, union, join:i:j and relabel:i:j (i ≠ j).
std::vector<std::string> cw_alphabet(int k, const std::vector<std::string>& labels);
std::string op_symbol(const KExpression& node);

struct ParseTree {
  Tree tree;
  int k = 0;
  std::vector<std::string> labels;
};

/// Binary tree over cw_alphabet(k, labels ∪ expression labels). Unary operations have a left child
/// only; leaves are named after their vertices, inner nodes "~0", "~1", ...
ParseTree to_parse_tree(const KExpression& e, int k, const std::vector<std::string>& labels = {});

/// Tree signature over Σ_k to {E} ∪ labels: the domain is the introduce leaves, and two leaves are
/// adjacent when some join node above both sees them in its two colours.
Transduction interpretation(int k, const std::vector<std::string>& labels = {});

/// Applies a transduction over a tree signature by running compiled automata per tuple.
Structure apply_on_tree(const Transduction& t, const Tree& tree, Compiler& compiler);

struct WidthOptions {
  CompileOptions compile;
  std::uint64_t max_tuples = std::uint64_t{1} << 24;
  /// Reused (with its subformula cache) when its alphabet matches the parse tree's.
  Compiler* compiler = nullptr;
};

/// Set system of φ (over {E} and vertex labels) on eval(e), computed on the parse tree.
/// `universe` defaults to all vertices.
TupleSetSystem check_on_cliquewidth(const PartitionedFormula& phi, const KExpression& e, int k,
                                    const WidthOptions& options = {},
                                    std::optional<std::vector<ElementId>> universe = std::nullopt);

/// Set system of φ (over the incidence encoding) on g, through a k-expression for the incidence
/// graph of g. Tuples range over the vertices of g.
TupleSetSystem check_on_treewidth(const PartitionedFormula& phi, const Graph& g, const KExpression& certificate, int k,
                                  const WidthOptions& options = {});

/// Throws ValidationError unless eval(certificate) is the incidence graph of g (same names).
void check_certificate(const Graph& g, const KExpression& certificate, int k);

/// 3-expression for the incidence graph of a forest. Throws ValidationError when g has a cycle.
KExpression forest_incidence_expression(const Graph& g);

}  // namespace cmsovc
