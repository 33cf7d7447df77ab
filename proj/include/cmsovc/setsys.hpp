#pragma once

// k-tuple set systems: restriction to a sub-universe, shattering, VC
// dimension, growth function and the classical Sauer-Shelah bound.
//
// Restriction follows the tuple-system convention: restricting to X keeps
// S ∩ X^k for every member S, and shattering is only ever asked of sets of
// the form X^k (never of arbitrary sets of k-tuples).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmsovc/error.hpp"
#include "cmsovc/structures.hpp"

namespace cmsovc {

/// A k-tuple over a universe of size n, encoded as sum_i t[i] * n^i.
using TupleCode = std::uint64_t;
/// A member set: sorted, duplicate-free tuple codes.
using Member = std::vector<TupleCode>;

class TupleSetSystem {
 public:
  TupleSetSystem() = default;
  /// Members are deduplicated and put in canonical (lexicographic) order.
  TupleSetSystem(std::vector<ElementId> universe, int arity, std::vector<Member> family);

  const std::vector<ElementId>& universe() const noexcept { return universe_; }
  int arity() const noexcept { return arity_; }
  const std::vector<Member>& family() const noexcept { return family_; }
  std::size_t size() const noexcept { return family_.size(); }

  TupleCode encode(const Tuple& positions) const;
  Tuple decode(TupleCode code) const;
  /// Member as tuples of element names, for reporting.
  std::vector<std::vector<ElementId>> member_elements(std::size_t i) const;

  bool operator==(const TupleSetSystem&) const = default;

 private:
  std::vector<ElementId> universe_;
  int arity_ = 1;
  std::vector<Member> family_;
};

struct SetSystemBudget {
  /// Maximum number of candidate subsets examined by a search.
  std::uint64_t max_subsets = std::uint64_t{1} << 26;
};

/// Universe X (a subset of positions of F's universe, in F's order); family {S ∩ X^k}.
TupleSetSystem restrict(const TupleSetSystem& f, const std::vector<int>& subset);
/// Same, addressing X by element names.
TupleSetSystem restrict(const TupleSetSystem& f, const std::vector<ElementId>& subset);

/// Every subset of X^k is the trace of some member.
bool is_shattered(const TupleSetSystem& f, const std::vector<int>& subset,
                  const SetSystemBudget& budget = {});

/// Largest shattered X, found by ascending search; a set is only tried when all
/// of its one-smaller subsets are shattered.
int vc_dimension(const TupleSetSystem& f, const SetSystemBudget& budget = {});
/// A shattered set of maximum size (positions into the universe).
std::vector<int> vc_witness(const TupleSetSystem& f, const SetSystemBudget& budget = {});

enum class GrowthMode { Exact, Sampled };

struct GrowthValue {
  std::uint64_t value = 0;
  GrowthMode mode = GrowthMode::Exact;
  /// True when the value is only a lower bound (sampled mode).
  bool lower_bound = false;
};

/// π_F(n): the largest number of distinct traces on an n-element subset.
/// Sampled mode takes the maximum over `samples` uniform n-subsets.
GrowthValue growth_function(const TupleSetSystem& f, int n, GrowthMode mode = GrowthMode::Exact,
                            std::uint64_t samples = 0, std::uint64_t seed = 0,
                            const SetSystemBudget& budget = {});

/// sum_{i=0}^{d} C(n, i), saturating at UINT64_MAX.
std::uint64_t sauer_shelah_bound(std::uint64_t n, std::uint64_t d);
/// 4 d log2(c d): the VC-dimension bound implied by π(n) <= c n^d.
double density_to_dim_bound(double c, double d);

struct DensityFit {
  double exponent = 0;
  double intercept = 0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0;
  bool poor_fit = false;
  std::size_t points_used = 0;
};

/// Least-squares slope of log π(n) against log n. Points with π = 0 are dropped.
DensityFit fit_density(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& points);

/// CSV rows "n,pi,mode" with a header line.
std::string growth_csv(const std::vector<std::pair<int, GrowthValue>>& rows);

}  // namespace cmsovc
