#pragma once

// Grids have unbounded VC dimension: a binary counter written into the grid
// lets one formula shatter floor(log2 n) cells of the first row. Also the
// same experiment run on structures that transduce onto grids.
//
// Orientation: cell (i,j) has H-successor (i+1,j) and V-successor (i,j+1).
// Row j holds j-1 in binary, bit i-1 in column i. Objects live on row 1,
// parameters on column 1.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmsovc/logic.hpp"
#include "cmsovc/transduce.hpp"

namespace cmsovc {

/// ψ(X) over {H,V}: X is the counter labelling.
Formula counter_formula();
/// θ(x | y): x = (i,1), y = (1,j) and cell (i,j) is in the counter set.
PartitionedFormula shattering_formula();
/// The set ψ defines on the n x n grid.
std::set<ElementId> counter_set(int n);
/// floor(log2 n) for n >= 1.
int floor_log2(int n);

enum class ShatterMode { Brute, Direct };
std::string_view to_string(ShatterMode mode);
ShatterMode shatter_mode_from_string(std::string_view text);

struct ShatterReport {
  int n = 0;
  ShatterMode mode = ShatterMode::Direct;
  /// Candidate set, (i,1) for i = 1..floor(log2 n), named as in the examined structure.
  std::vector<ElementId> candidate;
  /// Indexed by subset bitmask over `candidate`: first parameter whose trace is that subset.
  std::vector<std::optional<ElementId>> witnesses;
  /// VC dimension of θ's whole set system.
  int vc_dimension = 0;
  bool verdict = false;
};

/// Brute mode model-checks θ on every (x, y) and refuses n > 4. Direct mode builds the counter
/// set, confirms ψ on it, and reads θ off the coordinates.
ShatterReport verify_shattering(int n, ShatterMode mode, const CheckOptions& options = {});

/// Coordinates of a structure over {H,V} that is exactly an n x n grid (any element names).
std::optional<std::map<ElementId, std::pair<int, int>>> grid_coordinates(const Structure& s);

/// Applies t, requires the image to be a grid, and runs the shattering check on the image.
/// Since s ⊨ t⁻¹(θ)(a, b) iff a, b are in the image domain and the image ⊨ θ(a, b), the report
/// is the one for the pulled-back formula on s. Throws ValidationError when the image is no grid.
ShatterReport pullback_demo(const Transduction& t, const Structure& s, ShatterMode mode,
                            const CheckOptions& options = {});

/// A deterministic transduction and its input, ready for pullback_demo.
struct PullbackInstance {
  Transduction transduction;
  Structure input;
};

/// Identity on make_grid(n).
PullbackInstance identity_instance(int n);
/// Grid recovery on the n x n grid graph with the canonical colouring baked in as labels.
PullbackInstance grid_graph_instance(int n);
/// The 3 x 3 grid graph as a minor of a host with one subdivided edge, composed with grid
/// recovery; the minor model and the grid colours are baked into the host.
PullbackInstance minor_instance();

/// CSV "subset,members,witness", one row per subset of the candidate.
std::string shatter_csv(const ShatterReport& r);

}  // namespace cmsovc
