#include "cmsovc/setsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace cmsovc {

namespace {

std::uint64_t checked_power(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
      throw BudgetExceeded("tuple space too large to encode");
    r *= base;
  }
  return r;
}

// Positions of `subset` in the universe, sorted; -1 for positions outside.
std::vector<int> local_index(std::size_t n, const std::vector<int>& subset) {
  std::vector<int> local(n, -1);
  std::vector<int> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const int p = sorted[i];
    if (p < 0 || static_cast<std::size_t>(p) >= n) throw ValidationError("subset position outside the universe");
    if (local[static_cast<std::size_t>(p)] >= 0) throw ValidationError("subset lists an element twice");
    local[static_cast<std::size_t>(p)] = static_cast<int>(i);
  }
  return local;
}

// Trace of one member on X^k as sorted local codes (base |X|).
Member trace(const TupleSetSystem& f, const Member& m, const std::vector<int>& local, std::uint64_t base) {
  Member out;
  for (auto code : m) {
    const auto t = f.decode(code);
    std::uint64_t c = 0, mul = 1;
    bool inside = true;
    for (int p : t) {
      const int l = local[static_cast<std::size_t>(p)];
      if (l < 0) {
        inside = false;
        break;
      }
      c += static_cast<std::uint64_t>(l) * mul;
      mul *= base;
    }
    if (inside) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t distinct_traces(const TupleSetSystem& f, const std::vector<int>& subset) {
  const auto local = local_index(f.universe().size(), subset);
  std::set<Member> seen;
  for (const auto& m : f.family()) seen.insert(trace(f, m, local, subset.size()));
  return seen.size();
}

}  // namespace

TupleSetSystem::TupleSetSystem(std::vector<ElementId> universe, int arity, std::vector<Member> family)
    : universe_(std::move(universe)), arity_(arity) {
  if (arity_ < 1) throw ValidationError("tuple arity must be at least 1");
  std::set<ElementId> names(universe_.begin(), universe_.end());
  if (names.size() != universe_.size()) throw ValidationError("duplicate universe element");
  const auto limit = checked_power(universe_.size(), arity_);
  for (auto& m : family) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    if (!m.empty() && m.back() >= limit) throw ValidationError("tuple code outside the universe");
  }
  std::sort(family.begin(), family.end());
  family.erase(std::unique(family.begin(), family.end()), family.end());
  family_ = std::move(family);
}

TupleCode TupleSetSystem::encode(const Tuple& positions) const {
  if (positions.size() != static_cast<std::size_t>(arity_)) throw ValidationError("tuple arity mismatch");
  TupleCode c = 0, mul = 1;
  for (int p : positions) {
    if (p < 0 || static_cast<std::size_t>(p) >= universe_.size()) throw ValidationError("tuple element outside the universe");
    c += static_cast<TupleCode>(p) * mul;
    mul *= universe_.size();
  }
  return c;
}

Tuple TupleSetSystem::decode(TupleCode code) const {
  Tuple t(static_cast<std::size_t>(arity_));
  const auto n = universe_.size();
  for (auto& p : t) {
    p = static_cast<int>(code % n);
    code /= n;
  }
  return t;
}

std::vector<std::vector<ElementId>> TupleSetSystem::member_elements(std::size_t i) const {
  std::vector<std::vector<ElementId>> out;
  for (auto code : family_.at(i)) {
    std::vector<ElementId> row;
    for (int p : decode(code)) row.push_back(universe_[static_cast<std::size_t>(p)]);
    out.push_back(std::move(row));
  }
  return out;
}

TupleSetSystem restrict(const TupleSetSystem& f, const std::vector<int>& subset) {
  const auto local = local_index(f.universe().size(), subset);
  std::vector<int> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  std::vector<ElementId> universe;
  for (int p : sorted) universe.push_back(f.universe()[static_cast<std::size_t>(p)]);
  std::vector<Member> family;
  for (const auto& m : f.family()) family.push_back(trace(f, m, local, sorted.size()));
  return TupleSetSystem(std::move(universe), f.arity(), std::move(family));
}

TupleSetSystem restrict(const TupleSetSystem& f, const std::vector<ElementId>& subset) {
  std::vector<int> positions;
  for (const auto& name : subset) {
    auto it = std::find(f.universe().begin(), f.universe().end(), name);
    if (it == f.universe().end()) throw ValidationError("element '" + name + "' is not in the universe");
    positions.push_back(static_cast<int>(it - f.universe().begin()));
  }
  return restrict(f, positions);
}

bool is_shattered(const TupleSetSystem& f, const std::vector<int>& subset, const SetSystemBudget& budget) {
  std::uint64_t cells = 1;
  for (int i = 0; i < f.arity(); ++i) {
    cells *= subset.size();
    if (cells > 62) throw BudgetExceeded("X^k too large for a shattering check");
  }
  const std::uint64_t needed = std::uint64_t{1} << cells;
  if (needed > budget.max_subsets) throw BudgetExceeded("shattering check exceeds the subset budget");
  if (needed > f.size()) {
    // Still validates the subset.
    local_index(f.universe().size(), subset);
    return false;
  }
  return distinct_traces(f, subset) == needed;
}

namespace {

// Ascending apriori search; returns one witness of maximum size.
std::vector<int> search_witness(const TupleSetSystem& f, const SetSystemBudget& budget) {
  if (f.size() == 0) return {};
  const int n = static_cast<int>(f.universe().size());
  std::set<std::vector<int>> level{{}};
  std::vector<int> best;
  std::uint64_t examined = 0;
  while (!level.empty()) {
    best = *level.begin();
    std::set<std::vector<int>> next;
    // Stop growing once 2^(|X|^k) exceeds the family size: nothing larger can be shattered.
    const std::size_t size = best.size() + 1;
    std::uint64_t cells = 1;
    bool hopeless = false;
    for (int i = 0; i < f.arity(); ++i) {
      cells *= size;
      if (cells >= 63) hopeless = true;
    }
    if (hopeless || (std::uint64_t{1} << cells) > f.size()) break;
    for (const auto& x : level) {
      const int start = x.empty() ? 0 : x.back() + 1;
      for (int e = start; e < n; ++e) {
        auto y = x;
        y.push_back(e);
        bool all_sub = true;
        for (std::size_t drop = 0; drop + 1 < y.size() && all_sub; ++drop) {
          auto z = y;
          z.erase(z.begin() + static_cast<std::ptrdiff_t>(drop));
          all_sub = level.count(z) > 0;
        }
        if (!all_sub) continue;
        if (++examined > budget.max_subsets) throw BudgetExceeded("VC-dimension search exceeds the subset budget");
        if (is_shattered(f, y, budget)) next.insert(y);
      }
    }
    level = std::move(next);
  }
  return best;
}

}  // namespace

int vc_dimension(const TupleSetSystem& f, const SetSystemBudget& budget) {
  return static_cast<int>(search_witness(f, budget).size());
}

std::vector<int> vc_witness(const TupleSetSystem& f, const SetSystemBudget& budget) {
  return search_witness(f, budget);
}

GrowthValue growth_function(const TupleSetSystem& f, int n, GrowthMode mode, std::uint64_t samples,
                            std::uint64_t seed, const SetSystemBudget& budget) {
  const int u = static_cast<int>(f.universe().size());
  if (n < 0 || n > u) throw ValidationError("growth_function: n exceeds the universe size");
  GrowthValue out;
  out.mode = mode;
  if (mode == GrowthMode::Exact) {
    // C(u, n) with saturation.
    std::uint64_t count = 1;
    for (int i = 1; i <= n; ++i) {
      const auto num = static_cast<unsigned __int128>(count) * static_cast<unsigned>(u - n + i);
      count = static_cast<std::uint64_t>(std::min<unsigned __int128>(num / static_cast<unsigned>(i),
                                                                       std::numeric_limits<std::uint64_t>::max()));
    }
    if (count > budget.max_subsets) throw BudgetExceeded("exact growth exceeds the subset budget; use sampled mode");
    std::vector<int> pick(static_cast<std::size_t>(n));
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      out.value = std::max<std::uint64_t>(out.value, distinct_traces(f, pick));
      int i = n - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == u - n + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < n; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
  }
  if (samples == 0) throw ValidationError("sampled growth needs at least one sample");
  if (samples > budget.max_subsets) throw BudgetExceeded("sample count exceeds the subset budget");
  out.lower_bound = true;
  std::mt19937_64 rng(seed);
  std::vector<int> all(static_cast<std::size_t>(u));
  std::iota(all.begin(), all.end(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> pick(i, u - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> x(all.begin(), all.begin() + n);
    out.value = std::max<std::uint64_t>(out.value, distinct_traces(f, x));
  }
  return out;
}

std::uint64_t sauer_shelah_bound(std::uint64_t n, std::uint64_t d) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 sum = 0, binom = 1;
  for (std::uint64_t i = 0; i <= std::min(n, d); ++i) {
    if (i > 0) binom = binom * (n - i + 1) / i;
    sum += binom;
    if (sum >= kMax || binom >= kMax) return kMax;
  }
  return static_cast<std::uint64_t>(sum);
}

double density_to_dim_bound(double c, double d) {
  if (!(c > 0) || !(d > 0)) throw ValidationError("density_to_dim_bound needs c > 0 and d > 0");
  return 4 * d * std::log2(c * d);
}

DensityFit fit_density(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& points) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& [n, pi] : points) {
    if (n < 2) throw ValidationError("fit_density needs n >= 2");
    if (pi == 0) continue;
    xy.emplace_back(std::log(static_cast<double>(n)), std::log(static_cast<double>(pi)));
  }
  if (xy.size() < 3) throw ValidationError("fit_density needs at least 3 usable points");
  double mx = 0, my = 0;
  for (const auto& [x, y] : xy) mx += x, my += y;
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : xy) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
  if (sxx == 0) throw ValidationError("fit_density: all points share the same n");
  DensityFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0;
  for (const auto& [x, y] : xy) {
    const double r = y - (fit.intercept + fit.exponent * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(xy.size()));
  fit.points_used = xy.size();
  fit.poor_fit = fit.residual > 0.05;
  return fit;
}

std::string growth_csv(const std::vector<std::pair<int, GrowthValue>>& rows) {
  std::ostringstream out;
  out << "n,pi,mode\n";
  for (const auto& [n, g] : rows)
    out << n << ',' << g.value << ',' << (g.mode == GrowthMode::Exact ? "exact" : "sampled") << '\n';
  return out.str();
}

}  // namespace cmsovc
