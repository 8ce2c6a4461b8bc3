#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hvi/potentials.hpp"

namespace hvi {

/// Uniform sample of [lo, hi] with `count` points, merged with `extra`.
struct SampleGrid {
  double lo = -10.0;
  double hi = 10.0;
  int count = 2001;
  std::vector<double> extra;

  /// Sorted, duplicate-free sample points.
  std::vector<double> points() const;
};

/// 2001 points on [b-10, b+10] plus every breakpoint and breakpoint +- 1e-9.
SampleGrid default_grid(const PotentialSpec& p);

/// Outcome of a sampled hypothesis check. `worst` is the largest value of the
/// checked quantity (which must stay below `threshold`); the arguments that
/// produced it are recorded.
struct CheckReport {
  std::string check;
  bool pass = true;
  double worst = 0.0;
  double threshold = 0.0;
  double at_r = 0.0;
  double at_s = 0.0;
  double at_c = 0.0;
  std::size_t evaluated = 0;
  std::string detail;

  double margin() const { return threshold - worst; }
};

struct GrowthReport : CheckReport {
  GrowthBound tested;
  GrowthBound fitted;
};

/// |dj(r)| <= c0 + c1 |r| on the grid, using the potential's declared
/// constants (a potential without declared constants fails).
GrowthReport check_growth(const PotentialSpec& p, const SampleGrid& grid);
GrowthReport check_growth(const PotentialSpec& p, const SampleGrid& grid, GrowthBound bound);

/// j0(r; b - r) <= 1e-14 at every grid point.
CheckReport check_sign_condition(const PotentialSpec& p, const SampleGrid& grid);

/// j0(r; b - r) < 0 at every grid point r != b.
CheckReport check_strict_condition(const PotentialSpec& p, const SampleGrid& grid);

struct RelaxedMonotonicity {
  double m_j = 0.0;
  double at_r = 0.0;
  double at_s = 0.0;
  std::size_t pairs = 0;
};

/// sup over grid pairs r != s of (j0(r; s-r) + j0(s; r-s)) / |r-s|^2,
/// clamped below at 0.
RelaxedMonotonicity estimate_relaxed_monotonicity(const PotentialSpec& p, const SampleGrid& grid);

std::vector<double> default_c_grid();

/// Monotonicity-in-alpha condition
///   j0(r; -(r-s)^+) + c j0(s; (r-s)^+) <= 0,
/// checked for every c in `c_grid` on grid pairs with r, s <= b (the range
/// solutions occupy under the sign conditions on the data), and for c = 1 on
/// all grid pairs (the convexity it implies).
CheckReport check_hhh(const PotentialSpec& p, const SampleGrid& grid,
                      const std::vector<double>& c_grid);

}  // namespace hvi
