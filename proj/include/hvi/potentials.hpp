#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hvi {

/// Closed interval [lo, hi]; the Clarke subdifferential of a scalar locally
/// Lipschitz function is always of this form.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }
  static Interval hull(double a, double b) { return a <= b ? Interval{a, b} : Interval{b, a}; }

  bool is_point() const { return lo == hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  /// Zero inside the interval.
  double distance(double v) const { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); }
  double magnitude() const;

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class PotentialId {
  ExpQuadratic,
  MinQuadratics,
  Quadratic,
  TruncatedQuadratic,
  Abs,
  AbsOrigin,
  QuinticRamp,
  PowerRamp,
  NegQuadratic,
  Zero,
};

enum class Side { Left, Right };

/// Slope and curvature of the smooth piece of j adjacent to a point.
struct Branch {
  double slope = 0.0;
  double curvature = 0.0;
};

/// Constants of the growth bound |dj(r)| <= c0 + c1 |r|.
struct GrowthBound {
  double c0 = 0.0;
  double c1 = 0.0;
};

class UnknownPotential : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A superpotential j anchored at the boundary datum b.
///
/// Built-ins (ids):
///   exp_quadratic        (r-b)^2 for r<b, 1-exp(-(r-b)) for r>=b; nonconvex
///   min_quadratics       min(a1/2 (r-b)^2 + c1, a2/2 (r-b)^2 + c2)
///   quadratic            (r-b)^2 / 2
///   truncated_quadratic  (r-b)^2/2 on [b-r0,b+r0], affine with slopes m1, m2
///                        outside (m1 <= -r0 < 0 < r0 <= m2)
///   abs                  |r-b|
/// Extras without hypothesis guarantees: abs_origin |r|, quintic_ramp
/// beta (r-c)^5_+, power_ramp beta r_+^{9/4}, neg_quadratic -(r-b)^2/2,
/// zero.
class PotentialSpec {
 public:
  static PotentialSpec make(std::string_view id, double b,
                            const std::map<std::string, double>& params = {});

  PotentialId id() const { return id_; }
  std::string_view name() const;
  double b() const { return b_; }
  const std::map<std::string, double>& params() const { return params_; }

  /// Growth constants when the potential satisfies a linear growth bound.
  std::optional<GrowthBound> growth() const { return growth_; }
  /// Known relaxed-monotonicity constant m_j, if finite and known.
  std::optional<double> relaxed_monotonicity() const { return m_j_; }
  bool convex() const { return convex_; }

  double value(double r) const;
  Interval subdiff(double r) const;
  /// Generalized directional derivative: max{ zeta s : zeta in subdiff(r) }.
  double j0(double r, double s) const;

  /// Points where j is not differentiable, ascending.
  const std::vector<double>& breakpoints() const { return kinks_; }
  bool is_breakpoint(double r) const;

  /// Smooth piece containing r; at a breakpoint, the piece on `side`.
  Branch branch(double r, Side side) const;

  /// argmin_t  (t - z)^2 / 2 + lambda j(t)  for convex potentials.
  double prox(double z, double lambda) const;

  std::string describe_params() const;

 private:
  PotentialSpec() = default;
  double param(const char* key) const { return params_.at(key); }

  PotentialId id_ = PotentialId::Quadratic;
  double b_ = 0.0;
  std::map<std::string, double> params_;
  std::optional<GrowthBound> growth_;
  std::optional<double> m_j_;
  bool convex_ = true;
  std::vector<double> kinks_;
  // min_quadratics: which quadratic is active near b.
  int inner_piece_ = 1;
  double half_width_ = 0.0;
};

std::vector<std::string_view> builtin_potential_ids();
std::vector<std::string_view> extra_potential_ids();

}  // namespace hvi
