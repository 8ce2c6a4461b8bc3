#include "hvi/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hvi {

double Interval::magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

namespace {

struct Entry {
  std::string_view name;
  PotentialId id;
  bool builtin;
  std::map<std::string, double> defaults;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"exp_quadratic", PotentialId::ExpQuadratic, true, {}},
      {"min_quadratics", PotentialId::MinQuadratics, true, {{"a1", 1.0}, {"c1", 1.0}, {"a2", 4.0}, {"c2", 0.0}}},
      {"quadratic", PotentialId::Quadratic, true, {}},
      {"truncated_quadratic", PotentialId::TruncatedQuadratic, true, {{"m1", -2.0}, {"m2", 2.0}, {"r0", 1.0}}},
      {"abs", PotentialId::Abs, true, {}},
      {"abs_origin", PotentialId::AbsOrigin, false, {}},
      {"quintic_ramp", PotentialId::QuinticRamp, false, {{"beta", 1.0}, {"c", 0.0}}},
      {"power_ramp", PotentialId::PowerRamp, false, {{"beta", 1.0}}},
      {"neg_quadratic", PotentialId::NegQuadratic, false, {}},
      {"zero", PotentialId::Zero, false, {}},
  };
  return entries;
}

std::string available_ids() {
  std::string out;
  for (const auto& e : registry()) {
    if (!out.empty()) out += ", ";
    out += e.name;
  }
  return out;
}

// Bisection for the root of an increasing function on [lo, hi].
template <typename F>
double increasing_root(F&& f, double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<std::string_view> builtin_potential_ids() {
  std::vector<std::string_view> ids;
  for (const auto& e : registry()) {
    if (e.builtin) ids.push_back(e.name);
  }
  return ids;
}

std::vector<std::string_view> extra_potential_ids() {
  std::vector<std::string_view> ids;
  for (const auto& e : registry()) {
    if (!e.builtin) ids.push_back(e.name);
  }
  return ids;
}

PotentialSpec PotentialSpec::make(std::string_view id, double b,
                                  const std::map<std::string, double>& params) {
  const auto& entries = registry();
  auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.name == id; });
  if (it == entries.end()) {
    throw UnknownPotential("unknown potential '" + std::string(id) + "'; available: " + available_ids());
  }
  if (!std::isfinite(b)) throw std::invalid_argument("potential anchor b must be finite");

  PotentialSpec p;
  p.id_ = it->id;
  p.b_ = b;
  p.params_ = it->defaults;
  for (const auto& [key, value] : params) {
    if (!p.params_.contains(key)) {
      std::string known;
      for (const auto& [k, v] : it->defaults) known += (known.empty() ? "" : ", ") + k;
      throw std::invalid_argument("potential '" + std::string(id) + "' has no parameter '" + key +
                                  "'" + (known.empty() ? std::string(" (takes none)") : "; parameters: " + known));
    }
    if (!std::isfinite(value)) throw std::invalid_argument("potential parameter " + key + " must be finite");
    p.params_[key] = value;
  }

  switch (p.id_) {
    case PotentialId::ExpQuadratic:
      p.growth_ = GrowthBound{1.0 + 2.0 * std::abs(b), 2.0};
      p.m_j_ = 1.0;
      p.convex_ = false;
      p.kinks_ = {b};
      break;
    case PotentialId::MinQuadratics: {
      const double a1 = p.param("a1"), c1 = p.param("c1"), a2 = p.param("a2"), c2 = p.param("c2");
      if (a1 < 0.0 || a2 < 0.0) throw std::invalid_argument("min_quadratics: a1, a2 must be >= 0");
      p.inner_piece_ = (c1 < c2 || (c1 == c2 && a1 <= a2)) ? 1 : 2;
      const double da = a1 - a2;
      const double dc = c2 - c1;
      if (da != 0.0 && dc / da > 0.0) {
        p.half_width_ = std::sqrt(2.0 * dc / da);
        p.kinks_ = {b - p.half_width_, b + p.half_width_};
        p.convex_ = false;
      } else {
        p.half_width_ = std::numeric_limits<double>::infinity();
        p.convex_ = true;
        p.m_j_ = 0.0;
      }
      const double amax = std::max(a1, a2);
      p.growth_ = GrowthBound{amax * std::abs(b), amax};
      break;
    }
    case PotentialId::Quadratic:
      p.growth_ = GrowthBound{std::abs(b), 1.0};
      p.m_j_ = 0.0;
      break;
    case PotentialId::TruncatedQuadratic: {
      const double m1 = p.param("m1"), m2 = p.param("m2"), r0 = p.param("r0");
      if (!(m1 <= -r0 && -r0 < 0.0 && r0 <= m2)) {
        throw std::invalid_argument("truncated_quadratic requires m1 <= -r0 < 0 < r0 <= m2");
      }
      p.growth_ = GrowthBound{std::max(std::abs(m1), std::abs(m2)), 0.0};
      p.m_j_ = 0.0;
      p.kinks_ = {b - r0, b + r0};
      break;
    }
    case PotentialId::Abs:
      p.growth_ = GrowthBound{1.0, 0.0};
      p.m_j_ = 0.0;
      p.kinks_ = {b};
      break;
    case PotentialId::AbsOrigin:
      p.growth_ = GrowthBound{1.0, 0.0};
      p.m_j_ = 0.0;
      p.kinks_ = {0.0};
      break;
    case PotentialId::QuinticRamp:
    case PotentialId::PowerRamp:
      if (p.param("beta") < 0.0) throw std::invalid_argument("ramp potentials require beta >= 0");
      p.m_j_ = 0.0;
      break;
    case PotentialId::NegQuadratic:
      p.growth_ = GrowthBound{std::abs(b), 1.0};
      p.m_j_ = 1.0;
      p.convex_ = false;
      break;
    case PotentialId::Zero:
      p.growth_ = GrowthBound{0.0, 0.0};
      p.m_j_ = 0.0;
      break;
  }
  return p;
}

std::string_view PotentialSpec::name() const {
  for (const auto& e : registry()) {
    if (e.id == id_) return e.name;
  }
  return "?";
}

bool PotentialSpec::is_breakpoint(double r) const {
  return std::find(kinks_.begin(), kinks_.end(), r) != kinks_.end();
}

double PotentialSpec::value(double r) const {
  const double d = r - b_;
  switch (id_) {
    case PotentialId::ExpQuadratic:
      return r < b_ ? d * d : 1.0 - std::exp(-d);
    case PotentialId::MinQuadratics: {
      const double j1 = 0.5 * param("a1") * d * d + param("c1");
      const double j2 = 0.5 * param("a2") * d * d + param("c2");
      return std::min(j1, j2);
    }
    case PotentialId::Quadratic:
      return 0.5 * d * d;
    case PotentialId::TruncatedQuadratic: {
      const double r0 = param("r0");
      if (r < b_ - r0) return 0.5 * r0 * r0 + param("m1") * (r - (b_ - r0));
      if (r > b_ + r0) return 0.5 * r0 * r0 + param("m2") * (r - (b_ + r0));
      return 0.5 * d * d;
    }
    case PotentialId::Abs:
      return std::abs(d);
    case PotentialId::AbsOrigin:
      return std::abs(r);
    case PotentialId::QuinticRamp: {
      const double t = r - param("c");
      return t >= 0.0 ? param("beta") * std::pow(t, 5) : 0.0;
    }
    case PotentialId::PowerRamp:
      return r >= 0.0 ? param("beta") * std::pow(r, 2.25) : 0.0;
    case PotentialId::NegQuadratic:
      return -0.5 * d * d;
    case PotentialId::Zero:
      return 0.0;
  }
  return 0.0;
}

Interval PotentialSpec::subdiff(double r) const {
  const double d = r - b_;
  switch (id_) {
    case PotentialId::ExpQuadratic:
      if (r < b_) return Interval::point(2.0 * d);
      if (r == b_) return {0.0, 1.0};
      return Interval::point(std::exp(-d));
    case PotentialId::MinQuadratics: {
      const double s1 = param("a1") * d;
      const double s2 = param("a2") * d;
      const double ad = std::abs(d);
      if (ad == half_width_) return Interval::hull(s1, s2);
      const bool inner = ad < half_width_;
      const int piece = inner ? inner_piece_ : 3 - inner_piece_;
      return Interval::point(piece == 1 ? s1 : s2);
    }
    case PotentialId::Quadratic:
      return Interval::point(d);
    case PotentialId::TruncatedQuadratic: {
      const double r0 = param("r0");
      if (r < b_ - r0) return Interval::point(param("m1"));
      if (r == b_ - r0) return {param("m1"), -r0};
      if (r < b_ + r0) return Interval::point(d);
      if (r == b_ + r0) return {r0, param("m2")};
      return Interval::point(param("m2"));
    }
    case PotentialId::Abs:
      if (r < b_) return Interval::point(-1.0);
      if (r == b_) return {-1.0, 1.0};
      return Interval::point(1.0);
    case PotentialId::AbsOrigin:
      if (r < 0.0) return Interval::point(-1.0);
      if (r == 0.0) return {-1.0, 1.0};
      return Interval::point(1.0);
    case PotentialId::QuinticRamp: {
      const double t = r - param("c");
      return Interval::point(t > 0.0 ? 5.0 * param("beta") * std::pow(t, 4) : 0.0);
    }
    case PotentialId::PowerRamp:
      return Interval::point(r > 0.0 ? 2.25 * param("beta") * std::pow(r, 1.25) : 0.0);
    case PotentialId::NegQuadratic:
      return Interval::point(-d);
    case PotentialId::Zero:
      return Interval::point(0.0);
  }
  return Interval::point(0.0);
}

double PotentialSpec::j0(double r, double s) const {
  const Interval g = subdiff(r);
  return std::max(g.lo * s, g.hi * s);
}

Branch PotentialSpec::branch(double r, Side side) const {
  const double d = r - b_;
  const bool left = side == Side::Left;
  switch (id_) {
    case PotentialId::ExpQuadratic:
      if (r < b_ || (r == b_ && left)) return {2.0 * d, 2.0};
      return {std::exp(-d), -std::exp(-d)};
    case PotentialId::MinQuadratics: {
      const double ad = std::abs(d);
      bool inner = ad < half_width_;
      if (ad == half_width_) inner = (d > 0.0) == left;
      const int piece = inner ? inner_piece_ : 3 - inner_piece_;
      const double a = piece == 1 ? param("a1") : param("a2");
      return {a * d, a};
    }
    case PotentialId::Quadratic:
      return {d, 1.0};
    case PotentialId::TruncatedQuadratic: {
      const double r0 = param("r0");
      if (r < b_ - r0 || (r == b_ - r0 && left)) return {param("m1"), 0.0};
      if (r > b_ + r0 || (r == b_ + r0 && !left)) return {param("m2"), 0.0};
      return {d, 1.0};
    }
    case PotentialId::Abs:
      return {(r < b_ || (r == b_ && left)) ? -1.0 : 1.0, 0.0};
    case PotentialId::AbsOrigin:
      return {(r < 0.0 || (r == 0.0 && left)) ? -1.0 : 1.0, 0.0};
    case PotentialId::QuinticRamp: {
      const double t = r - param("c");
      if (t <= 0.0) return {0.0, 0.0};
      return {5.0 * param("beta") * std::pow(t, 4), 20.0 * param("beta") * std::pow(t, 3)};
    }
    case PotentialId::PowerRamp:
      if (r <= 0.0) return {0.0, 0.0};
      return {2.25 * param("beta") * std::pow(r, 1.25), 2.8125 * param("beta") * std::pow(r, 0.25)};
    case PotentialId::NegQuadratic:
      return {-d, -1.0};
    case PotentialId::Zero:
      return {0.0, 0.0};
  }
  return {};
}

double PotentialSpec::prox(double z, double lambda) const {
  if (!convex_) {
    throw std::logic_error("prox requested for nonconvex potential '" + std::string(name()) + "'");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("prox: lambda must be >= 0");
  auto soft = [lambda](double z, double center) {
    const double d = z - center;
    if (std::abs(d) <= lambda) return center;
    return d > 0.0 ? z - lambda : z + lambda;
  };
  switch (id_) {
    case PotentialId::Quadratic:
      return (z + lambda * b_) / (1.0 + lambda);
    case PotentialId::MinQuadratics: {
      const double a = inner_piece_ == 1 ? param("a1") : param("a2");
      return (z + lambda * a * b_) / (1.0 + lambda * a);
    }
    case PotentialId::TruncatedQuadratic: {
      const double r0 = param("r0");
      const double t = (z + lambda * b_) / (1.0 + lambda);
      if (t > b_ + r0) return std::max(b_ + r0, z - lambda * param("m2"));
      if (t < b_ - r0) return std::min(b_ - r0, z - lambda * param("m1"));
      return t;
    }
    case PotentialId::Abs:
      return soft(z, b_);
    case PotentialId::AbsOrigin:
      return soft(z, 0.0);
    case PotentialId::QuinticRamp: {
      const double c = param("c");
      if (z <= c) return z;
      return increasing_root([&](double t) { return t - z + lambda * branch(t, Side::Right).slope; }, c, z);
    }
    case PotentialId::PowerRamp:
      if (z <= 0.0) return z;
      return increasing_root([&](double t) { return t - z + lambda * branch(t, Side::Right).slope; }, 0.0, z);
    case PotentialId::Zero:
      return z;
    case PotentialId::ExpQuadratic:
    case PotentialId::NegQuadratic:
      break;
  }
  throw std::logic_error("prox not available for potential '" + std::string(name()) + "'");
}

std::string PotentialSpec::describe_params() const {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "b=%.17g", b_);
  out += buf;
  for (const auto& [k, v] : params_) {
    std::snprintf(buf, sizeof buf, " %s=%.17g", k.c_str(), v);
    out += buf;
  }
  return out;
}

}  // namespace hvi
