#include "hvi/potential_checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hvi {

std::vector<double> SampleGrid::points() const {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(std::max(count, 0)) + extra.size());
  if (count == 1) {
    pts.push_back(lo);
  } else if (count > 1) {
    const double step = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i) pts.push_back(i == count - 1 ? hi : lo + i * step);
  }
  pts.insert(pts.end(), extra.begin(), extra.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

SampleGrid default_grid(const PotentialSpec& p) {
  SampleGrid grid;
  grid.lo = p.b() - 10.0;
  grid.hi = p.b() + 10.0;
  grid.count = 2001;
  grid.extra.push_back(p.b());
  for (double k : p.breakpoints()) {
    grid.extra.push_back(k - 1e-9);
    grid.extra.push_back(k);
    grid.extra.push_back(k + 1e-9);
  }
  return grid;
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

}  // namespace

GrowthReport check_growth(const PotentialSpec& p, const SampleGrid& grid) {
  if (auto bound = p.growth()) return check_growth(p, grid, *bound);
  GrowthReport report = check_growth(p, grid, GrowthBound{0.0, 0.0});
  report.pass = false;
  report.detail = "no linear growth bound declared for '" + std::string(p.name()) + "'; " + report.detail;
  return report;
}

GrowthReport check_growth(const PotentialSpec& p, const SampleGrid& grid, GrowthBound bound) {
  GrowthReport report;
  report.check = "growth";
  report.tested = bound;
  report.threshold = 0.0;
  report.worst = -INFINITY;
  const auto pts = grid.points();

  double near = 0.0;
  for (double r : pts) {
    if (std::abs(r) <= 1.0) near = std::max(near, p.subdiff(r).magnitude());
  }
  double c1_fit = 0.0;
  for (double r : pts) {
    if (std::abs(r) > 1.0) c1_fit = std::max(c1_fit, (p.subdiff(r).magnitude() - near) / std::abs(r));
  }
  double c0_fit = 0.0;
  for (double r : pts) {
    const double mag = p.subdiff(r).magnitude();
    c0_fit = std::max(c0_fit, mag - c1_fit * std::abs(r));
    const double excess = mag - (bound.c0 + bound.c1 * std::abs(r));
    ++report.evaluated;
    if (excess > report.worst) {
      report.worst = excess;
      report.at_r = r;
    }
  }
  report.fitted = {c0_fit, c1_fit};
  report.pass = report.worst <= report.threshold;
  report.detail = fmt("max(|dj(r)| - c0 - c1|r|) = %.6g at r = %.6g", report.worst, report.at_r) +
                  fmt("; fitted c0 = %.6g, c1 = %.6g", c0_fit, c1_fit);
  return report;
}

CheckReport check_sign_condition(const PotentialSpec& p, const SampleGrid& grid) {
  CheckReport report;
  report.check = "sign_condition";
  report.threshold = 1e-14;
  report.worst = -INFINITY;
  for (double r : grid.points()) {
    const double v = p.j0(r, p.b() - r);
    ++report.evaluated;
    if (v > report.worst) {
      report.worst = v;
      report.at_r = r;
    }
  }
  report.pass = report.worst <= report.threshold;
  report.detail = fmt("max j0(r; b-r) = %.6g at r = %.6g", report.worst, report.at_r);
  return report;
}

CheckReport check_strict_condition(const PotentialSpec& p, const SampleGrid& grid) {
  CheckReport report;
  report.check = "strict_condition";
  report.threshold = 0.0;
  report.worst = -INFINITY;
  for (double r : grid.points()) {
    if (r == p.b()) continue;
    const double v = p.j0(r, p.b() - r);
    ++report.evaluated;
    if (v > report.worst) {
      report.worst = v;
      report.at_r = r;
    }
  }
  report.pass = report.evaluated > 0 && report.worst < report.threshold;
  report.detail = fmt("max over r != b of j0(r; b-r) = %.6g at r = %.6g", report.worst, report.at_r);
  return report;
}

RelaxedMonotonicity estimate_relaxed_monotonicity(const PotentialSpec& p, const SampleGrid& grid) {
  const auto pts = grid.points();
  std::vector<Interval> sub;
  sub.reserve(pts.size());
  for (double r : pts) sub.push_back(p.subdiff(r));
  auto j0 = [&](std::size_t i, double s) { return std::max(sub[i].lo * s, sub[i].hi * s); };

  RelaxedMonotonicity out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t k = i + 1; k < pts.size(); ++k) {
      const double d = pts[k] - pts[i];
      const double q = (j0(i, d) + j0(k, -d)) / (d * d);
      ++out.pairs;
      if (q > out.m_j) {
        out.m_j = q;
        out.at_r = pts[i];
        out.at_s = pts[k];
      }
    }
  }
  return out;
}

std::vector<double> default_c_grid() { return {1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e4}; }

CheckReport check_hhh(const PotentialSpec& p, const SampleGrid& grid, const std::vector<double>& c_grid) {
  CheckReport report;
  report.check = "hhh";
  report.threshold = 1e-12;
  report.worst = -INFINITY;
  for (double c : c_grid) {
    if (!(c >= 1.0)) {
      report.pass = false;
      report.detail = fmt("c grid must contain only values >= 1 (got %.6g)", c);
      return report;
    }
  }
  const auto pts = grid.points();
  std::vector<Interval> sub;
  sub.reserve(pts.size());
  for (double r : pts) sub.push_back(p.subdiff(r));
  auto j0 = [&](std::size_t i, double s) { return std::max(sub[i].lo * s, sub[i].hi * s); };

  std::string worst_part;
  auto record = [&](double v, std::size_t i, std::size_t k, double c, const char* part) {
    ++report.evaluated;
    if (v > report.worst) {
      report.worst = v;
      report.at_r = pts[i];
      report.at_s = pts[k];
      report.at_c = c;
      worst_part = part;
    }
  };
  // Pairs with r <= s contribute j0(r;0) + c j0(s;0) = 0; only r > s matters.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const double d = pts[i] - pts[k];
      const bool admissible = pts[i] <= p.b();
      if (admissible) {
        for (double c : c_grid) record(j0(i, -d) + c * j0(k, d), i, k, c, "r,s <= b");
      } else {
        record(j0(i, -d) + j0(k, d), i, k, 1.0, "c = 1, all pairs");
      }
    }
  }
  report.pass = report.worst <= report.threshold;
  report.detail = fmt("max j0(r;-(r-s)+) + c j0(s;(r-s)+) = %.6g at r = %.6g, s = %.6g", report.worst,
                      report.at_r, report.at_s) +
                  fmt(", c = %.6g", report.at_c) + " [" + worst_part + "]";
  return report;
}

}  // namespace hvi
