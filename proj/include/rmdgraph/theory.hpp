#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rmdgraph/dataset.hpp"

namespace rmdgraph {

namespace detail {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

/// Adaptive Simpson quadrature with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol,
                               int max_depth = 24) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integral of f over {x in [a,b] : f(x) <= level}. The sublevel region's
/// boundary points are located by a scan plus bisection, then each smooth
/// piece is integrated separately, so the indicator never crosses a
/// quadrature panel.
inline double integrate_below_level(const std::function<double(double)>& f,
                                    double level, double a, double b,
                                    double tol) {
  constexpr int kScan = 2048;
  std::vector<double> cuts{a};
  const double h = (b - a) / kScan;
  double prev_x = a;
  double prev_s = f(a) - level;
  for (int i = 1; i <= kScan; ++i) {
    const double x = a + i * h;
    const double s = f(x) - level;
    if ((prev_s <= 0.0) != (s <= 0.0)) {
      double lo = prev_x, hi = x, slo = prev_s;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double sm = f(mid) - level;
        if ((slo <= 0.0) == (sm <= 0.0)) {
          lo = mid;
          slo = sm;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_s = s;
  }
  cuts.push_back(b);
  double total = 0.0;
  const double seg_tol = tol / static_cast<double>(cuts.size());
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    if (hi - lo <= 0.0) continue;
    if (f(0.5 * (lo + hi)) <= level) {
      total += adaptive_simpson(f, lo, hi, seg_tol);
    }
  }
  return total;
}

}  // namespace detail

/// Volume of the unit ball in R^d (eta_0 = 1 by convention).
inline double unit_ball_volume(int d) {
  if (d < 0) throw std::invalid_argument("dimension must be >= 0");
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

/// Closed-form Gaussian mixture density on R^d with diagonal covariances.
/// Serves as the analytic counterpart of a sampled Dataset.
struct DensityModel {
  MixtureSpec mixture;
  int dim = 0;

  static DensityModel create(MixtureSpec spec) {
    spec.validate();
    DensityModel m;
    m.dim = spec.dim();
    m.mixture = std::move(spec);
    return m;
  }

  double pdf(const Eigen::VectorXd& x) const {
    if (x.size() != dim) throw std::invalid_argument("point dimension mismatch");
    double total = 0.0;
    for (const auto& c : mixture.components) {
      double expo = 0.0, norm = 1.0;
      for (int j = 0; j < dim; ++j) {
        const double z = x(j) - c.mean(j);
        expo += z * z / c.var(j);
        norm *= 2.0 * std::numbers::pi * c.var(j);
      }
      total += c.weight * std::exp(-0.5 * expo) / std::sqrt(norm);
    }
    return total;
  }

  /// Integration bounds along one axis: component means +- 8 sd.
  std::pair<double, double> axis_bounds(int axis) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : mixture.components) {
      const double sd = std::sqrt(c.var(axis));
      lo = std::min(lo, c.mean(axis) - 8.0 * sd);
      hi = std::max(hi, c.mean(axis) + 8.0 * sd);
    }
    return {lo, hi};
  }

  /// Mixture mass below/above an axis-aligned hyperplane.
  std::pair<double, double> split_mass(int axis, double offset) const {
    double below = 0.0;
    for (const auto& c : mixture.components) {
      below += c.weight * detail::normal_cdf(
                              (offset - c.mean(axis)) / std::sqrt(c.var(axis)));
    }
    return {below, 1.0 - below};
  }
};

namespace detail {

/// Sublevel mass by quadrature: integral of f over {x : f(x) <= level},
/// supported for d <= 2 (adaptive Simpson, abs tol 1e-8, bounds at +-8 sd).
inline double sublevel_mass_quadrature(const DensityModel& model,
                                       double level) {
  constexpr double kTol = 1e-8;
  if (model.dim == 1) {
    const auto [lo, hi] = model.axis_bounds(0);
    auto f = [&](double x) {
      return model.pdf(Eigen::VectorXd::Constant(1, x));
    };
    return integrate_below_level(f, level, lo, hi, kTol);
  }
  if (model.dim == 2) {
    const auto [lo0, hi0] = model.axis_bounds(0);
    const auto [lo1, hi1] = model.axis_bounds(1);
    auto slice_mass = [&](double x0) {
      auto f = [&](double x1) {
        Eigen::Vector2d p(x0, x1);
        return model.pdf(p);
      };
      return integrate_below_level(f, level, lo1, hi1, 1e-10);
    };
    return adaptive_simpson(slice_mass, lo0, hi0, kTol);
  }
  throw std::invalid_argument("sublevel mass supports d <= 2 only");
}

}  // namespace detail

/// Limiting value of the density rank at y: the probability mass of
/// {x : f(x) <= f(y)}. Single-component models use the chi-square closed
/// form; mixtures fall back to quadrature (d <= 2).
inline double sublevel_mass(const DensityModel& model,
                            const Eigen::VectorXd& y) {
  if (model.dim > 2) {
    throw std::invalid_argument("sublevel mass supports d <= 2 only");
  }
  if (model.mixture.components.size() == 1) {
    const auto& c = model.mixture.components[0];
    double q = 0.0;
    for (int j = 0; j < model.dim; ++j) {
      const double z = y(j) - c.mean(j);
      q += z * z / c.var(j);
    }
    // P(chi2_d >= q): the sublevel set of a Gaussian is a Mahalanobis tail.
    if (model.dim == 1) return 2.0 * (1.0 - detail::normal_cdf(std::sqrt(q)));
    return std::exp(-0.5 * q);
  }
  const double p = detail::sublevel_mass_quadrature(model, model.pdf(y));
  return std::clamp(p, 0.0, 1.0);
}

/// Degree-modulation factor lambda + 2(1-lambda)p, in [lambda, 2-lambda].
inline double modulation_factor(double p, double lambda) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must be in [0,1]");
  }
  return lambda + 2.0 * (1.0 - lambda) * p;
}

struct AxisCut {
  int axis = 0;
  double offset = 0.0;
};

/// Analytic limit of the rescaled ratio cut of a degree-modulated graph
/// across an axis-aligned hyperplane:
///   C_d * Int_S f^{1-1/d}(s) rho(s)^{1+1/d} ds * (1/mu+ + 1/mu-)
/// with rho(s) = lambda + 2(1-lambda) p(s) and
/// C_d = 2 eta_{d-1} / ((d+1) eta_d^{1+1/d}). lambda = 1 recovers the plain
/// k-NN limit (rho == 1).
struct LimitCutPrediction {
  double value = 0.0;
  double surface_integral = 0.0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double c_d = 0.0;
  double lambda = 1.0;
};

inline LimitCutPrediction limit_ratiocut(const DensityModel& model,
                                         const AxisCut& cut, double lambda) {
  if (model.dim != 1 && model.dim != 2) {
    throw std::invalid_argument("limit ratio cut supports d in {1, 2}");
  }
  if (cut.axis < 0 || cut.axis >= model.dim) {
    throw std::invalid_argument("cut axis out of range");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must be in [0,1]");
  }
  const int d = model.dim;
  LimitCutPrediction pred;
  pred.lambda = lambda;
  pred.c_d = 2.0 * unit_ball_volume(d - 1) /
             ((d + 1) * std::pow(unit_ball_volume(d), 1.0 + 1.0 / d));
  const auto [below, above] = model.split_mass(cut.axis, cut.offset);
  pred.mu_minus = below;
  pred.mu_plus = above;
  if (below < 1e-6 || above < 1e-6) {
    throw std::invalid_argument("degenerate cut: one side carries no mass");
  }

  if (d == 1) {
    // The surface is a single point; f^{1-1/d} = f^0 = 1 there.
    Eigen::VectorXd s(1);
    s(0) = cut.offset;
    const double rho = modulation_factor(sublevel_mass(model, s), lambda);
    pred.surface_integral = rho * rho;
  } else {
    const int other = 1 - cut.axis;
    const auto [lo, hi] = model.axis_bounds(other);
    auto integrand = [&](double t) {
      Eigen::Vector2d s;
      s(cut.axis) = cut.offset;
      s(other) = t;
      const double f = model.pdf(s);
      const double rho = modulation_factor(sublevel_mass(model, s), lambda);
      return std::sqrt(f) * std::pow(rho, 1.5);
    };
    // The integrand carries ~1e-8 quadrature noise from the nested sublevel
    // masses, so the surface pass asks for 1e-6 to avoid chasing noise.
    pred.surface_integral =
        detail::adaptive_simpson(integrand, lo, hi, 1e-6, 16);
  }
  pred.value =
      pred.c_d * pred.surface_integral * (1.0 / pred.mu_plus + 1.0 / pred.mu_minus);
  return pred;
}

enum class BalancePreference { unbalanced, balanced, tie };

/// Which 2-partition the ratio-cut objective favors, given the cut ratio q
/// and the minority fraction y of the valley split: the valley wins iff
/// q < 4y(1-y). Equality within 1e-12 is a tie.
inline BalancePreference balance_condition(double q, double y) {
  if (!(q >= 0.0)) throw std::invalid_argument("q must be >= 0");
  if (!(y > 0.0 && y <= 0.5)) throw std::invalid_argument("y must be in (0, 0.5]");
  const double threshold = 4.0 * y * (1.0 - y);
  if (std::abs(q - threshold) <= 1e-12) return BalancePreference::tie;
  return q < threshold ? BalancePreference::unbalanced
                       : BalancePreference::balanced;
}

}  // namespace rmdgraph
