#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "oek/error.hpp"

namespace oek {

struct GradReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::size_t worst_coordinate = 0;
  bool pass = true;
};

/// Step size for coordinate k. Relative steps scale with |x_k|.
struct StepRule {
  double h = 1e-5;
  bool relative = true;

  double at(double xk) const { return relative ? h * (1.0 + std::abs(xk)) : h; }
};

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences, one coordinate at a time.
inline std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> x, StepRule step = {}) {
  require(step.h > 0.0, ErrorCode::InvalidArgument, "finite-difference step must be > 0");
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = step.at(x[k]);
    xp[k] = x[k] + h;
    const double fp = f(xp);
    xp[k] = x[k] - h;
    const double fm = f(xp);
    xp[k] = x[k];
    require(std::isfinite(fp) && std::isfinite(fm), ErrorCode::NonFiniteEvaluation,
            "function is not finite around coordinate " + std::to_string(k));
    // Divide by the realised step so rounding in x +- h does not bias g.
    g[k] = (fp - fm) / ((x[k] + h) - (x[k] - h));
  }
  return g;
}

inline std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> x, double h) {
  return finite_diff_grad(f, x, StepRule{h, false});
}

/// Per-coordinate relative error |a - n| / max(|a|, |n|, atol). The check
/// passes when either the worst relative or the worst absolute error is
/// within tolerance.
inline GradReport check(std::span<const double> analytic, std::span<const double> numeric, double rtol, double atol) {
  require(analytic.size() == numeric.size(), ErrorCode::LengthMismatch,
          "gradient lengths differ: " + std::to_string(analytic.size()) + " vs " + std::to_string(numeric.size()));
  GradReport r;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double a = analytic[k], n = numeric[k];
    double abs_err = std::abs(a - n);
    if (!std::isfinite(abs_err)) abs_err = std::numeric_limits<double>::infinity();
    const double rel_err = std::isinf(abs_err) ? abs_err : abs_err / std::max({std::abs(a), std::abs(n), atol});
    if (rel_err > r.max_rel_err) {
      r.max_rel_err = rel_err;
      r.worst_coordinate = k;
    }
    r.max_abs_err = std::max(r.max_abs_err, abs_err);
  }
  r.pass = r.max_rel_err <= rtol || r.max_abs_err <= atol;
  return r;
}

}  // namespace oek
