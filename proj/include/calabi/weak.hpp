#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calabi/grid.hpp"
#include "calabi/potential.hpp"

namespace calabi {

/// Mollification radius for the standard bump eta(y) = c exp(-1 / (1 - |y|^2)).
struct MollifierSpec {
  double h = 0.1;

  /// Requires 0 < h <= 0.5.
  void validate() const;
};

inline constexpr double kMaxMollifierRadius = 0.5;

/// Unnormalized bump exp(-1 / (1 - r^2)) for r^2 < 1, zero otherwise.
double bump_profile(double r_squared);

/// int_{|y|<1} exp(-1 / (1 - |y|^2)) dy in dimension n.
double bump_normalization(int dim);

/// Fourier multiplier of the normalized bump at |k| h = kappa:
/// int eta(y) exp(-i kappa e.y) dy (real and radial).
double bump_multiplier(double kappa, int dim);

/// Periodic convolution f * eta_h, applied as the Fourier multiplier of the
/// bump on the trigonometric interpolant of f.
ScalarField mollify(const ScalarField& f, const MollifierSpec& spec);

/// r(m) for m = 1..m_max with per-entry diagnostics.
struct ApproxSchedule {
  std::vector<int> r;         // r[m - 1]
  std::vector<bool> resolved;  // false when the search was exhausted
  std::vector<double> mismatch;

  int m_max() const { return static_cast<int>(r.size()); }
  int at(int m) const;

  /// r(m) = max(m, 2); the smallest admissible radius index for every m.
  static ApproxSchedule identity(int m_max);
};

/// A weak convex input: the sampled periodic part plus a way to get its
/// almost-everywhere Hessian {xx, xy, yy} at nodes.
struct WeakInput {
  ScalarField f;
  /// Closed-form D^2 f when known; otherwise second differences are used.
  std::function<std::array<double, 3>(const Point&)> hessian;
  std::string hessian_source;  // "closed-form" or "second-differences"

  /// D^2 f at every node, one array per component.
  std::array<std::vector<double>, 3> nodal_hessian() const;
};

/// f = (x^4 + y^4)/4 - (x^2 + y^2)/2 (or the 1-d analogue), whose total
/// potential has D^2 u = diag(3x^2, 3y^2), degenerate on the axes.
WeakInput quartic_example(const PeriodicGrid& grid);
double quartic_value(const Point& x, int dim);

/// Weak input from a sampled field; the Hessian falls back to periodic
/// second differences.
WeakInput weak_from_field(ScalarField f);

/// Periodic part (m / (m + 1)) f_{1/r(m)}; mean is left untouched.
SymplecticPotential approx_potential(const ScalarField& f, int m, const ApproxSchedule& schedule);

/// int_P |log det D^2 v_{j,m} - log det D^2 v_m| dx with
/// v_{j,m} = f_{1/j} + (m+1)/(2m) |x|^2 and v_m = f + (m+1)/(2m) |x|^2.
double log_det_mismatch(const WeakInput& input, int m, int j);

/// For each m, the first j >= max(m, 2) whose mismatch is below 1/m; the
/// search stops at j = 64 m and marks the entry unresolved.
ApproxSchedule choose_schedule(const WeakInput& input, int m_max);

}  // namespace calabi
