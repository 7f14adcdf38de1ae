#pragma once

#include <array>
#include <cmath>

#include "calabi/grid.hpp"

namespace calabi {

/// Symplectic potential u(x) = f(x) + (q/2)|x|^2 + b.x with f periodic.
///
/// Potentials on the torus have q = 1 and b = 0. Blow-up rescalings produce
/// other values of q and b on grids with half length != 1.
struct SymplecticPotential {
  ScalarField periodic;
  double quadratic = 1.0;
  std::array<double, 2> slope{0.0, 0.0};

  const PeriodicGrid& grid() const { return periodic.grid(); }
  bool is_standard() const;

  static SymplecticPotential flat(const PeriodicGrid& grid);
};

/// Kahler potential psi(xi) = phi(xi) + |xi|^2 / 2 with phi periodic.
struct KahlerPotential {
  ScalarField periodic;

  const PeriodicGrid& grid() const { return periodic.grid(); }

  static KahlerPotential flat(const PeriodicGrid& grid);
};

/// Spectral second derivatives of a periodic field: {xx, xy, yy}. For n = 1
/// only the first entry is meaningful; the others are zero fields.
std::array<ScalarField, 3> periodic_hessian(const ScalarField& f);

/// Smallest eigenvalue of the symmetric matrix [[xx, xy], [xy, yy]].
inline double min_eigenvalue(double xx, double xy, double yy) {
  const double d = 0.5 * (xx - yy);
  return 0.5 * (xx + yy) - std::sqrt(d * d + xy * xy);
}
inline double max_eigenvalue(double xx, double xy, double yy) {
  const double d = 0.5 * (xx - yy);
  return 0.5 * (xx + yy) + std::sqrt(d * d + xy * xy);
}

/// Minimum over nodes of the smallest eigenvalue of D^2 f + q I.
double convexity_margin(const SymplecticPotential& pot);
double convexity_margin(const KahlerPotential& pot);

/// Convex conjugate. The periodic part of the result has zero mean.
/// Throws std::domain_error if the input is not strictly convex at grid
/// resolution, std::invalid_argument for a non-standard potential.
SymplecticPotential legendre_transform(const KahlerPotential& pot);
KahlerPotential legendre_transform(const SymplecticPotential& pot);

/// Value of the conjugate total function at an arbitrary point (no
/// periodicity or mean normalization is applied).
double conjugate_value(const KahlerPotential& pot, const Point& x);
double conjugate_value(const SymplecticPotential& pot, const Point& xi);

/// Subtracts the grid mean so the periodic part integrates to zero.
ScalarField mean_zero(ScalarField f);

/// L^2(P) distance between the total potentials.
double mabuchi_distance(const SymplecticPotential& a, const SymplecticPotential& b);

}  // namespace calabi
