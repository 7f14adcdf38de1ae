#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calabi/grid.hpp"
#include "calabi/potential.hpp"

namespace calabi {

// ---------------------------------------------------------------------------
// Growth-versus-integrability search on [1, X_max].

struct Prop31Result {
  std::optional<double> x0;   ///< smallest sample with int_1^x f x^{n-1} > C x^{n+1}
  double ceiling = 0.0;       ///< 2^([M (n+1)^2 2^{n+1} C / (4 (2^{(n+1)/2} - 1)^2)] + 1)
  double inverse_integral = 0.0;  ///< int_1^{X_max} 1/f, trapezoid
  double tail_estimate = 0.0;     ///< power-law extrapolation of int_{X_max}^inf 1/f
  bool within_ceiling = true;
};

/// Bracket exponent [M (n+1)^2 2^{n+1} C / (4 (2^{(n+1)/2} - 1)^2)] + 1, with
/// [.] the integer part.
long prop31_exponent(double M, double C, int n);

/// Samples x (strictly increasing, starting at 1) and positive f values.
/// Throws std::invalid_argument when int_1^inf 1/f < M cannot be confirmed.
Prop31Result prop31_search(std::span<const double> x, std::span<const double> f, double M, double C,
                           int n);

/// count log-spaced samples of fn on [1, x_max].
std::vector<double> log_spaced(double x_max, int count);
Prop31Result prop31_search(const std::function<double(double)>& fn, double x_max, int count,
                           double M, double C, int n);

// ---------------------------------------------------------------------------
// Special convex functions and the explicit constants.

struct SpecialConvexParams {
  double M = 1.0;
  double C0 = 1.0;
  double CE = 1.0;
  int n = 2;

  void validate() const;
};

struct ConstantsLedger {
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double R0 = 0.0;
  double max_radius = 0.0;
  double lambda = 0.0;
  double sphere_area = 0.0;
  long exponent = 0;  ///< R0 = 2M * 2^exponent
};

double unit_ball_volume(int n);
double unit_sphere_area(int n);

ConstantsLedger constants(const SpecialConvexParams& params);

/// `M,C0,CE,n,C1,C2,C3,R0,max_radius,lambda`
std::string ledger_csv_header();
std::string ledger_csv_row(const SpecialConvexParams& params, const ConstantsLedger& ledger);
/// Aligned `key  value` lines.
std::string ledger_text(const SpecialConvexParams& params, const ConstantsLedger& ledger);

/// Jet of a convex function at one sample point. Missing data stays empty.
struct ConvexSample {
  Point x{};
  double value = 0.0;
  std::optional<std::array<double, 2>> gradient;
  std::optional<std::array<double, 3>> hessian;  // xx, xy, yy
  std::optional<double> abreu;                    // u^{ij}_{,ij} = -S
};

/// Samples on a ball of radius R at midpoint radii r_i = (i + 1/2) R / n_r and
/// n_dir equispaced directions (two directions for n = 1), plus the origin.
struct PolarSamples {
  int dim = 2;
  double radius = 0.0;
  int radial_count = 0;
  int direction_count = 0;
  ConvexSample origin;
  std::vector<ConvexSample> nodes;  // radius-major

  /// Quadrature weight of node k for d mu.
  double weight(std::size_t k) const;
  double radius_of(std::size_t k) const;
};

using ConvexModel = std::function<ConvexSample(const Point&)>;

PolarSamples sample_polar(const ConvexModel& model, int dim, double radius, int radial_count,
                          int direction_count);

/// Model of a potential's periodic extension through its trigonometric
/// interpolant, translated so that `centre` maps to the origin. The abreu
/// entry is -S interpolated from the grid curvature.
ConvexModel potential_model(const SymplecticPotential& pot, const Point& centre = {0.0, 0.0});

/// Subtracts u(0) + Du(0).x so that the gauge u(0) = 0, Du(0) = 0 holds.
PolarSamples normalize_gauge(const PolarSamples& samples);

struct SpecialReport {
  bool convex = false;
  bool gauge = false;
  bool gradient = false;
  bool radial = false;
  bool energy = false;
  double min_eigenvalue = 0.0;
  double gauge_residual = 0.0;
  double max_gradient = 0.0;
  double min_radial_derivative = 0.0;  ///< over |x| >= 1; +inf if none sampled
  double curvature_energy = 0.0;       ///< (int |u^{ij}_{,ij}|^n dmu)^{1/n}

  bool all() const { return convex && gauge && gradient && radial && energy; }
};

/// Checks the five defining conditions at sample resolution. With
/// renormalize set the gauge is fixed first. Throws std::invalid_argument if
/// any sample lacks gradient, Hessian, or curvature data.
SpecialReport special_check(const PolarSamples& samples, const SpecialConvexParams& params,
                            bool renormalize = true);

struct InequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// Both sides of
///   -int n (u - R)^3 + (C_E / 4) ||f^2||_{L^{n/(n-1)}} >= int u^{ij} u_i u_j f
/// over {u < R}, f = (u - R)^2, after gauge normalization. For n = 1 the norm
/// is the sup norm. Throws std::invalid_argument for R <= 0 or when the level
/// set reaches the outer sampled ring.
InequalityResult inequality_check(const PolarSamples& samples, double R, double CE);

}  // namespace calabi
