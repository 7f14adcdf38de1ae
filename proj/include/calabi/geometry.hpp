#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "calabi/potential.hpp"
#include "calabi/spectral.hpp"

namespace calabi {

/// Raised when D^2 u stops being positive definite at some node.
class ConvexityLoss : public std::domain_error {
 public:
  ConvexityLoss(std::size_t node, Point x, double eigenvalue);
  std::size_t node() const { return node_; }
  const Point& where() const { return x_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  std::size_t node_;
  Point x_;
  double eigenvalue_;
};

/// Pointwise D^2 u and its inverse. Component order is {xx, xy, yy}; for
/// n = 1 only the first entry is populated.
struct HessianField {
  PeriodicGrid grid;
  std::array<std::vector<double>, 3> hessian;
  std::array<std::vector<double>, 3> inverse;
  double min_eigenvalue = 0.0;
};

HessianField hessian(const SymplecticPotential& pot);

/// Abreu's scalar curvature S = -sum_ij d_i d_j u^{ij}.
ScalarField abreu_scalar_curvature(const SymplecticPotential& pot);

/// |Rm| with R^{ij}_{kl} = -1/2 d_k d_l u^{ij}, contracted with u_{ij} and u^{ij}:
/// |Rm|^2 = 1/4 u_{ia} u_{jb} u^{kc} u^{ld} (d_k d_l u^{ij}) (d_c d_d u^{ab}).
ScalarField riemann_norm(const SymplecticPotential& pot);

struct CurvatureReport {
  ScalarField S;
  ScalarField rm_norm;
  double calabi_energy = 0.0;
  double mabuchi_energy = 0.0;
  /// (2^n int_P |Rm|^n dx)^{1/n}; 2^n is the volume of the angle torus.
  double total_energy = 0.0;
  double max_rm = 0.0;
  double max_grad = 0.0;
  /// Set when the Hessian is degenerate somewhere; the scalar energies are
  /// then NaN and the fields are zero.
  bool weak = false;
};

CurvatureReport energies(const SymplecticPotential& pot);

/// sup over nodes of |Df(x) + q x + b|.
double max_gradient(const SymplecticPotential& pot);

/// -int_P log det(D^2 u) dx; NaN if the Hessian is degenerate at a node.
double mabuchi_energy(const SymplecticPotential& pot);

/// `t,calabi_energy,mabuchi_energy,total_energy,max_rm,max_grad`
std::string curvature_csv_header();
std::string curvature_csv_row(double t, const CurvatureReport& report);

/// Spectrum-level evaluation of the Abreu operator, shared with the flow.
struct AbreuEvaluation {
  std::vector<Complex> curvature;  // half spectrum of S
  double calabi_energy = 0.0;      // int_P S^2 dx (Parseval)
  /// max over nodes of lambda_max(u^{-1})^2, the largest frozen-coefficient
  /// multiplier of the linearized operator relative to |k|^4.
  double stiffness = 0.0;
  double min_eigenvalue = 0.0;
};

/// Evaluates S for the potential with periodic part spectrum f_hat and
/// quadratic coefficient q. Throws ConvexityLoss.
AbreuEvaluation evaluate_abreu(FourierTransform& ft, std::span<const Complex> f_hat, double q);

}  // namespace calabi
