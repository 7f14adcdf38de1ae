#include "calabi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace calabi {

namespace {

std::string describe_loss(std::size_t node, const Point& x, double eigenvalue) {
  std::ostringstream msg;
  msg << "Hessian not positive definite at node " << node << " x = (" << x[0] << ", " << x[1]
      << "), min eigenvalue " << eigenvalue;
  return msg.str();
}

// D^2 u at every node from the spectrum of f, plus the pointwise inverse.
HessianField hessian_from_spectrum(FourierTransform& ft, std::span<const Complex> f_hat, double q) {
  const auto& grid = ft.layout().grid();
  HessianField out{grid, {}, {}, std::numeric_limits<double>::infinity()};
  const std::size_t size = grid.size();
  if (grid.dim() == 1) {
    out.hessian[0] = spectral_derivative(ft, f_hat, {2, 0});
    out.inverse[0].resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      const double a = out.hessian[0][i] + q;
      out.hessian[0][i] = a;
      out.min_eigenvalue = std::min(out.min_eigenvalue, a);
      if (!(a > kConvexityThreshold)) throw ConvexityLoss(i, grid.point(i), a);
      out.inverse[0][i] = 1.0 / a;
    }
    return out;
  }
  out.hessian[0] = spectral_derivative(ft, f_hat, {2, 0});
  out.hessian[1] = spectral_derivative(ft, f_hat, {1, 1});
  out.hessian[2] = spectral_derivative(ft, f_hat, {0, 2});
  for (auto& c : out.inverse) c.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double a = out.hessian[0][i] + q;
    const double b = out.hessian[1][i];
    const double c = out.hessian[2][i] + q;
    out.hessian[0][i] = a;
    out.hessian[2][i] = c;
    const double emin = min_eigenvalue(a, b, c);
    out.min_eigenvalue = std::min(out.min_eigenvalue, emin);
    if (!(emin > kConvexityThreshold)) throw ConvexityLoss(i, grid.point(i), emin);
    const double det = a * c - b * b;
    out.inverse[0][i] = c / det;
    out.inverse[1][i] = -b / det;
    out.inverse[2][i] = a / det;
  }
  return out;
}

// Index of the symmetric component (i, j) in {xx, xy, yy}.
constexpr int sym(int i, int j) { return i + j; }

}  // namespace

ConvexityLoss::ConvexityLoss(std::size_t node, Point x, double eigenvalue)
    : std::domain_error(describe_loss(node, x, eigenvalue)), node_(node), x_(x), eigenvalue_(eigenvalue) {}

HessianField hessian(const SymplecticPotential& pot) {
  auto& ft = fourier_for(pot.grid());
  const auto f_hat = ft.forward(pot.periodic.values());
  return hessian_from_spectrum(ft, f_hat, pot.quadratic);
}

AbreuEvaluation evaluate_abreu(FourierTransform& ft, std::span<const Complex> f_hat, double q) {
  const auto& layout = ft.layout();
  const auto& grid = layout.grid();
  const HessianField h = hessian_from_spectrum(ft, f_hat, q);

  AbreuEvaluation out;
  out.min_eigenvalue = h.min_eigenvalue;
  out.curvature.assign(layout.size(), Complex{});
  std::vector<Complex> comp(layout.size());

  double stiffness = 0.0;
  if (grid.dim() == 1) {
    for (double inv : h.inverse[0]) stiffness = std::max(stiffness, inv * inv);
    ft.forward(h.inverse[0], comp);
    // S_hat = sum_ij k_i k_j U_hat^{ij}
    for (std::size_t s = 0; s < layout.size(); ++s) {
      const double k = layout.wavenumber(s, 0);
      out.curvature[s] = k * k * comp[s];
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double lmax = max_eigenvalue(h.inverse[0][i], h.inverse[1][i], h.inverse[2][i]);
      stiffness = std::max(stiffness, lmax * lmax);
    }
    // S_hat = -(D_xx U^xx + 2 D_xy U^xy + D_yy U^yy) with D the derivative multipliers.
    const std::array<const std::vector<Complex>*, 3> mult{&layout.derivative_multipliers({2, 0}),
                                                          &layout.derivative_multipliers({1, 1}),
                                                          &layout.derivative_multipliers({0, 2})};
    for (int c = 0; c < 3; ++c) {
      ft.forward(h.inverse[c], comp);
      const double weight = c == 1 ? -2.0 : -1.0;
      const auto& mc = *mult[c];
      for (std::size_t s = 0; s < layout.size(); ++s) out.curvature[s] += weight * mc[s] * comp[s];
    }
  }
  out.stiffness = stiffness;

  double sum = 0.0;
  for (std::size_t s = 0; s < layout.size(); ++s) {
    sum += layout.parseval_weight(s) * std::norm(out.curvature[s]);
  }
  const double n_total = static_cast<double>(grid.size());
  out.calabi_energy = std::pow(grid.spacing(), grid.dim()) * sum / n_total;
  return out;
}

ScalarField abreu_scalar_curvature(const SymplecticPotential& pot) {
  auto& ft = fourier_for(pot.grid());
  const auto f_hat = ft.forward(pot.periodic.values());
  const auto eval = evaluate_abreu(ft, f_hat, pot.quadratic);
  return ScalarField(pot.grid(), ft.inverse(eval.curvature));
}

ScalarField riemann_norm(const SymplecticPotential& pot) {
  const auto& grid = pot.grid();
  auto& ft = fourier_for(grid);
  const HessianField h = hessian(pot);
  const int dim = grid.dim();
  const std::size_t size = grid.size();
  std::vector<double> out(size);

  if (dim == 1) {
    const auto spec = ft.forward(h.inverse[0]);
    const auto t = spectral_derivative(ft, spec, {2, 0});
    for (std::size_t i = 0; i < size; ++i) out[i] = 0.5 * std::abs(t[i]);
    return ScalarField(grid, std::move(out));
  }

  // second[c][d] holds d_c d_d u^{ij} for component c of u^{ij} and the
  // symmetric derivative pair d.
  std::array<std::array<std::vector<double>, 3>, 3> second;
  const std::array<std::array<int, 2>, 3> orders{{{2, 0}, {1, 1}, {0, 2}}};
  for (int c = 0; c < 3; ++c) {
    const auto spec = ft.forward(h.inverse[c]);
    for (int d = 0; d < 3; ++d) second[c][d] = spectral_derivative(ft, spec, orders[d]);
  }

  for (std::size_t n = 0; n < size; ++n) {
    double G[2][2], Gi[2][2], T[2][2][2][2];
    G[0][0] = h.hessian[0][n];
    G[0][1] = G[1][0] = h.hessian[1][n];
    G[1][1] = h.hessian[2][n];
    Gi[0][0] = h.inverse[0][n];
    Gi[0][1] = Gi[1][0] = h.inverse[1][n];
    Gi[1][1] = h.inverse[2][n];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) T[i][j][k][l] = second[sym(i, j)][sym(k, l)][n];

    // A_{ab}^{cd} = G_{ia} G_{jb} Gi^{kc} Gi^{ld} T^{ij}_{kl}, built one index at a time.
    double A1[2][2][2][2] = {}, A2[2][2][2][2] = {}, A3[2][2][2][2] = {}, A4[2][2][2][2] = {};
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i) A1[a][j][k][l] += G[i][a] * T[i][j][k][l];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            for (int j = 0; j < 2; ++j) A2[a][b][k][l] += G[j][b] * A1[a][j][k][l];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k) A3[a][b][c][l] += Gi[k][c] * A2[a][b][k][l];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d)
            for (int l = 0; l < 2; ++l) A4[a][b][c][d] += Gi[l][d] * A3[a][b][c][l];
    double sq = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) sq += A4[a][b][c][d] * T[a][b][c][d];
    out[n] = 0.5 * std::sqrt(std::max(sq, 0.0));
  }
  return ScalarField(grid, std::move(out));
}

double max_gradient(const SymplecticPotential& pot) {
  const auto& grid = pot.grid();
  const int dim = grid.dim();
  std::array<ScalarField, 2> grad{partial_derivative(pot.periodic, {0}), ScalarField::zeros(grid)};
  if (dim == 2) grad[1] = partial_derivative(pot.periodic, {1});
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    double sq = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double g = grad[a][i] + pot.quadratic * x[a] + pot.slope[a];
      sq += g * g;
    }
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

double mabuchi_energy(const SymplecticPotential& pot) {
  const auto& grid = pot.grid();
  const auto hess = periodic_hessian(pot.periodic);
  const double q = pot.quadratic;
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double det;
    if (grid.dim() == 1) {
      det = hess[0][i] + q;
      if (!(det > kConvexityThreshold)) return std::numeric_limits<double>::quiet_NaN();
    } else {
      const double a = hess[0][i] + q, b = hess[1][i], c = hess[2][i] + q;
      if (!(min_eigenvalue(a, b, c) > kConvexityThreshold)) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      det = a * c - b * b;
    }
    sum += std::log(det);
  }
  // + 0.0 turns the -0 of a flat potential into 0.
  return -std::pow(grid.spacing(), grid.dim()) * sum + 0.0;
}

CurvatureReport energies(const SymplecticPotential& pot) {
  const auto& grid = pot.grid();
  CurvatureReport report{ScalarField::zeros(grid), ScalarField::zeros(grid)};
  report.max_grad = max_gradient(pot);
  if (!(convexity_margin(pot) > kConvexityThreshold)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.weak = true;
    report.calabi_energy = report.mabuchi_energy = report.total_energy = report.max_rm = nan;
    return report;
  }
  report.S = abreu_scalar_curvature(pot);
  report.rm_norm = riemann_norm(pot);

  std::vector<double> s2(grid.size()), rmn(grid.size());
  const int dim = grid.dim();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s2[i] = report.S[i] * report.S[i];
    rmn[i] = std::pow(report.rm_norm[i], dim);
    report.max_rm = std::max(report.max_rm, report.rm_norm[i]);
  }
  report.calabi_energy = integrate(ScalarField(grid, std::move(s2)));
  report.mabuchi_energy = mabuchi_energy(pot);
  const double fibre = std::pow(2.0, dim);
  report.total_energy = std::pow(fibre * integrate(ScalarField(grid, std::move(rmn))), 1.0 / dim);
  return report;
}

std::string curvature_csv_header() {
  return "t,calabi_energy,mabuchi_energy,total_energy,max_rm,max_grad";
}

std::string curvature_csv_row(double t, const CurvatureReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", t, r.calabi_energy,
                r.mabuchi_energy, r.total_energy, r.max_rm, r.max_grad);
  return buf;
}

}  // namespace calabi
