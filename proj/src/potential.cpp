#include "calabi/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "calabi/spectral.hpp"

namespace calabi {

namespace {

struct Conjugate1d {
  std::vector<double> value;
  std::vector<int> argmax;
};

// Linear-time discrete Legendre-Fenchel transform: max_i (x_j s_i - v_i) for
// increasing s and increasing x, via the lower convex hull of (s_i, v_i).
Conjugate1d discrete_conjugate(std::span<const double> s, std::span<const double> v,
                               std::span<const double> x) {
  std::vector<int> hull;
  hull.reserve(s.size());
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2];
      const int b = hull.back();
      // Drop b if it lies on or above the chord a -> i.
      const double cross = (v[b] - v[a]) * (s[i] - s[a]) - (v[i] - v[a]) * (s[b] - s[a]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }

  Conjugate1d out{std::vector<double>(x.size()), std::vector<int>(x.size())};
  std::size_t k = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    while (k + 1 < hull.size()) {
      const int a = hull[k];
      const int b = hull[k + 1];
      const double slope = (v[b] - v[a]) / (s[b] - s[a]);
      if (slope < x[j]) {
        ++k;
      } else {
        break;
      }
    }
    const int best = hull[k];
    out.argmax[j] = best;
    out.value[j] = x[j] * s[best] - v[best];
  }
  return out;
}

void require_standard(const PeriodicGrid& grid, const std::string& context) {
  if (grid.half_length() != 1.0) {
    throw std::invalid_argument(context + ": requires the standard fundamental domain [-1,1)^n");
  }
}

double margin_of(const ScalarField& f, double q) {
  const auto hess = periodic_hessian(f);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = f.grid().dim() == 1
                         ? hess[0][i] + q
                         : min_eigenvalue(hess[0][i] + q, hess[1][i], hess[2][i] + q);
    margin = std::min(margin, e);
  }
  return margin;
}

// Newton polish of the maximizer of x.s - p(s) - |s|^2/2 from a discrete
// starting point; returns the conjugate value.
double polish(const TrigInterpolant& p, const Point& x, Point s, int dim) {
  auto objective = [&](const LocalJet& jet, const Point& at) {
    double v = -jet.value;
    for (int a = 0; a < dim; ++a) v += x[a] * at[a] - 0.5 * at[a] * at[a];
    return v;
  };
  LocalJet jet = p.evaluate(s);
  double best = objective(jet, s);
  for (int iter = 0; iter < 50; ++iter) {
    // Residual r = x - s - grad p(s); Jacobian J = I + D^2 p(s).
    Point r{0.0, 0.0};
    for (int a = 0; a < dim; ++a) r[a] = x[a] - s[a] - jet.gradient[a];
    Point delta{0.0, 0.0};
    if (dim == 1) {
      delta[0] = r[0] / (1.0 + jet.hessian[0]);
    } else {
      const double a = 1.0 + jet.hessian[0];
      const double b = jet.hessian[1];
      const double c = 1.0 + jet.hessian[2];
      const double det = a * c - b * b;
      delta[0] = (c * r[0] - b * r[1]) / det;
      delta[1] = (a * r[1] - b * r[0]) / det;
    }
    double step = 1.0;
    Point trial{};
    LocalJet trial_jet;
    double trial_value = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 30; ++halving) {
      for (int a = 0; a < dim; ++a) trial[a] = s[a] + step * delta[a];
      trial_jet = p.evaluate(trial);
      trial_value = objective(trial_jet, trial);
      if (trial_value >= best - 1e-15 * (1.0 + std::abs(best))) break;
      step *= 0.5;
    }
    s = trial;
    jet = trial_jet;
    best = std::max(best, trial_value);
    const double size = std::hypot(delta[0], delta[1]) * step;
    if (size < 1e-14) break;
  }
  return objective(jet, s);
}

ScalarField conjugate_periodic_part(const ScalarField& p, const std::string& context) {
  const auto& grid = p.grid();
  require_standard(grid, context);
  if (margin_of(p, 1.0) <= 0.0) {
    throw std::domain_error(context + ": input is not strictly convex at grid resolution");
  }
  const int n = grid.points_per_axis();
  const int dim = grid.dim();
  const double h = grid.spacing();

  double max_slope = 0.0;
  for (int a = 0; a < dim; ++a) max_slope = std::max(max_slope, partial_derivative(p, {a}).max_abs());
  const int pad = static_cast<int>(std::ceil(max_slope / h)) + 3;
  const int ext = n + 2 * pad;

  std::vector<double> s(ext);
  for (int i = 0; i < ext; ++i) s[i] = -1.0 + (i - pad) * h;
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = grid.coordinate(j);
  auto wrap = [n](int i) { return ((i % n) + n) % n; };

  TrigInterpolant interp(p);
  std::vector<double> out(grid.size());

  if (dim == 1) {
    std::vector<double> v(ext);
    for (int i = 0; i < ext; ++i) v[i] = p[wrap(i - pad)] + 0.5 * s[i] * s[i];
    const auto conj = discrete_conjugate(s, v, x);
    for (int j = 0; j < n; ++j) {
      const double u = polish(interp, {x[j], 0.0}, {s[conj.argmax[j]], 0.0}, 1);
      out[j] = u - 0.5 * x[j] * x[j];
    }
  } else {
    // First pass over axis 0 for every extended s1 row.
    std::vector<std::vector<double>> g1(ext, std::vector<double>(n));
    std::vector<std::vector<int>> a0(ext, std::vector<int>(n));
    std::vector<double> v(ext);
    for (int i1 = 0; i1 < ext; ++i1) {
      for (int i0 = 0; i0 < ext; ++i0) {
        v[i0] = p[grid.flat_index(wrap(i0 - pad), wrap(i1 - pad))] +
                0.5 * (s[i0] * s[i0] + s[i1] * s[i1]);
      }
      auto conj = discrete_conjugate(s, v, x);
      g1[i1] = std::move(conj.value);
      a0[i1] = std::move(conj.argmax);
    }
    // Second pass over axis 1: the negated partial conjugate is convex in s1.
    std::vector<double> w(ext);
    for (int j0 = 0; j0 < n; ++j0) {
      for (int i1 = 0; i1 < ext; ++i1) w[i1] = -g1[i1][j0];
      const auto conj = discrete_conjugate(s, w, x);
      for (int j1 = 0; j1 < n; ++j1) {
        const int i1 = conj.argmax[j1];
        const Point start{s[a0[i1][j0]], s[i1]};
        const double u = polish(interp, {x[j0], x[j1]}, start, 2);
        out[grid.flat_index(j0, j1)] = u - 0.5 * (x[j0] * x[j0] + x[j1] * x[j1]);
      }
    }
  }
  return mean_zero(ScalarField(grid, std::move(out)));
}

double conjugate_total_at(const ScalarField& p, const Point& x, const std::string& context) {
  const auto& grid = p.grid();
  require_standard(grid, context);
  const int n = grid.points_per_axis();
  const int dim = grid.dim();
  const double h = grid.spacing();
  double max_slope = 0.0;
  for (int a = 0; a < dim; ++a) max_slope = std::max(max_slope, partial_derivative(p, {a}).max_abs());
  const int reach = static_cast<int>(std::ceil(max_slope / h)) + 3;
  auto wrap = [n](int i) { return ((i % n) + n) % n; };

  // Discrete search over nodes near x, then Newton on the interpolant.
  std::array<int, 2> centre{0, 0};
  for (int a = 0; a < dim; ++a) centre[a] = static_cast<int>(std::floor((x[a] + 1.0) / h));
  double best = -std::numeric_limits<double>::infinity();
  Point start{0.0, 0.0};
  const int span1 = dim == 2 ? reach : 0;
  for (int d0 = -reach; d0 <= reach; ++d0) {
    for (int d1 = -span1; d1 <= span1; ++d1) {
      const int i0 = centre[0] + d0;
      const int i1 = centre[1] + d1;
      const Point si{-1.0 + i0 * h, dim == 2 ? -1.0 + i1 * h : 0.0};
      const double pv = dim == 1 ? p[wrap(i0)] : p[grid.flat_index(wrap(i0), wrap(i1))];
      double val = -pv;
      for (int a = 0; a < dim; ++a) val += x[a] * si[a] - 0.5 * si[a] * si[a];
      if (val > best) {
        best = val;
        start = si;
      }
    }
  }
  return polish(TrigInterpolant(p), x, start, dim);
}

}  // namespace

bool SymplecticPotential::is_standard() const {
  return quadratic == 1.0 && slope[0] == 0.0 && slope[1] == 0.0 && grid().half_length() == 1.0;
}

SymplecticPotential SymplecticPotential::flat(const PeriodicGrid& grid) {
  return SymplecticPotential{ScalarField::zeros(grid)};
}

KahlerPotential KahlerPotential::flat(const PeriodicGrid& grid) {
  return KahlerPotential{ScalarField::zeros(grid)};
}

std::array<ScalarField, 3> periodic_hessian(const ScalarField& f) {
  const auto& grid = f.grid();
  auto& ft = fourier_for(grid);
  const auto spec = ft.forward(f.values());
  if (grid.dim() == 1) {
    return {ScalarField(grid, spectral_derivative(ft, spec, {2, 0})), ScalarField::zeros(grid),
            ScalarField::zeros(grid)};
  }
  return {ScalarField(grid, spectral_derivative(ft, spec, {2, 0})),
          ScalarField(grid, spectral_derivative(ft, spec, {1, 1})),
          ScalarField(grid, spectral_derivative(ft, spec, {0, 2}))};
}

double convexity_margin(const SymplecticPotential& pot) {
  return margin_of(pot.periodic, pot.quadratic);
}

double convexity_margin(const KahlerPotential& pot) { return margin_of(pot.periodic, 1.0); }

SymplecticPotential legendre_transform(const KahlerPotential& pot) {
  return SymplecticPotential{conjugate_periodic_part(pot.periodic, "legendre_transform")};
}

KahlerPotential legendre_transform(const SymplecticPotential& pot) {
  if (!pot.is_standard()) {
    throw std::invalid_argument("legendre_transform: rescaled potentials are not supported");
  }
  return KahlerPotential{conjugate_periodic_part(pot.periodic, "legendre_transform")};
}

double conjugate_value(const KahlerPotential& pot, const Point& x) {
  return conjugate_total_at(pot.periodic, x, "conjugate_value");
}

double conjugate_value(const SymplecticPotential& pot, const Point& xi) {
  if (!pot.is_standard()) {
    throw std::invalid_argument("conjugate_value: rescaled potentials are not supported");
  }
  return conjugate_total_at(pot.periodic, xi, "conjugate_value");
}

ScalarField mean_zero(ScalarField f) {
  const double m = f.mean();
  return std::move(f.shift(-m));
}

double mabuchi_distance(const SymplecticPotential& a, const SymplecticPotential& b) {
  require_same_grid(a.grid(), b.grid(), "mabuchi_distance");
  if (a.quadratic != b.quadratic || a.slope != b.slope) {
    throw std::invalid_argument("mabuchi_distance: potentials differ in their quadratic part");
  }
  ScalarField diff = a.periodic - b.periodic;
  std::vector<double> sq(diff.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = diff[i] * diff[i];
  return std::sqrt(integrate(ScalarField(diff.grid(), std::move(sq))));
}

}  // namespace calabi
