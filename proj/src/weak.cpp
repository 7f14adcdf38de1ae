#include "calabi/weak.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "calabi/spectral.hpp"

namespace calabi {

namespace {

using boost::math::quadrature::gauss;

// Composite Gauss-Legendre on [0, 1] with enough panels to resolve
// oscillation at frequency kappa. The bump is flat to all orders at r = 1.
template <typename F>
double radial_integral(F&& fn, double kappa = 0.0) {
  const int panels = 8 + static_cast<int>(std::ceil(kappa / 2.0));
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    sum += gauss<double, 20>::integrate(fn, static_cast<double>(p) / panels, static_cast<double>(p + 1) / panels);
  }
  return sum;
}

double multiplier_integral(double kappa, int dim) {
  if (dim == 1) {
    return 2.0 * radial_integral([kappa](double y) { return bump_profile(y * y) * std::cos(kappa * y); }, kappa);
  }
  return 2.0 * std::numbers::pi *
         radial_integral([kappa](double r) { return bump_profile(r * r) * ::j0(kappa * r) * r; }, kappa);
}

double log_det(double xx, double xy, double yy, int dim) {
  return dim == 1 ? std::log(xx) : std::log(xx * yy - xy * xy);
}

}  // namespace

void MollifierSpec::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("mollifier radius h must be positive");
  if (h > kMaxMollifierRadius) {
    throw std::invalid_argument("mollifier radius h must satisfy h <= 0.5 (got " + std::to_string(h) + ")");
  }
}

double bump_profile(double r_squared) {
  if (r_squared >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r_squared));
}

double bump_normalization(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("bump_normalization: dim must be 1 or 2");
  static const double z1 = multiplier_integral(0.0, 1);
  static const double z2 = multiplier_integral(0.0, 2);
  return dim == 1 ? z1 : z2;
}

double bump_multiplier(double kappa, int dim) {
  const double z = bump_normalization(dim);
  return multiplier_integral(kappa, dim) / z;
}

ScalarField mollify(const ScalarField& f, const MollifierSpec& spec) {
  spec.validate();
  const auto& grid = f.grid();
  auto& ft = fourier_for(grid);
  const auto& layout = ft.layout();
  auto hat = ft.forward(f.values());
  const double z = bump_normalization(grid.dim());
  const double scale = std::numbers::pi / grid.half_length();

  // The multiplier depends on |m|^2 only.
  std::map<long, double> cache;
  for (std::size_t s = 0; s < hat.size(); ++s) {
    const long m0 = layout.mode(s, 0);
    const long m1 = grid.dim() == 2 ? layout.mode(s, 1) : 0;
    const long key = m0 * m0 + m1 * m1;
    auto it = cache.find(key);
    if (it == cache.end()) {
      const double kappa = spec.h * scale * std::sqrt(static_cast<double>(key));
      it = cache.emplace(key, multiplier_integral(kappa, grid.dim()) / z).first;
    }
    hat[s] *= it->second;
  }
  return ScalarField(grid, ft.inverse(hat));
}

int ApproxSchedule::at(int m) const {
  if (m < 1 || m > m_max()) {
    throw std::out_of_range("ApproxSchedule: m = " + std::to_string(m) + " outside 1.." +
                            std::to_string(m_max()));
  }
  return r[m - 1];
}

ApproxSchedule ApproxSchedule::identity(int m_max) {
  ApproxSchedule s;
  for (int m = 1; m <= m_max; ++m) {
    s.r.push_back(std::max(m, 2));
    s.resolved.push_back(true);
    s.mismatch.push_back(std::nan(""));
  }
  return s;
}

std::array<std::vector<double>, 3> WeakInput::nodal_hessian() const {
  const auto& grid = f.grid();
  const std::size_t size = grid.size();
  std::array<std::vector<double>, 3> out{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0),
                                         std::vector<double>(size, 0.0)};
  if (hessian) {
    for (std::size_t i = 0; i < size; ++i) {
      const auto h = hessian(grid.point(i));
      for (int c = 0; c < 3; ++c) out[c][i] = h[c];
    }
    return out;
  }
  const int n = grid.points_per_axis();
  const double h2 = grid.spacing() * grid.spacing();
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) out[0][i] = (f[wrap(i + 1)] - 2.0 * f[i] + f[wrap(i - 1)]) / h2;
    return out;
  }
  auto at = [&](int i, int j) { return f[grid.flat_index(wrap(i), wrap(j))]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t k = grid.flat_index(i, j);
      out[0][k] = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / h2;
      out[2][k] = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / h2;
      out[1][k] = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * h2);
    }
  }
  return out;
}

double quartic_value(const Point& x, int dim) {
  double v = 0.0;
  for (int a = 0; a < dim; ++a) v += 0.25 * std::pow(x[a], 4) - 0.5 * x[a] * x[a];
  return v;
}

WeakInput quartic_example(const PeriodicGrid& grid) {
  const int dim = grid.dim();
  if (grid.half_length() != 1.0) {
    throw std::invalid_argument("quartic_example: requires the standard fundamental domain");
  }
  WeakInput input{sample([dim](const Point& x) { return quartic_value(x, dim); }, grid),
                  [dim](const Point& x) -> std::array<double, 3> {
                    return {3.0 * x[0] * x[0] - 1.0, 0.0, dim == 2 ? 3.0 * x[1] * x[1] - 1.0 : 0.0};
                  },
                  "closed-form"};
  return input;
}

WeakInput weak_from_field(ScalarField f) {
  return WeakInput{std::move(f), nullptr, "second-differences"};
}

SymplecticPotential approx_potential(const ScalarField& f, int m, const ApproxSchedule& schedule) {
  if (m < 1) throw std::invalid_argument("approx_potential: m must be >= 1");
  const int r = schedule.at(m);
  if (r < m) throw std::invalid_argument("approx_potential: schedule violates r(m) >= m");
  MollifierSpec spec{1.0 / r};
  ScalarField smooth = mollify(f, spec);
  smooth *= static_cast<double>(m) / (m + 1);
  return SymplecticPotential{std::move(smooth)};
}

double log_det_mismatch(const WeakInput& input, int m, int j) {
  if (m < 1 || j < 1) throw std::invalid_argument("log_det_mismatch: m and j must be >= 1");
  const auto& grid = input.f.grid();
  const int dim = grid.dim();
  const double c = static_cast<double>(m + 1) / m;
  const auto smooth = periodic_hessian(mollify(input.f, MollifierSpec{1.0 / j}));
  const auto weak = input.nodal_hessian();
  std::vector<double> diff(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = log_det(smooth[0][i] + c, smooth[1][i], smooth[2][i] + c, dim);
    const double b = log_det(weak[0][i] + c, weak[1][i], weak[2][i] + c, dim);
    diff[i] = std::abs(a - b);
    if (!std::isfinite(diff[i])) {
      throw std::domain_error("log_det_mismatch: degenerate Hessian at node " + std::to_string(i));
    }
  }
  return integrate(ScalarField(grid, std::move(diff)));
}

ApproxSchedule choose_schedule(const WeakInput& input, int m_max) {
  if (m_max < 1) throw std::invalid_argument("choose_schedule: m_max must be >= 1");
  ApproxSchedule schedule;
  for (int m = 1; m <= m_max; ++m) {
    const double target = 1.0 / m;
    const int first = std::max(m, 2);
    const int last = 64 * m;
    int chosen = last;
    bool found = false;
    double mismatch = std::nan("");
    for (int j = first; j <= last; ++j) {
      mismatch = log_det_mismatch(input, m, j);
      if (mismatch < target) {
        chosen = j;
        found = true;
        break;
      }
    }
    schedule.r.push_back(chosen);
    schedule.resolved.push_back(found);
    schedule.mismatch.push_back(mismatch);
  }
  return schedule;
}

}  // namespace calabi
