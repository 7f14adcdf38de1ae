#include "calabi/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace calabi {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SpectralLayout::SpectralLayout(const PeriodicGrid& grid) : grid_(grid) {
  const int n = grid.points_per_axis();
  const int half = n / 2 + 1;
  const double scale = std::numbers::pi / grid.half_length();
  if (grid.dim() == 1) {
    for (int j = 0; j < half; ++j) {
      modes_.push_back({j, 0});
      k_.push_back({scale * j, 0.0});
      weight_.push_back((j == 0 || j == n / 2) ? 1.0 : 2.0);
    }
  } else {
    for (int j0 = 0; j0 < n; ++j0) {
      const int m0 = j0 <= n / 2 ? j0 : j0 - n;
      for (int j1 = 0; j1 < half; ++j1) {
        modes_.push_back({m0, j1});
        k_.push_back({scale * m0, scale * j1});
        weight_.push_back((j1 == 0 || j1 == n / 2) ? 1.0 : 2.0);
      }
    }
  }
}

bool SpectralLayout::nyquist(std::size_t s, int axis) const {
  return std::abs(modes_[s][axis]) == grid_.points_per_axis() / 2;
}

double SpectralLayout::k_squared(std::size_t s) const {
  return k_[s][0] * k_[s][0] + k_[s][1] * k_[s][1];
}

Complex SpectralLayout::derivative_multiplier(std::size_t s, const std::array<int, 2>& orders) const {
  Complex m{1.0, 0.0};
  for (int a = 0; a < grid_.dim(); ++a) {
    const int p = orders[a];
    if (p == 0) continue;
    if (p % 2 == 1 && nyquist(s, a)) return {0.0, 0.0};
    const Complex ik{0.0, k_[s][a]};
    for (int q = 0; q < p; ++q) m *= ik;
  }
  return m;
}

const std::vector<Complex>& SpectralLayout::derivative_multipliers(const std::array<int, 2>& orders) const {
  auto it = multiplier_cache_.find(orders);
  if (it == multiplier_cache_.end()) {
    std::vector<Complex> m(size());
    for (std::size_t s = 0; s < m.size(); ++s) m[s] = derivative_multiplier(s, orders);
    it = multiplier_cache_.emplace(orders, std::move(m)).first;
  }
  return it->second;
}

struct FourierTransform::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

FourierTransform::FourierTransform(const PeriodicGrid& grid)
    : layout_(grid), plans_(std::make_unique<Plans>()) {
  const int n = grid.points_per_axis();
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->real = fftw_alloc_real(grid.size());
  plans_->spec = fftw_alloc_complex(layout_.size());
  if (grid.dim() == 1) {
    plans_->fwd = fftw_plan_dft_r2c_1d(n, plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->inv = fftw_plan_dft_c2r_1d(n, plans_->spec, plans_->real, FFTW_ESTIMATE);
  } else {
    plans_->fwd = fftw_plan_dft_r2c_2d(n, n, plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->inv = fftw_plan_dft_c2r_2d(n, n, plans_->spec, plans_->real, FFTW_ESTIMATE);
  }
  if (!plans_->fwd || !plans_->inv) throw std::runtime_error("FourierTransform: planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plans_->fwd);
  fftw_destroy_plan(plans_->inv);
  fftw_free(plans_->real);
  fftw_free(plans_->spec);
}

void FourierTransform::forward(std::span<const double> in, std::span<Complex> out) {
  const auto& grid = layout_.grid();
  if (in.size() != grid.size() || out.size() != layout_.size()) {
    throw std::invalid_argument("FourierTransform::forward: size mismatch");
  }
  std::copy(in.begin(), in.end(), plans_->real);
  fftw_execute(plans_->fwd);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = {plans_->spec[s][0], plans_->spec[s][1]};
}

void FourierTransform::inverse(std::span<const Complex> in, std::span<double> out) {
  const auto& grid = layout_.grid();
  if (out.size() != grid.size() || in.size() != layout_.size()) {
    throw std::invalid_argument("FourierTransform::inverse: size mismatch");
  }
  for (std::size_t s = 0; s < in.size(); ++s) {
    plans_->spec[s][0] = in[s].real();
    plans_->spec[s][1] = in[s].imag();
  }
  fftw_execute(plans_->inv);
  const double norm = 1.0 / static_cast<double>(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = plans_->real[i] * norm;
}

void FourierTransform::inverse(std::span<const Complex> in, std::span<const Complex> multiplier,
                               std::span<double> out) {
  const auto& grid = layout_.grid();
  if (out.size() != grid.size() || in.size() != layout_.size() || multiplier.size() != in.size()) {
    throw std::invalid_argument("FourierTransform::inverse: size mismatch");
  }
  for (std::size_t s = 0; s < in.size(); ++s) {
    const Complex v = in[s] * multiplier[s];
    plans_->spec[s][0] = v.real();
    plans_->spec[s][1] = v.imag();
  }
  fftw_execute(plans_->inv);
  const double norm = 1.0 / static_cast<double>(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = plans_->real[i] * norm;
}

std::vector<Complex> FourierTransform::forward(std::span<const double> in) {
  std::vector<Complex> out(layout_.size());
  forward(in, out);
  return out;
}

std::vector<double> FourierTransform::inverse(std::span<const Complex> in) {
  std::vector<double> out(layout_.grid().size());
  inverse(in, out);
  return out;
}

FourierTransform& fourier_for(const PeriodicGrid& grid) {
  using Key = std::tuple<int, int, double>;
  thread_local std::map<Key, std::unique_ptr<FourierTransform>> cache;
  const Key key{grid.dim(), grid.points_per_axis(), grid.half_length()};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<FourierTransform>(grid)).first;
  }
  return *it->second;
}

std::array<int, 2> axis_orders(std::span<const int> axes, int dim) {
  std::array<int, 2> orders{0, 0};
  for (int a : axes) {
    if (a < 0 || a >= dim) {
      throw std::invalid_argument("partial_derivative: axis " + std::to_string(a) +
                                  " out of range for dimension " + std::to_string(dim));
    }
    ++orders[a];
  }
  return orders;
}

std::vector<double> spectral_derivative(FourierTransform& ft, std::span<const Complex> spectrum,
                                        const std::array<int, 2>& orders) {
  const auto& layout = ft.layout();
  std::vector<double> out(layout.grid().size());
  ft.inverse(spectrum, layout.derivative_multipliers(orders), out);
  return out;
}

TrigInterpolant::TrigInterpolant(const ScalarField& field)
    : grid_(field.grid()), half_(field.grid().points_per_axis() / 2) {
  const int n = grid_.points_per_axis();
  const int width = n + 1;
  auto& ft = fourier_for(grid_);
  const auto spec = ft.forward(field.values());
  const double norm = 1.0 / static_cast<double>(grid_.size());

  // Full-spectrum coefficient for signed modes, recovered from the half
  // spectrum by Hermitian symmetry.
  auto full = [&](int m0, int m1) -> Complex {
    if (grid_.dim() == 1) {
      const int j = ((m0 % n) + n) % n;
      if (j <= n / 2) return spec[j];
      return std::conj(spec[n - j]);
    }
    int j0 = ((m0 % n) + n) % n;
    int j1 = ((m1 % n) + n) % n;
    if (j1 <= n / 2) return spec[static_cast<std::size_t>(j0) * (n / 2 + 1) + j1];
    j0 = (n - j0) % n;
    j1 = n - j1;
    return std::conj(spec[static_cast<std::size_t>(j0) * (n / 2 + 1) + j1]);
  };
  auto weight = [&](int m) { return std::abs(m) == half_ ? 0.5 : 1.0; };

  if (grid_.dim() == 1) {
    coeffs_.resize(width);
    for (int m = -half_; m <= half_; ++m) coeffs_[m + half_] = weight(m) * norm * full(m, 0);
  } else {
    coeffs_.resize(static_cast<std::size_t>(width) * width);
    for (int m0 = -half_; m0 <= half_; ++m0) {
      for (int m1 = -half_; m1 <= half_; ++m1) {
        coeffs_[static_cast<std::size_t>(m0 + half_) * width + (m1 + half_)] =
            weight(m0) * weight(m1) * norm * full(m0, m1);
      }
    }
  }
}

LocalJet TrigInterpolant::evaluate(const Point& x) const {
  const int width = 2 * half_ + 1;
  const double L = grid_.half_length();
  const double scale = std::numbers::pi / L;
  LocalJet jet;

  auto phases = [&](double xa, std::vector<Complex>& e, std::vector<double>& k) {
    e.resize(width);
    k.resize(width);
    const double theta = scale * (xa + L);
    for (int m = -half_; m <= half_; ++m) {
      e[m + half_] = std::polar(1.0, theta * m);
      k[m + half_] = scale * m;
    }
  };

  std::vector<Complex> e0, e1;
  std::vector<double> k0, k1;
  phases(x[0], e0, k0);
  const Complex i{0.0, 1.0};

  if (grid_.dim() == 1) {
    Complex v{}, g{}, h{};
    for (int a = 0; a < width; ++a) {
      const Complex t = coeffs_[a] * e0[a];
      v += t;
      g += i * k0[a] * t;
      h -= k0[a] * k0[a] * t;
    }
    jet.value = v.real();
    jet.gradient = {g.real(), 0.0};
    jet.hessian = {h.real(), 0.0, 0.0};
    return jet;
  }

  phases(x[1], e1, k1);
  Complex v{}, g0{}, g1{}, h00{}, h01{}, h11{};
  for (int a = 0; a < width; ++a) {
    Complex r{}, r1{}, r11{};
    const Complex* row = &coeffs_[static_cast<std::size_t>(a) * width];
    for (int b = 0; b < width; ++b) {
      const Complex t = row[b] * e1[b];
      r += t;
      r1 += k1[b] * t;
      r11 += k1[b] * k1[b] * t;
    }
    // r1 carries a missing factor i, r11 a missing factor -1.
    const Complex ea = e0[a];
    const double ka = k0[a];
    v += ea * r;
    g0 += i * ka * ea * r;
    g1 += i * ea * r1;
    h00 -= ka * ka * ea * r;
    h01 -= ka * ea * r1;
    h11 -= ea * r11;
  }
  jet.value = v.real();
  jet.gradient = {g0.real(), g1.real()};
  jet.hessian = {h00.real(), h01.real(), h11.real()};
  return jet;
}

}  // namespace calabi
