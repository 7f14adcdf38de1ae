#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "calabi/grid.hpp"

namespace calabi {

using Complex = std::complex<double>;

/// Half-spectrum layout of a real transform on a PeriodicGrid.
///
/// The last axis is stored for modes 0..N/2, the first axis (2-d only) for all
/// N modes in FFT order. mode(s, a) is the signed integer frequency along axis
/// a and wavenumber(s, a) = pi * mode / L.
class SpectralLayout {
 public:
  explicit SpectralLayout(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return modes_.size(); }
  int mode(std::size_t s, int axis) const { return modes_[s][axis]; }
  double wavenumber(std::size_t s, int axis) const { return k_[s][axis]; }
  bool nyquist(std::size_t s, int axis) const;
  /// |k|^2 summed over the grid axes.
  double k_squared(std::size_t s) const;
  /// Multiplicity of a half-spectrum entry in a full-spectrum sum (1 or 2).
  double parseval_weight(std::size_t s) const { return weight_[s]; }

  /// prod_a (i k_a)^{orders[a]}, with the Nyquist mode of an axis removed
  /// whenever that axis carries an odd order.
  Complex derivative_multiplier(std::size_t s, const std::array<int, 2>& orders) const;
  /// derivative_multiplier over the whole half spectrum, computed once per
  /// order pair.
  const std::vector<Complex>& derivative_multipliers(const std::array<int, 2>& orders) const;

 private:
  PeriodicGrid grid_;
  std::vector<std::array<int, 2>> modes_;
  std::vector<std::array<double, 2>> k_;
  std::vector<double> weight_;
  mutable std::map<std::array<int, 2>, std::vector<Complex>> multiplier_cache_;
};

/// FFTW-backed real transforms for one grid. Instances are not safe for
/// concurrent use; fourier_for() hands out one instance per thread and grid.
class FourierTransform {
 public:
  explicit FourierTransform(const PeriodicGrid& grid);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const SpectralLayout& layout() const { return layout_; }
  std::size_t spectrum_size() const { return layout_.size(); }

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, std::span<Complex> out);
  /// Inverse transform including the 1/N^n normalization.
  void inverse(std::span<const Complex> in, std::span<double> out);
  /// inverse() of in[s] * multiplier[s] without a temporary spectrum.
  void inverse(std::span<const Complex> in, std::span<const Complex> multiplier, std::span<double> out);

  std::vector<Complex> forward(std::span<const double> in);
  std::vector<double> inverse(std::span<const Complex> in);

 private:
  struct Plans;
  SpectralLayout layout_;
  std::unique_ptr<Plans> plans_;
};

FourierTransform& fourier_for(const PeriodicGrid& grid);

/// Orders per axis of a list of derivative axes ({0,0,1} -> {2,1}).
std::array<int, 2> axis_orders(std::span<const int> axes, int dim);

/// Applies a derivative multiplier to a spectrum and transforms back.
std::vector<double> spectral_derivative(FourierTransform& ft, std::span<const Complex> spectrum,
                                        const std::array<int, 2>& orders);

/// Value, gradient, and Hessian of a field's trigonometric interpolant.
struct LocalJet {
  double value = 0.0;
  std::array<double, 2> gradient{};
  std::array<double, 3> hessian{};  // xx, xy, yy
};

/// Symmetric trigonometric interpolant of a sampled periodic field, evaluable
/// at arbitrary points (the periodic extension is implied).
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const ScalarField& field);

  const PeriodicGrid& grid() const { return grid_; }
  LocalJet evaluate(const Point& x) const;
  double value(const Point& x) const { return evaluate(x).value; }

 private:
  PeriodicGrid grid_;
  int half_;
  std::vector<Complex> coeffs_;  // (N+1)^n entries, modes -N/2..N/2 per axis
};

}  // namespace calabi
