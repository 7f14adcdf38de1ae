#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace calabi {

/// Coordinates of a grid node. Components beyond the grid dimension are zero.
using Point = std::array<double, 2>;

/// Smallest Hessian eigenvalue accepted as strictly convex.
inline constexpr double kConvexityThreshold = 1e-10;

/// Uniform periodic grid on [-L, L)^n with N points per axis.
///
/// The default half length L = 1 gives the fundamental domain [-1, 1)^n of the
/// torus. Other half lengths only arise for blow-up rescalings, where the
/// sampled function is periodic with period 2L.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int points_per_axis, double half_length = 1.0);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double half_length() const { return half_length_; }
  double spacing() const { return 2.0 * half_length_ / n_; }
  std::size_t size() const { return size_; }

  double coordinate(int i) const { return -half_length_ + i * spacing(); }
  Point point(std::size_t flat) const;
  std::size_t flat_index(int i0, int i1 = 0) const {
    return dim_ == 1 ? static_cast<std::size_t>(i0)
                     : static_cast<std::size_t>(i0) * n_ + i1;
  }
  /// Per-axis node indices of a flat index (second entry is 0 for n = 1).
  std::array<int, 2> multi_index(std::size_t flat) const;

  bool operator==(const PeriodicGrid& other) const = default;

 private:
  int dim_;
  int n_;
  double half_length_;
  std::size_t size_;
};

/// Real samples on a PeriodicGrid in row-major order (first axis slowest).
class ScalarField {
 public:
  /// Throws std::invalid_argument on a size mismatch or a non-finite entry.
  ScalarField(PeriodicGrid grid, std::vector<double> values);

  static ScalarField constant(const PeriodicGrid& grid, double value);
  static ScalarField zeros(const PeriodicGrid& grid) { return constant(grid, 0.0); }

  const PeriodicGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_abs() const;
  double mean() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  /// Adds a constant to every sample.
  ScalarField& shift(double c);

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Samples fn at every node. A non-finite value is rejected with a message
/// naming the offending node.
ScalarField sample(const std::function<double(const Point&)>& fn, const PeriodicGrid& grid);

/// Fourier collocation derivative along the listed axes, e.g. {0, 0, 1} is
/// d^3/dx^2 dy. Total order must be between 1 and 4.
ScalarField partial_derivative(const ScalarField& field, std::span<const int> axes);
ScalarField partial_derivative(const ScalarField& field, std::initializer_list<int> axes);

/// Periodic trapezoid rule: h^n times the sum of the samples.
double integrate(const ScalarField& field);

/// Throws std::invalid_argument when the two grids differ.
void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const std::string& context);

}  // namespace calabi
