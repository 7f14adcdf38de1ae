#include "calabi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "calabi/spectral.hpp"

namespace calabi {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

PeriodicGrid::PeriodicGrid(int dim, int points_per_axis, double half_length)
    : dim_(dim), n_(points_per_axis), half_length_(half_length) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("PeriodicGrid: dim must be 1 or 2, got " + std::to_string(dim));
  }
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis)) {
    throw std::invalid_argument("PeriodicGrid: N must be a power of two >= 8, got " +
                                std::to_string(points_per_axis));
  }
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw std::invalid_argument("PeriodicGrid: half length must be positive");
  }
  size_ = dim == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
}

Point PeriodicGrid::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point p{coordinate(idx[0]), 0.0};
  if (dim_ == 2) p[1] = coordinate(idx[1]);
  return p;
}

std::array<int, 2> PeriodicGrid::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / n_), static_cast<int>(flat % n_)};
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const std::string& context) {
  if (!(a == b)) throw std::invalid_argument(context + ": grid mismatch");
}

ScalarField::ScalarField(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("ScalarField: expected " + std::to_string(grid_.size()) +
                                " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("ScalarField: non-finite value at flat index " +
                                  std::to_string(i));
    }
  }
}

ScalarField ScalarField::constant(const PeriodicGrid& grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.size(), value));
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::shift(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField sample(const std::function<double(const Point&)>& fn, const PeriodicGrid& grid) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    const double v = fn(x);
    if (!std::isfinite(v)) {
      const auto idx = grid.multi_index(i);
      std::ostringstream msg;
      msg << "sample: non-finite value at node (" << idx[0];
      if (grid.dim() == 2) msg << ", " << idx[1];
      msg << ") x = (" << x[0];
      if (grid.dim() == 2) msg << ", " << x[1];
      msg << ")";
      throw std::domain_error(msg.str());
    }
    values[i] = v;
  }
  return ScalarField(grid, std::move(values));
}

ScalarField partial_derivative(const ScalarField& field, std::span<const int> axes) {
  const auto& grid = field.grid();
  if (axes.empty() || axes.size() > 4) {
    throw std::invalid_argument("partial_derivative: order must be between 1 and 4");
  }
  const auto orders = axis_orders(axes, grid.dim());
  auto& ft = fourier_for(grid);
  const auto spectrum = ft.forward(field.values());
  return ScalarField(grid, spectral_derivative(ft, spectrum, orders));
}

ScalarField partial_derivative(const ScalarField& field, std::initializer_list<int> axes) {
  return partial_derivative(field, std::span<const int>(axes.begin(), axes.size()));
}

double integrate(const ScalarField& field) {
  const auto& g = field.grid();
  const double cell = std::pow(g.spacing(), g.dim());
  return cell * std::accumulate(field.values().begin(), field.values().end(), 0.0);
}

}  // namespace calabi
