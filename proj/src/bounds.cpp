#include "calabi/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "calabi/geometry.hpp"
#include "calabi/spectral.hpp"

namespace calabi {

long prop31_exponent(double M, double C, int n) {
  const double np1 = n + 1.0;
  const double denom = 4.0 * std::pow(std::pow(2.0, np1 / 2.0) - 1.0, 2);
  const double bracket = M * np1 * np1 * std::pow(2.0, np1) * C / denom;
  return static_cast<long>(std::floor(bracket)) + 1;
}

std::vector<double> log_spaced(double x_max, int count) {
  if (!(x_max > 1.0) || count < 2) throw std::invalid_argument("log_spaced: need x_max > 1 and count >= 2");
  std::vector<double> x(count);
  const double step = std::log(x_max) / (count - 1);
  for (int i = 0; i < count; ++i) x[i] = std::exp(step * i);
  x.front() = 1.0;
  x.back() = x_max;
  return x;
}

Prop31Result prop31_search(std::span<const double> x, std::span<const double> f, double M, double C,
                           int n) {
  if (x.size() != f.size() || x.size() < 3) {
    throw std::invalid_argument("prop31_search: need at least 3 matching samples");
  }
  if (std::abs(x.front() - 1.0) > 1e-12) throw std::invalid_argument("prop31_search: samples must start at x = 1");
  if (!(M > 0.0) || !(C > 0.0) || n < 1) throw std::invalid_argument("prop31_search: M, C > 0 and n >= 1");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(f[i] > 0.0)) throw std::invalid_argument("prop31_search: f must be positive");
    if (i > 0 && !(x[i] > x[i - 1])) throw std::invalid_argument("prop31_search: x must increase");
  }

  Prop31Result result;
  result.ceiling = std::ldexp(1.0, static_cast<int>(prop31_exponent(M, C, n)));

  for (std::size_t i = 1; i < x.size(); ++i) {
    result.inverse_integral += 0.5 * (x[i] - x[i - 1]) * (1.0 / f[i] + 1.0 / f[i - 1]);
  }
  const std::size_t last = x.size() - 1;
  const double p = std::log(f[last] / f[last - 1]) / std::log(x[last] / x[last - 1]);
  result.tail_estimate = p > 1.0 ? x[last] / ((p - 1.0) * f[last]) : std::numeric_limits<double>::infinity();
  const double total = result.inverse_integral + result.tail_estimate;
  if (!(total < M)) {
    throw std::invalid_argument("prop31_search: precondition int_1^inf 1/f < M fails (estimate " +
                                std::to_string(total) + ", M = " + std::to_string(M) + ")");
  }

  double integral = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = f[i - 1] * std::pow(x[i - 1], n - 1);
    const double b = f[i] * std::pow(x[i], n - 1);
    integral += 0.5 * (x[i] - x[i - 1]) * (a + b);
    if (integral > C * std::pow(x[i], n + 1)) {
      result.x0 = x[i];
      break;
    }
  }
  if (result.x0) result.within_ceiling = *result.x0 <= result.ceiling;
  return result;
}

Prop31Result prop31_search(const std::function<double(double)>& fn, double x_max, int count, double M,
                           double C, int n) {
  const auto x = log_spaced(x_max, count);
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) f[i] = fn(x[i]);
  return prop31_search(x, f, M, C, n);
}

void SpecialConvexParams::validate() const {
  if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
  if (!(C0 > 0.0)) throw std::invalid_argument("C0 must be positive");
  if (!(CE > 0.0)) throw std::invalid_argument("CE must be positive");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
}

double unit_ball_volume(int n) { return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

double unit_sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0); }

ConstantsLedger constants(const SpecialConvexParams& params) {
  params.validate();
  const int n = params.n;
  const double M = params.M, C0 = params.C0, CE = params.CE;
  const double ball = unit_ball_volume(n);
  const double outer = std::pow(1.0 + 1.0 / C0, n);

  ConstantsLedger ledger;
  ledger.sphere_area = unit_sphere_area(n);
  // Volume sandwich B(0, R/M) in {u < R} in B(0, 1 + R/C0) for R >= 1.
  ledger.C1 = ball * std::max(std::pow(M, n), outer);
  // R^3 Vol + (C_E/4) R^4 Vol^{(n-1)/n}, both bounded through the outer ball.
  ledger.C2 = ball * outer * (1.0 + CE / 4.0);
  ledger.C3 = 4.0 * ledger.C2 * std::pow(2.0 * M, n + 1) / (C0 * C0 * ledger.sphere_area) + 1.0;
  ledger.exponent = prop31_exponent(M, ledger.C3, n);
  ledger.R0 = std::ldexp(2.0 * M, static_cast<int>(ledger.exponent));
  ledger.max_radius = 1.0 + ledger.R0 / C0;
  ledger.lambda = 2.0 + ledger.R0 / C0;
  return ledger;
}

std::string ledger_csv_header() { return "M,C0,CE,n,C1,C2,C3,R0,max_radius,lambda"; }

std::string ledger_csv_row(const SpecialConvexParams& p, const ConstantsLedger& l) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", p.M, p.C0, p.CE,
                p.n, l.C1, l.C2, l.C3, l.R0, l.max_radius, l.lambda);
  return buf;
}

std::string ledger_text(const SpecialConvexParams& p, const ConstantsLedger& l) {
  std::string out;
  char buf[128];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%-12s %.17g\n", key, v);
    out += buf;
  };
  line("M", p.M);
  line("C0", p.C0);
  line("CE", p.CE);
  line("n", p.n);
  line("sphere_area", l.sphere_area);
  line("C1", l.C1);
  line("C2", l.C2);
  line("C3", l.C3);
  line("R0", l.R0);
  line("max_radius", l.max_radius);
  line("lambda", l.lambda);
  return out;
}

double PolarSamples::radius_of(std::size_t k) const {
  const std::size_t i = k / static_cast<std::size_t>(direction_count);
  return (static_cast<double>(i) + 0.5) * radius / radial_count;
}

double PolarSamples::weight(std::size_t k) const {
  const double dr = radius / radial_count;
  if (dim == 1) return dr;
  return radius_of(k) * dr * 2.0 * std::numbers::pi / direction_count;
}

PolarSamples sample_polar(const ConvexModel& model, int dim, double radius, int radial_count,
                          int direction_count) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("sample_polar: dim must be 1 or 2");
  if (!(radius > 0.0) || radial_count < 1) throw std::invalid_argument("sample_polar: bad radial grid");
  PolarSamples out;
  out.dim = dim;
  out.radius = radius;
  out.radial_count = radial_count;
  out.direction_count = dim == 1 ? 2 : direction_count;
  if (out.direction_count < 1) throw std::invalid_argument("sample_polar: need at least one direction");
  out.origin = model({0.0, 0.0});
  out.nodes.reserve(static_cast<std::size_t>(radial_count) * out.direction_count);
  for (int i = 0; i < radial_count; ++i) {
    const double r = (i + 0.5) * radius / radial_count;
    for (int d = 0; d < out.direction_count; ++d) {
      Point x{};
      if (dim == 1) {
        x = {d == 0 ? r : -r, 0.0};
      } else {
        const double theta = 2.0 * std::numbers::pi * d / out.direction_count;
        x = {r * std::cos(theta), r * std::sin(theta)};
      }
      ConvexSample s = model(x);
      s.x = x;
      out.nodes.push_back(std::move(s));
    }
  }
  return out;
}

ConvexModel potential_model(const SymplecticPotential& pot, const Point& centre) {
  auto f = std::make_shared<TrigInterpolant>(pot.periodic);
  auto S = std::make_shared<TrigInterpolant>(abreu_scalar_curvature(pot));
  const double q = pot.quadratic;
  const auto b = pot.slope;
  const int dim = pot.grid().dim();
  return [f, S, q, b, dim, centre](const Point& x) {
    Point y{centre[0] + x[0], dim == 2 ? centre[1] + x[1] : 0.0};
    const LocalJet jet = f->evaluate(y);
    ConvexSample s;
    s.x = x;
    s.value = jet.value;
    std::array<double, 2> grad{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      s.value += 0.5 * q * y[a] * y[a] + b[a] * y[a];
      grad[a] = jet.gradient[a] + q * y[a] + b[a];
    }
    s.gradient = grad;
    s.hessian = std::array<double, 3>{jet.hessian[0] + q, dim == 2 ? jet.hessian[1] : 0.0,
                                      dim == 2 ? jet.hessian[2] + q : 0.0};
    s.abreu = -S->value(y);
    return s;
  };
}

namespace {

void require_complete(const ConvexSample& s) {
  if (!s.gradient || !s.hessian || !s.abreu) {
    throw std::invalid_argument("special_check: sample at (" + std::to_string(s.x[0]) + ", " +
                                std::to_string(s.x[1]) + ") is missing derivative data");
  }
}

double sample_min_eigenvalue(const ConvexSample& s, int dim) {
  const auto& h = *s.hessian;
  return dim == 1 ? h[0] : min_eigenvalue(h[0], h[1], h[2]);
}

double grad_norm(const ConvexSample& s, int dim) {
  const auto& g = *s.gradient;
  return dim == 1 ? std::abs(g[0]) : std::hypot(g[0], g[1]);
}

}  // namespace

PolarSamples normalize_gauge(const PolarSamples& samples) {
  require_complete(samples.origin);
  PolarSamples out = samples;
  const double u0 = samples.origin.value;
  const auto g0 = *samples.origin.gradient;
  auto fix = [&](ConvexSample& s) {
    s.value -= u0 + g0[0] * s.x[0] + g0[1] * s.x[1];
    if (s.gradient) {
      (*s.gradient)[0] -= g0[0];
      (*s.gradient)[1] -= g0[1];
    }
  };
  fix(out.origin);
  for (auto& s : out.nodes) fix(s);
  return out;
}

SpecialReport special_check(const PolarSamples& input, const SpecialConvexParams& params, bool renormalize) {
  params.validate();
  require_complete(input.origin);
  for (const auto& s : input.nodes) require_complete(s);
  const PolarSamples samples = renormalize ? normalize_gauge(input) : input;
  const int dim = samples.dim;

  SpecialReport r;
  r.min_eigenvalue = sample_min_eigenvalue(samples.origin, dim);
  r.max_gradient = grad_norm(samples.origin, dim);
  r.min_radial_derivative = std::numeric_limits<double>::infinity();
  double energy = 0.0;
  for (std::size_t k = 0; k < samples.nodes.size(); ++k) {
    const auto& s = samples.nodes[k];
    r.min_eigenvalue = std::min(r.min_eigenvalue, sample_min_eigenvalue(s, dim));
    r.max_gradient = std::max(r.max_gradient, grad_norm(s, dim));
    const double rad = samples.radius_of(k);
    if (rad >= 1.0) {
      const auto& g = *s.gradient;
      const double ur = (g[0] * s.x[0] + g[1] * s.x[1]) / rad;
      r.min_radial_derivative = std::min(r.min_radial_derivative, ur);
    }
    energy += std::pow(std::abs(*s.abreu), dim) * samples.weight(k);
  }
  r.curvature_energy = std::pow(energy, 1.0 / dim);
  const auto& g0 = *samples.origin.gradient;
  r.gauge_residual = std::max({std::abs(samples.origin.value), std::abs(g0[0]), std::abs(g0[1])});

  r.convex = r.min_eigenvalue > kConvexityThreshold;
  r.gauge = r.gauge_residual < 1e-8;
  r.gradient = r.max_gradient < params.M;
  r.radial = r.min_radial_derivative > params.C0;
  r.energy = r.curvature_energy < params.CE;
  return r;
}

InequalityResult inequality_check(const PolarSamples& input, double R, double CE) {
  if (!(R > 0.0)) throw std::invalid_argument("inequality_check: level R must be positive (empty level set)");
  require_complete(input.origin);
  for (const auto& s : input.nodes) require_complete(s);
  const PolarSamples samples = normalize_gauge(input);
  const int dim = samples.dim;
  const std::size_t ring = static_cast<std::size_t>(samples.radial_count - 1) * samples.direction_count;
  for (std::size_t k = ring; k < samples.nodes.size(); ++k) {
    if (samples.nodes[k].value < R) {
      throw std::invalid_argument("inequality_check: level set {u < R} reaches the sampled boundary");
    }
  }

  double cubic = 0.0, f2_norm = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < samples.nodes.size(); ++k) {
    const auto& s = samples.nodes[k];
    if (!(s.value < R)) continue;
    const double w = samples.weight(k);
    const double d = s.value - R;
    const double f = d * d;
    cubic -= dim * d * d * d * w;
    if (dim == 1) {
      f2_norm = std::max(f2_norm, f * f);
    } else {
      f2_norm += std::pow(f * f, 2.0) * w;  // ||f^2||_{L^2}^2
    }
    const auto& h = *s.hessian;
    const auto& g = *s.gradient;
    double quad;
    if (dim == 1) {
      quad = g[0] * g[0] / h[0];
    } else {
      const double det = h[0] * h[2] - h[1] * h[1];
      quad = (h[2] * g[0] * g[0] - 2.0 * h[1] * g[0] * g[1] + h[0] * g[1] * g[1]) / det;
    }
    rhs += quad * f * w;
  }
  if (dim == 2) f2_norm = std::sqrt(f2_norm);

  InequalityResult out;
  out.lhs = cubic + 0.25 * CE * f2_norm;
  out.rhs = rhs;
  out.ok = out.lhs >= out.rhs;
  return out;
}

}  // namespace calabi
