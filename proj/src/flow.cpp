#include "calabi/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace calabi {

namespace {

constexpr int kMaxHalvings = 20;
constexpr double kEnergyIncreaseTolerance = 1e-8;

// phi_1, phi_2, phi_3 of w <= 0.
struct Phi {
  double p1, p2, p3;
};

Phi phi_functions(double w) {
  if (std::abs(w) < 0.5) {
    // Taylor series: phi_k(w) = sum_j w^j / (j + k)!
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;
    double term1 = 1.0, term2 = 0.5, term3 = 1.0 / 6.0;
    for (int j = 0; j < 25; ++j) {
      p1 += term1;
      p2 += term2;
      p3 += term3;
      term1 *= w / (j + 2);
      term2 *= w / (j + 3);
      term3 *= w / (j + 4);
    }
    return {p1, p2, p3};
  }
  const double em1 = std::expm1(w);
  const double p1 = em1 / w;
  const double p2 = (em1 - w) / (w * w);
  const double p3 = (em1 - w - 0.5 * w * w) / (w * w * w);
  return {p1, p2, p3};
}

class Stepper {
 public:
  Stepper(const PeriodicGrid& grid, double quadratic)
      : ft_(fourier_for(grid)), layout_(ft_.layout()), q_(quadratic) {
    k4_.resize(layout_.size());
    for (std::size_t s = 0; s < layout_.size(); ++s) {
      const double k2 = layout_.k_squared(s);
      k4_[s] = k2 * k2;
    }
  }

  std::vector<Complex> transform(const ScalarField& f) { return ft_.forward(f.values()); }
  ScalarField field(const std::vector<Complex>& spec) {
    return ScalarField(layout_.grid(), ft_.inverse(spec));
  }
  AbreuEvaluation evaluate(const std::vector<Complex>& spec) { return evaluate_abreu(ft_, spec, q_); }

  std::vector<Complex> advance(const std::vector<Complex>& u, const AbreuEvaluation& at_u, double dt,
                               Integrator integrator) {
    return integrator == Integrator::kEtdRk4 ? etdrk4(u, at_u, dt) : rk4(u, at_u, dt);
  }

 private:
  using Spec = std::vector<Complex>;

  Spec rk4(const Spec& u, const AbreuEvaluation& at_u, double dt) {
    const std::size_t m = u.size();
    auto rhs = [&](const AbreuEvaluation& e) {
      Spec r(m);
      for (std::size_t s = 0; s < m; ++s) r[s] = -e.curvature[s];
      return r;
    };
    auto combine = [&](const Spec& base, const Spec& k, double c) {
      Spec out(m);
      for (std::size_t s = 0; s < m; ++s) out[s] = base[s] + c * k[s];
      return out;
    };
    const Spec k1 = rhs(at_u);
    const Spec k2 = rhs(evaluate(combine(u, k1, 0.5 * dt)));
    const Spec k3 = rhs(evaluate(combine(u, k2, 0.5 * dt)));
    const Spec k4 = rhs(evaluate(combine(u, k3, dt)));
    Spec out(m);
    for (std::size_t s = 0; s < m; ++s) {
      out[s] = u[s] + dt / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
    }
    return out;
  }

  // The splitting constant only needs to dominate the stiffness, so the
  // coefficient tables are rebuilt when dt changes or the stiffness leaves
  // [A/4, A].
  void refresh_coefficients(double stiffness, double dt) {
    if (dt == coeff_dt_ && stiffness <= split_ && stiffness >= 0.25 * split_) return;
    const std::size_t m = k4_.size();
    split_ = 2.0 * stiffness;
    coeff_dt_ = dt;
    for (auto* v : {&e_, &e2_, &qh_, &f1_, &f2_, &f3_, &lin_}) v->resize(m);
    for (std::size_t s = 0; s < m; ++s) {
      lin_[s] = split_ * k4_[s];
      const double w = -lin_[s] * dt;
      const Phi full = phi_functions(w);
      const Phi half = phi_functions(0.5 * w);
      e_[s] = std::exp(w);
      e2_[s] = std::exp(0.5 * w);
      qh_[s] = 0.5 * dt * half.p1;
      f1_[s] = dt * (full.p1 - 3.0 * full.p2 + 4.0 * full.p3);
      f2_[s] = dt * (full.p2 - 2.0 * full.p3);
      f3_[s] = dt * (-full.p2 + 4.0 * full.p3);
    }
  }

  Spec etdrk4(const Spec& u, const AbreuEvaluation& at_u, double dt) {
    const std::size_t m = u.size();
    refresh_coefficients(at_u.stiffness, dt);
    const auto &e = e_, &e2 = e2_, &qh = qh_, &f1 = f1_, &f2 = f2_, &f3 = f3_, &lin = lin_;
    // Nonlinear remainder N(v) = -S(v) + A |k|^4 v.
    auto remainder = [&](const Spec& v, const AbreuEvaluation& ev) {
      Spec r(m);
      for (std::size_t s = 0; s < m; ++s) r[s] = -ev.curvature[s] + lin[s] * v[s];
      return r;
    };
    const Spec nu = remainder(u, at_u);
    Spec a(m), b(m), c(m), out(m);
    for (std::size_t s = 0; s < m; ++s) a[s] = e2[s] * u[s] + qh[s] * nu[s];
    const Spec na = remainder(a, evaluate(a));
    for (std::size_t s = 0; s < m; ++s) b[s] = e2[s] * u[s] + qh[s] * na[s];
    const Spec nb = remainder(b, evaluate(b));
    for (std::size_t s = 0; s < m; ++s) c[s] = e2[s] * a[s] + qh[s] * (2.0 * nb[s] - nu[s]);
    const Spec nc = remainder(c, evaluate(c));
    for (std::size_t s = 0; s < m; ++s) {
      out[s] = e[s] * u[s] + f1[s] * nu[s] + 2.0 * f2[s] * (na[s] + nb[s]) + f3[s] * nc[s];
    }
    return out;
  }

  FourierTransform& ft_;
  const SpectralLayout& layout_;
  double q_;
  std::vector<double> k4_;
  double split_ = 0.0;
  double coeff_dt_ = 0.0;
  std::vector<double> e_, e2_, qh_, f1_, f2_, f3_, lin_;
};

// Advances one step from (spec, eval), updating the state in place.
void advance_state(Stepper& stepper, FlowState& state, std::vector<Complex>& spec,
                   AbreuEvaluation& eval, const FlowConfig& config) {
  const double base = config.base_dt(state.pot.grid());
  double dt = std::min(base, config.t_end - state.t);
  for (int halving = 0; halving <= kMaxHalvings; ++halving) {
    std::vector<Complex> next;
    AbreuEvaluation next_eval;
    try {
      next = stepper.advance(spec, eval, dt, config.integrator);
      next[0] = Complex{};  // zero-mean gauge
      next_eval = stepper.evaluate(next);
    } catch (const ConvexityLoss& loss) {
      state.status = FlowStatus::kBlowup;
      std::ostringstream msg;
      msg << "blowup at t = " << state.t << ": " << loss.what();
      state.message = msg.str();
      return;
    }
    const bool increased = next_eval.calabi_energy >
                           eval.calabi_energy * (1.0 + kEnergyIncreaseTolerance) + 1e-300;
    if (config.adaptive && increased) {
      dt *= 0.5;
      continue;
    }
    spec = std::move(next);
    eval = std::move(next_eval);
    state.t += dt;
    state.dt = dt;
    ++state.step_count;
    state.pot.periodic = stepper.field(spec);
    if (state.t >= config.t_end) state.status = FlowStatus::kCompleted;
    return;
  }
  state.status = FlowStatus::kStiff;
  std::ostringstream msg;
  msg << "stiff at t = " << state.t << ": Calabi energy kept increasing after " << kMaxHalvings
      << " halvings";
  state.message = msg.str();
}

}  // namespace

void FlowConfig::validate() const {
  if (!(dt_safety > 0.0 && dt_safety <= 1.0)) {
    throw std::invalid_argument("dt_safety (sigma) must lie in (0, 1]");
  }
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (monitor_every < 1) throw std::invalid_argument("monitor_every must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
}

double FlowConfig::base_dt(const PeriodicGrid& grid) const {
  const double h = grid.spacing();
  return dt_safety * h * h * h * h;
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::kRunning: return "running";
    case FlowStatus::kCompleted: return "completed";
    case FlowStatus::kBlowup: return "blowup";
    case FlowStatus::kStiff: return "stiff";
  }
  return "unknown";
}

FlowState initial_state(const SymplecticPotential& pot) {
  return FlowState{0.0, SymplecticPotential{mean_zero(pot.periodic), pot.quadratic, pot.slope}, 0.0, 0, FlowStatus::kRunning, {}};
}

std::string MonitorLog::csv_header() {
  return "t,calabi,mabuchi,total,max_rm,max_grad,bound_t2,bound_sqrt,dist_flat";
}

std::string MonitorLog::to_csv() const {
  std::string out = csv_header() + "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g\n", r.t, r.calabi,
                  r.mabuchi, r.total, r.max_rm, r.max_grad, r.bound_t2 ? 1 : 0, r.bound_sqrt ? 1 : 0,
                  r.dist_flat);
    out += buf;
  }
  return out;
}

bool curvature_bound_t2(double max_rm, double lambda, double t) {
  const double bound = t > 0.0 ? std::max(lambda, lambda / (t * t)) : std::numeric_limits<double>::infinity();
  return max_rm < bound;
}

bool curvature_bound_sqrt(double max_rm, double lambda, double t) {
  const double bound =
      t > 0.0 ? std::max(lambda, lambda / std::sqrt(2.0 * t)) : std::numeric_limits<double>::infinity();
  return max_rm < bound;
}

MonitorRow monitor(const FlowState& state, const FlowConfig& config) {
  const CurvatureReport report = energies(state.pot);
  MonitorRow row;
  row.t = state.t;
  row.step = state.step_count;
  row.calabi = report.calabi_energy;
  row.mabuchi = report.mabuchi_energy;
  row.total = report.total_energy;
  row.max_rm = report.max_rm;
  row.max_grad = report.max_grad;
  row.bound_t2 = curvature_bound_t2(report.max_rm, config.lambda, state.t);
  row.bound_sqrt = curvature_bound_sqrt(report.max_rm, config.lambda, state.t);
  const SymplecticPotential flat{ScalarField::zeros(state.pot.grid()), state.pot.quadratic,
                                 state.pot.slope};
  row.dist_flat = mabuchi_distance(state.pot, flat);
  return row;
}

SymplecticPotential euler_substep(const SymplecticPotential& pot, double dt) {
  const ScalarField S = abreu_scalar_curvature(pot);
  return SymplecticPotential{pot.periodic - dt * S, pot.quadratic, pot.slope};
}

FlowState step(const FlowState& state, const FlowConfig& config) {
  config.validate();
  if (state.terminal()) throw std::invalid_argument("step: state is terminal");
  FlowState next = state;
  next.status = FlowStatus::kRunning;
  Stepper stepper(state.pot.grid(), state.pot.quadratic);
  auto spec = stepper.transform(state.pot.periodic);
  spec[0] = Complex{};
  AbreuEvaluation eval;
  try {
    eval = stepper.evaluate(spec);
  } catch (const ConvexityLoss& loss) {
    next.status = FlowStatus::kBlowup;
    next.message = std::string("blowup at t = ") + std::to_string(state.t) + ": " + loss.what();
    return next;
  }
  if (state.t >= config.t_end) {
    next.status = FlowStatus::kCompleted;
    return next;
  }
  advance_state(stepper, next, spec, eval, config);
  return next;
}

RunResult run(const SymplecticPotential& initial, const FlowConfig& config,
              const MonitorObserver& observer) {
  config.validate();
  if (!(convexity_margin(initial) > kConvexityThreshold)) {
    throw std::domain_error("run: initial potential is not strictly convex");
  }
  RunResult result{initial_state(initial), {}};
  FlowState& state = result.state;
  const double rm_ceiling = 1.0 / (state.pot.grid().spacing() * state.pot.grid().spacing());

  auto record = [&]() {
    MonitorRow row = monitor(state, config);
    result.log.rows.push_back(row);
    if (observer) observer(state, row);
    if (row.max_rm > rm_ceiling && !state.terminal()) {
      state.status = FlowStatus::kBlowup;
      std::ostringstream msg;
      msg << "blowup at t = " << state.t << ": max |Rm| = " << row.max_rm
          << " exceeds the grid resolution limit " << rm_ceiling;
      state.message = msg.str();
    }
  };

  Stepper stepper(state.pot.grid(), state.pot.quadratic);
  auto spec = stepper.transform(state.pot.periodic);
  spec[0] = Complex{};
  AbreuEvaluation eval = stepper.evaluate(spec);
  record();

  long last_logged = 0;
  while (state.status == FlowStatus::kRunning) {
    advance_state(stepper, state, spec, eval, config);
    if (state.terminal()) break;
    if (state.step_count % config.monitor_every == 0 || state.status == FlowStatus::kCompleted) {
      record();
      last_logged = state.step_count;
    }
  }
  if (state.terminal() && state.step_count != last_logged) record();
  return result;
}

SymplecticPotential rescale(const SymplecticPotential& pot, double lambda, const Point& x0) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("rescale: lambda must be >= 1");
  const auto& grid = pot.grid();
  const PeriodicGrid target(grid.dim(), grid.points_per_axis(), lambda * grid.half_length());

  // f~(x) = lambda f(y - x0/lambda) at matching node indices y.
  auto& ft = fourier_for(grid);
  auto spec = ft.forward(pot.periodic.values());
  const auto& layout = ft.layout();
  for (std::size_t s = 0; s < spec.size(); ++s) {
    double phase = 0.0;
    for (int a = 0; a < grid.dim(); ++a) phase -= layout.wavenumber(s, a) * x0[a] / lambda;
    spec[s] *= lambda * std::polar(1.0, phase);
  }
  ScalarField f(target, ft.inverse(spec));

  SymplecticPotential out{std::move(f), pot.quadratic / lambda, pot.slope};
  for (int a = 0; a < grid.dim(); ++a) out.slope[a] = pot.slope[a] - pot.quadratic * x0[a] / lambda;
  return out;
}

double gradient_bound(const SymplecticPotential& pot) {
  const auto& grid = pot.grid();
  const int dim = grid.dim();
  const double L = grid.half_length();
  std::array<ScalarField, 2> grad{partial_derivative(pot.periodic, {0}), ScalarField::zeros(grid)};
  if (dim == 2) grad[1] = partial_derivative(pot.periodic, {1});
  const double tol = 1e-12 * L;
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    for (int k0 = -1; k0 <= 1; ++k0) {
      for (int k1 = -1; k1 <= 1; ++k1) {
        if (dim == 1 && k1 != 0) continue;
        const std::array<int, 2> k{k0, k1};
        double sq = 0.0;
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
          const double xa = x[a] + 2.0 * L * k[a];
          if (xa < -2.0 * L - tol || xa > 2.0 * L + tol) inside = false;
          const double g = grad[a][i] + pot.quadratic * xa + pot.slope[a];
          sq += g * g;
        }
        if (inside) best = std::max(best, std::sqrt(sq));
      }
    }
  }
  return best;
}

}  // namespace calabi
