#pragma once

#include <functional>
#include <string>
#include <vector>

#include "calabi/geometry.hpp"
#include "calabi/potential.hpp"

namespace calabi {

enum class Integrator {
  /// Fourth-order exponential time differencing (Cox-Matthews) with the
  /// linear part -A Delta^2 treated exactly; A is refreshed every step from
  /// the current inverse Hessian.
  kEtdRk4,
  /// Classical explicit RK4 on df/dt = -S. Only stable for dt_safety of order
  /// 1e-2 and mild data.
  kRk4,
};

struct FlowConfig {
  double dt_safety = 0.5;  ///< dt = dt_safety * h^4
  double t_end = 0.02;
  int monitor_every = 100;
  double lambda = 1.0;  ///< threshold in the curvature bound checks
  bool adaptive = true;
  Integrator integrator = Integrator::kEtdRk4;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  double base_dt(const PeriodicGrid& grid) const;
};

enum class FlowStatus { kRunning, kCompleted, kBlowup, kStiff };

std::string to_string(FlowStatus status);

struct FlowState {
  double t = 0.0;
  SymplecticPotential pot;
  double dt = 0.0;  ///< step size used by the most recent step
  long step_count = 0;
  FlowStatus status = FlowStatus::kRunning;
  std::string message;

  bool terminal() const { return status == FlowStatus::kBlowup || status == FlowStatus::kStiff; }
};

/// Starting state: the periodic part is shifted to zero mean.
FlowState initial_state(const SymplecticPotential& pot);

struct MonitorRow {
  double t = 0.0;
  long step = 0;
  double calabi = 0.0;
  double mabuchi = 0.0;
  double total = 0.0;
  double max_rm = 0.0;
  double max_grad = 0.0;
  bool bound_t2 = true;    ///< max_rm < max(lambda, lambda / t^2)
  bool bound_sqrt = true;  ///< max_rm < max(lambda, lambda / sqrt(2 t))
  double dist_flat = 0.0;  ///< mabuchi_distance(pot, flat)
};

struct MonitorLog {
  std::vector<MonitorRow> rows;

  static std::string csv_header();
  std::string to_csv() const;
};

bool curvature_bound_t2(double max_rm, double lambda, double t);
bool curvature_bound_sqrt(double max_rm, double lambda, double t);

MonitorRow monitor(const FlowState& state, const FlowConfig& config);

/// f - dt * S(u), the forward Euler update (no gauge fixing).
SymplecticPotential euler_substep(const SymplecticPotential& pot, double dt);

/// One time step of size min(dt_safety * h^4, t_end - t). With adaptive
/// stepping a step that raises the Calabi energy by more than 1e-8 relative
/// is retried at half the size, at most 20 times. Convexity loss makes the
/// state terminal (blowup); exhausting the halvings makes it terminal (stiff).
FlowState step(const FlowState& state, const FlowConfig& config);

struct RunResult {
  FlowState state;
  MonitorLog log;
};

using MonitorObserver = std::function<void(const FlowState&, const MonitorRow&)>;

/// Integrates to t_end. A row is logged for the initial state, every
/// monitor_every steps, and for the final state. A row whose max_rm exceeds
/// 1/h^2 ends the run as a blowup.
RunResult run(const SymplecticPotential& initial, const FlowConfig& config,
              const MonitorObserver& observer = {});

/// x -> lambda * u((x - x0) / lambda) on a grid of half length lambda * L with
/// the same number of points. Throws std::invalid_argument for lambda < 1.
SymplecticPotential rescale(const SymplecticPotential& pot, double lambda, const Point& x0);

/// sup |Du| over the nodes of the periodic extension covering [-2L, 2L]^n.
double gradient_bound(const SymplecticPotential& pot);

}  // namespace calabi
