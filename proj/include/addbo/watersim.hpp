#pragma once

#include "addbo/config.hpp"
#include "addbo/problem.hpp"

#include <vector>

namespace addbo::watersim {

/// Variable-speed pump at rated (full-speed) conditions.
struct PumpModel {
  double rated_flow = 0.07;  // m^3/s
  double rated_head = 50.0;  // m
  double efficiency = 0.75;  // (0, 1]

  void validate() const;
};

/// Single-tank network: pumps fill the tank, demand drains it.
struct NetworkConfig {
  std::vector<PumpModel> pumps;
  Index horizon = 24;
  double dt_hours = 1.0;
  std::vector<double> tariff;  // $/kWh per step
  std::vector<double> demand;  // m^3/s per step
  double tank_area = 1500.0;   // m^2
  double tank_initial_level = 3.0;
  double tank_min_level = 0.5;
  double tank_max_level = 6.0;
  double min_pressure_level = 1.5;
  double gamma = 9.81;  // kN/m^3

  Index num_pumps() const { return static_cast<Index>(pumps.size()); }
  Index dimension() const { return horizon * num_pumps(); }
  void validate() const;
};

struct HydraulicState {
  Matrix flow;   // horizon x pumps, m^3/s
  Matrix head;   // horizon x pumps, m
  Vector level;  // horizon + 1 entries, level[0] is the initial level
  double spill = 0.0;      // m^3 lost over the tank rim
  double violation = 0.0;  // summed level deficit, m
  bool feasible = true;
};

/// Affinity-law operating points and the tank mass balance. `schedule` is
/// horizon x pumps with speeds in [0,1] (0 = off).
HydraulicState simulate(const Eigen::Ref<const Matrix> &schedule, const NetworkConfig &cfg);

/// dt * sum_t tariff_t * sum_k gamma x Q H / eta, in dollars.
double energy_cost(const Eigen::Ref<const Matrix> &schedule, const HydraulicState &state, const NetworkConfig &cfg);

/// Two-peak diurnal demand, two-band tariff, four identical pumps.
NetworkConfig default_config();

/// Overrides entries of `base` with keys present in `kv`.
NetworkConfig config_from_keys(const KeyValueConfig &kv, NetworkConfig base = default_config());
NetworkConfig load_config(const std::string &path);
std::vector<std::string> config_keys();

/// Hour-major decision vector (x[t * pumps + k]) to a schedule matrix.
Matrix schedule_from_vector(const Eigen::Ref<const Vector> &x, const NetworkConfig &cfg);

inline constexpr double kDefaultPenalty = 1000.0;

/// Pump-scheduling problem over [0,1]^(horizon*pumps), one group per step.
/// Infeasible schedules cost energy + penalty * (1 + violation).
Problem pso_problem(const NetworkConfig &cfg, double penalty = kDefaultPenalty);

} // namespace addbo::watersim
