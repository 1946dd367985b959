#include "addbo/watersim.hpp"

#include <cmath>

namespace addbo::watersim {

void PumpModel::validate() const {
  if (!(rated_flow > 0.0 && rated_head > 0.0))
    throw UsageError("PumpModel: rated flow and head must be positive");
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    throw UsageError("PumpModel: efficiency must lie in (0, 1]");
}

void NetworkConfig::validate() const {
  if (pumps.empty())
    throw UsageError("NetworkConfig: at least one pump required");
  for (const auto &p : pumps)
    p.validate();
  if (horizon < 1)
    throw UsageError("NetworkConfig: horizon must be >= 1");
  if (!(dt_hours > 0.0))
    throw UsageError("NetworkConfig: dt_hours must be positive");
  if (static_cast<Index>(tariff.size()) != horizon)
    throw UsageError("NetworkConfig: tariff needs one entry per step");
  if (static_cast<Index>(demand.size()) != horizon)
    throw UsageError("NetworkConfig: demand needs one entry per step");
  if (!(tank_area > 0.0))
    throw UsageError("NetworkConfig: tank area must be positive");
  if (!(tank_min_level < tank_initial_level && tank_initial_level < tank_max_level))
    throw UsageError("NetworkConfig: need tank_min_level < tank_initial_level < tank_max_level");
  if (!(gamma > 0.0))
    throw UsageError("NetworkConfig: gamma must be positive");
}

HydraulicState simulate(const Eigen::Ref<const Matrix> &schedule, const NetworkConfig &cfg) {
  cfg.validate();
  const Index steps = cfg.horizon;
  const Index n = cfg.num_pumps();
  if (schedule.rows() != steps || schedule.cols() != n)
    throw UsageError("simulate: schedule must be horizon x pumps");
  if ((schedule.array() < 0.0).any() || (schedule.array() > 1.0).any())
    throw UsageError("simulate: pump speeds must lie in [0, 1]");

  HydraulicState st;
  st.flow.resize(steps, n);
  st.head.resize(steps, n);
  st.level.resize(steps + 1);
  st.level[0] = cfg.tank_initial_level;
  const double seconds = cfg.dt_hours * 3600.0;
  for (Index t = 0; t < steps; ++t) {
    double inflow = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double x = schedule(t, k);
      const auto &p = cfg.pumps[static_cast<std::size_t>(k)];
      st.flow(t, k) = x * p.rated_flow;
      st.head(t, k) = x * x * p.rated_head;
      inflow += st.flow(t, k);
    }
    double next = st.level[t] + seconds * (inflow - cfg.demand[static_cast<std::size_t>(t)]) / cfg.tank_area;
    if (next > cfg.tank_max_level) {
      st.spill += (next - cfg.tank_max_level) * cfg.tank_area;
      next = cfg.tank_max_level;
    }
    st.level[t + 1] = next;
    if (next < cfg.min_pressure_level)
      st.violation += cfg.min_pressure_level - next;
  }
  if (st.level[steps] < cfg.tank_initial_level)
    st.violation += cfg.tank_initial_level - st.level[steps];
  st.feasible = st.violation == 0.0;
  return st;
}

double energy_cost(const Eigen::Ref<const Matrix> &schedule, const HydraulicState &state, const NetworkConfig &cfg) {
  double cost = 0.0;
  for (Index t = 0; t < cfg.horizon; ++t) {
    double kw = 0.0;
    for (Index k = 0; k < cfg.num_pumps(); ++k) {
      const auto &p = cfg.pumps[static_cast<std::size_t>(k)];
      kw += cfg.gamma * schedule(t, k) * state.flow(t, k) * state.head(t, k) / p.efficiency;
    }
    cost += cfg.tariff[static_cast<std::size_t>(t)] * kw;
  }
  return cfg.dt_hours * cost;
}

NetworkConfig default_config() {
  NetworkConfig cfg;
  cfg.pumps.assign(4, PumpModel{});
  cfg.horizon = 24;
  cfg.dt_hours = 1.0;
  // Morning peak around 08:00, evening peak around 19:00.
  cfg.demand = {0.060, 0.055, 0.052, 0.052, 0.058, 0.070, 0.095, 0.125, 0.140, 0.130, 0.110, 0.100,
                0.100, 0.098, 0.095, 0.098, 0.108, 0.125, 0.145, 0.150, 0.135, 0.110, 0.085, 0.068};
  cfg.tariff.assign(24, 0.16);
  for (int h : {0, 1, 2, 3, 4, 5, 6, 22, 23})
    cfg.tariff[static_cast<std::size_t>(h)] = 0.06;
  return cfg;
}

std::vector<std::string> config_keys() {
  return {"pumps",      "horizon",        "dt_hours",           "tariff",          "demand",
          "tank_area",  "tank_initial_level", "tank_min_level", "tank_max_level",  "min_pressure_level",
          "gamma",      "pump_rated_flow", "pump_rated_head",   "pump_efficiency"};
}

namespace {

std::vector<double> per_pump(const KeyValueConfig &kv, const std::string &key, std::size_t pumps,
                             double current) {
  if (!kv.has(key))
    return std::vector<double>(pumps, current);
  auto v = kv.get_doubles(key);
  if (v.size() == 1)
    v.assign(pumps, v.front());
  if (v.size() != pumps)
    throw ConfigError(key, "key '" + key + "' needs one value or one per pump");
  return v;
}

} // namespace

NetworkConfig config_from_keys(const KeyValueConfig &kv, NetworkConfig cfg) {
  if (kv.has("pumps")) {
    const long n = kv.get_int("pumps");
    if (n < 1)
      throw ConfigError("pumps", "key 'pumps' must be >= 1");
    cfg.pumps.assign(static_cast<std::size_t>(n), cfg.pumps.empty() ? PumpModel{} : cfg.pumps.front());
  }
  if (kv.has("horizon")) {
    const long h = kv.get_int("horizon");
    if (h < 1)
      throw ConfigError("horizon", "key 'horizon' must be >= 1");
    cfg.horizon = h;
  }
  if (kv.has("dt_hours"))
    cfg.dt_hours = kv.get_double("dt_hours");
  if (kv.has("tariff"))
    cfg.tariff = kv.get_doubles("tariff");
  if (kv.has("demand"))
    cfg.demand = kv.get_doubles("demand");
  if (kv.has("tank_area"))
    cfg.tank_area = kv.get_double("tank_area");
  if (kv.has("tank_initial_level"))
    cfg.tank_initial_level = kv.get_double("tank_initial_level");
  if (kv.has("tank_min_level"))
    cfg.tank_min_level = kv.get_double("tank_min_level");
  if (kv.has("tank_max_level"))
    cfg.tank_max_level = kv.get_double("tank_max_level");
  if (kv.has("min_pressure_level"))
    cfg.min_pressure_level = kv.get_double("min_pressure_level");
  if (kv.has("gamma"))
    cfg.gamma = kv.get_double("gamma");

  const auto n = cfg.pumps.size();
  std::vector<double> flow(n), head(n), eff(n);
  for (std::size_t k = 0; k < n; ++k) {
    flow[k] = cfg.pumps[k].rated_flow;
    head[k] = cfg.pumps[k].rated_head;
    eff[k] = cfg.pumps[k].efficiency;
  }
  flow = per_pump(kv, "pump_rated_flow", n, flow.front());
  head = per_pump(kv, "pump_rated_head", n, head.front());
  eff = per_pump(kv, "pump_efficiency", n, eff.front());
  for (std::size_t k = 0; k < n; ++k)
    cfg.pumps[k] = {flow[k], head[k], eff[k]};

  try {
    cfg.validate();
  } catch (const UsageError &e) {
    throw ConfigError("", e.what());
  }
  return cfg;
}

NetworkConfig load_config(const std::string &path) {
  const auto kv = KeyValueConfig::load(path);
  kv.check_keys(config_keys());
  return config_from_keys(kv);
}

Matrix schedule_from_vector(const Eigen::Ref<const Vector> &x, const NetworkConfig &cfg) {
  if (x.size() != cfg.dimension())
    throw UsageError("schedule_from_vector: expected " + std::to_string(cfg.dimension()) + " speeds");
  Matrix s(cfg.horizon, cfg.num_pumps());
  for (Index t = 0; t < cfg.horizon; ++t)
    for (Index k = 0; k < cfg.num_pumps(); ++k)
      s(t, k) = x[t * cfg.num_pumps() + k];
  return s;
}

Problem pso_problem(const NetworkConfig &cfg, double penalty) {
  cfg.validate();
  if (!(penalty > 0.0))
    throw UsageError("pso_problem: penalty must be positive");
  const Index d = cfg.dimension();
  Objective objective = [cfg, penalty](const Eigen::Ref<const Vector> &x) {
    const Matrix schedule = schedule_from_vector(x, cfg);
    const auto state = simulate(schedule, cfg);
    const double cost = energy_cost(schedule, state, cfg);
    if (state.feasible)
      return Evaluation{cost, true};
    return Evaluation{cost + penalty * (1.0 + state.violation), false};
  };
  return {"pump_scheduling", SearchSpace::unit(d), std::move(objective), Decomposition::blocks(d, cfg.num_pumps()),
          std::nullopt};
}

} // namespace addbo::watersim
