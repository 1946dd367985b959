#pragma once

#include "addbo/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace addbo {

/// Result of one black-box call.
struct Evaluation {
  double value = 0.0;
  bool feasible = true;
};

using Objective = std::function<Evaluation(const Eigen::Ref<const Vector> &)>;

/// Minimization problem over a box, optionally with a known additive structure.
struct Problem {
  std::string name;
  SearchSpace space;
  Objective objective;
  std::optional<Decomposition> decomposition;
  std::optional<double> known_optimum;

  void validate() const;
};

} // namespace addbo
