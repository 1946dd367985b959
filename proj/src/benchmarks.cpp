#include "addbo/benchmarks.hpp"

#include <cmath>
#include <sstream>

namespace addbo {

double styblinski_tang_term(double x) {
  const double x2 = x * x;
  return 0.5 * (x2 * x2 - 16.0 * x2 + 5.0 * x);
}

double styblinski_tang(const Eigen::Ref<const Vector> &x) {
  double total = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -5.0 && x[i] <= 5.0))
      throw UsageError("styblinski_tang: coordinate " + std::to_string(i) + " outside [-5, 5]");
    total += styblinski_tang_term(x[i]);
  }
  return total;
}

Minimum1D styblinski_tang_1d_minimum() {
  constexpr int kGrid = 10001;
  double best_x = -5.0;
  double best_v = styblinski_tang_term(best_x);
  for (int i = 1; i < kGrid; ++i) {
    const double x = -5.0 + 10.0 * i / (kGrid - 1);
    const double v = styblinski_tang_term(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double step = 10.0 / (kGrid - 1);
  double a = best_x - step, b = best_x + step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  while (b - a > 1e-12) {
    if (styblinski_tang_term(c) < styblinski_tang_term(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - inv_phi * (b - a);
    d = a + inv_phi * (b - a);
  }
  const double x = 0.5 * (a + b);
  return {x, styblinski_tang_term(x)};
}

namespace {

double quadratic_center(Index i, Index d) {
  if (d == 1)
    return 1.0;
  return -4.0 + 8.0 * static_cast<double>(i) / static_cast<double>(d - 1);
}

} // namespace

double separable_quadratic(const Eigen::Ref<const Vector> &x) {
  double total = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -5.0 && x[i] <= 5.0))
      throw UsageError("separable_quadratic: coordinate " + std::to_string(i) + " outside [-5, 5]");
    const double r = x[i] - quadratic_center(i, x.size());
    total += r * r;
  }
  return total;
}

std::vector<BenchmarkSpec> available_benchmarks() {
  return {{"styblinski_tang", "Styblinski-Tang on [-5,5]^d, per-coordinate groups", true},
          {"separable_quadratic", "sum of shifted 1-D quadratics on [-5,5]^d (smoke test)", false}};
}

Problem benchmark_problem(const std::string &name, Index d) {
  if (d < 1)
    throw UsageError("benchmark_problem: dimension must be >= 1");
  if (name == "styblinski_tang") {
    const auto min1 = styblinski_tang_1d_minimum();
    return {name, SearchSpace::uniform(d, -5.0, 5.0),
            [](const Eigen::Ref<const Vector> &x) { return Evaluation{styblinski_tang(x), true}; },
            Decomposition::singletons(d), static_cast<double>(d) * min1.value};
  }
  if (name == "separable_quadratic") {
    return {name, SearchSpace::uniform(d, -5.0, 5.0),
            [](const Eigen::Ref<const Vector> &x) { return Evaluation{separable_quadratic(x), true}; },
            Decomposition::singletons(d), 0.0};
  }
  std::ostringstream os;
  os << "unknown benchmark '" << name << "'; available:";
  for (const auto &b : available_benchmarks())
    os << ' ' << b.name;
  throw UsageError(os.str());
}

} // namespace addbo
