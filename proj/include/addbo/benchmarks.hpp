#pragma once

#include "addbo/problem.hpp"

#include <string>
#include <vector>

namespace addbo {

/// One-dimensional Styblinski-Tang term: (x^4 - 16 x^2 + 5 x) / 2.
double styblinski_tang_term(double x);

/// Sum of the 1-D terms; every coordinate must lie in [-5, 5].
double styblinski_tang(const Eigen::Ref<const Vector> &x);

/// Minimizer and minimum of the 1-D term on [-5, 5], located by a dense grid
/// followed by golden-section search.
struct Minimum1D {
  double x = 0.0;
  double value = 0.0;
};
Minimum1D styblinski_tang_1d_minimum();

/// Separable smoke-test function (not from the original study): sum of 1-D
/// quadratics whose minima are spread over [-4, 4]. Optimum 0.
double separable_quadratic(const Eigen::Ref<const Vector> &x);

struct BenchmarkSpec {
  std::string name;
  std::string description;
  bool from_study = false;
};

std::vector<BenchmarkSpec> available_benchmarks();

/// Problem with bounds, objective, per-coordinate decomposition and optimum.
Problem benchmark_problem(const std::string &name, Index d);

} // namespace addbo
