#pragma once

#include "addbo/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace addbo {

using Rng = std::mt19937_64;

struct SEKernelParams {
  double lengthscale = 1.0;
  double amplitude = 1.0;

  void validate() const;
};

/// amplitude * exp(-|x - x2|^2 / (2 l^2))
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar se_kernel(const Eigen::MatrixBase<DerivedA> &x,
                                    const Eigen::MatrixBase<DerivedB> &x2,
                                    const SEKernelParams &params) {
  using Scalar = typename DerivedA::Scalar;
  if (x.size() != x2.size())
    throw UsageError("se_kernel: dimension mismatch");
  const Scalar sq = (x - x2).squaredNorm();
  const Scalar l = static_cast<Scalar>(params.lengthscale);
  return static_cast<Scalar>(params.amplitude) * std::exp(-sq / (Scalar(2) * l * l));
}

/// Sum over groups of the SE kernel restricted to each group's coordinates.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar additive_kernel(const Eigen::MatrixBase<DerivedA> &x,
                                          const Eigen::MatrixBase<DerivedB> &x2,
                                          const Decomposition &decomp,
                                          const std::vector<SEKernelParams> &group_params) {
  using Scalar = typename DerivedA::Scalar;
  if (static_cast<Index>(group_params.size()) != decomp.num_groups())
    throw UsageError("additive_kernel: need one parameter set per group");
  if (x.size() != decomp.dim() || x2.size() != decomp.dim())
    throw UsageError("additive_kernel: point dimension does not match decomposition");
  if (decomp.num_groups() == 1)
    return se_kernel(x, x2, group_params.front());
  Scalar total(0);
  for (Index j = 0; j < decomp.num_groups(); ++j) {
    const auto &g = decomp.group(j);
    total += se_kernel(x.derived()(g), x2.derived()(g), group_params[static_cast<std::size_t>(j)]);
  }
  return total;
}

/// Covariance function used by the exact GP: either a single SE kernel over
/// all coordinates or an additive sum over a decomposition.
class KernelSpec {
public:
  /// Full-dimensional SE kernel.
  static KernelSpec full(Index dim, SEKernelParams params);
  /// Additive kernel, one parameter set per group.
  static KernelSpec additive(Decomposition decomp, std::vector<SEKernelParams> params);

  double operator()(const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &x2) const;

  /// Cross-covariance between columns of `a` (d x n) and `b` (d x p).
  Matrix cross(const Eigen::Ref<const Matrix> &a, const Eigen::Ref<const Matrix> &b) const;

  /// k(x, x); constant for stationary kernels.
  double prior_variance() const;

  const Decomposition &decomposition() const { return decomp_; }
  const std::vector<SEKernelParams> &params() const { return params_; }
  Index dim() const { return decomp_.dim(); }

private:
  KernelSpec(Decomposition decomp, std::vector<SEKernelParams> params);

  Decomposition decomp_;
  std::vector<SEKernelParams> params_;
};

/// t x t Gram matrix of `kernel` over the columns of `points` (d x t).
template <typename Kernel>
Matrix build_gram(const Eigen::Ref<const Matrix> &points, const Kernel &kernel) {
  const Index t = points.cols();
  if (t < 1)
    throw UsageError("build_gram: at least one point required");
  Matrix gram(t, t);
  for (Index j = 0; j < t; ++j) {
    for (Index i = j; i < t; ++i) {
      const double v = kernel(points.col(i), points.col(j));
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

/// Pairwise squared distances between columns of a (d x n) and b (d x p).
Matrix squared_distances(const Eigen::Ref<const Matrix> &a, const Eigen::Ref<const Matrix> &b);

enum class FeatureKind { Random, Quadrature };

/// Fourier feature map for one group. Features are laid out as
/// [sqrt(w_1) cos(f_1.x) .. sqrt(w_m) cos(f_m.x), sqrt(w_1) sin(f_1.x) .. ]
/// so that phi(x).phi(x') = sum_i w_i cos(f_i.(x - x')), which approximates
/// the unit-amplitude SE kernel. The evaluated vector always has unit norm;
/// amplitude is applied by whoever stacks the maps.
class FeatureMap {
public:
  FeatureMap(FeatureKind kind, Matrix frequencies, Vector weights);

  FeatureKind kind() const { return kind_; }
  Index group_dim() const { return frequencies_.cols(); }
  Index num_frequencies() const { return frequencies_.rows(); }
  Index feature_dim() const { return 2 * frequencies_.rows(); }
  const Matrix &frequencies() const { return frequencies_; }
  const Vector &weights() const { return weights_; }

  /// Unit-norm feature vector (length 2m).
  Vector evaluate(const Eigen::Ref<const Vector> &x) const;
  /// Columnwise evaluation of x (group_dim x n) into a 2m x n matrix.
  Matrix evaluate_batch(const Eigen::Ref<const Matrix> &x) const;
  /// Feature vector before renormalization (identical for the random kind).
  Vector evaluate_raw(const Eigen::Ref<const Vector> &x) const;

private:
  FeatureKind kind_;
  Matrix frequencies_;
  Vector sqrt_weights_;
  Vector weights_;
};

/// Random Fourier features: m Gaussian frequencies with covariance I / l^2.
FeatureMap sample_rff(Index group_dim, Index m, const SEKernelParams &params, Rng &rng);

/// Tensor-product Gauss-Hermite quadrature features (group_dim <= 2).
FeatureMap build_qff(Index group_dim, Index nodes_per_dim, const SEKernelParams &params);

inline Vector evaluate_features(const FeatureMap &map, const Eigen::Ref<const Vector> &x) {
  return map.evaluate(x);
}

/// Nodes and weights of the physicists' Gauss-Hermite rule (weight e^{-u^2}).
void gauss_hermite(Index n, Vector &nodes, Vector &weights);

} // namespace addbo
