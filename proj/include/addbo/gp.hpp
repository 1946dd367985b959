#pragma once

#include "addbo/kernels.hpp"

#include <Eigen/Cholesky>

#include <optional>
#include <vector>

namespace addbo {

/// Observations: points stored as columns of a d x t matrix.
class Dataset {
public:
  explicit Dataset(Index dim = 0) : points_(dim, 0) {}
  Dataset(Matrix points, Vector values);

  void add(const Eigen::Ref<const Vector> &x, double y);

  Index dim() const { return points_.rows(); }
  Index size() const { return points_.cols(); }
  bool empty() const { return size() == 0; }
  const Matrix &points() const { return points_; }
  const Vector &values() const { return values_; }
  auto point(Index i) const { return points_.col(i); }
  double value(Index i) const { return values_[i]; }

private:
  Matrix points_;
  Vector values_;
};

struct NoiseParams {
  double variance = 1e-6;
  /// Fixed at zero; kept so the noise model is explicit.
  double mean = 0.0;

  void validate() const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  double stddev() const { return std::sqrt(variance); }
};

/// Affine z-score of observed values.
struct OutputScaling {
  double mean = 0.0;
  double scale = 1.0;

  static OutputScaling fit(const Eigen::Ref<const Vector> &y);
  double apply(double y) const { return (y - mean) / scale; }
  Vector apply(const Eigen::Ref<const Vector> &y) const {
    return ((y.array() - mean) / scale).matrix();
  }
  double unapply(double z) const { return z * scale + mean; }
};

/// Cholesky factorization of a symmetric matrix with diagonal jitter.
/// The jitter starts at `base_jitter` and is multiplied by 10 up to three
/// times if the factorization fails.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
};

JitteredCholesky factorize_with_jitter(const Matrix &sym, double base_jitter, const char *context);

/// Exact GP posterior conditioned on a dataset.
class ExactPosterior {
public:
  ExactPosterior(Dataset data, KernelSpec kernel, NoiseParams noise, JitteredCholesky chol, Vector alpha);

  const Dataset &data() const { return data_; }
  const KernelSpec &kernel() const { return kernel_; }
  const NoiseParams &noise() const { return noise_; }
  /// Lower-triangular factor of K + (noise + jitter) I.
  Matrix chol_factor() const { return chol_.llt.matrixL(); }
  double jitter() const { return chol_.jitter; }
  const Vector &alpha() const { return alpha_; }

  /// Means and variances at the columns of x (d x n).
  void predict_batch(const Eigen::Ref<const Matrix> &x, Vector &mean, Vector &variance) const;

private:
  Dataset data_;
  KernelSpec kernel_;
  NoiseParams noise_;
  JitteredCholesky chol_;
  Vector alpha_;
};

ExactPosterior fit_exact(const Dataset &data, const KernelSpec &kernel, const NoiseParams &noise);
Prediction predict_exact(const ExactPosterior &post, const Eigen::Ref<const Vector> &x);

/// Per-group feature maps concatenated into one global feature vector.
/// Group j's block is scaled by sqrt(amplitude_j) so that the stacked inner
/// product approximates the additive kernel with those amplitudes.
class FeatureStack {
public:
  FeatureStack(Decomposition decomp, std::vector<FeatureMap> maps, std::vector<double> amplitudes);
  /// All amplitudes equal to one.
  FeatureStack(Decomposition decomp, std::vector<FeatureMap> maps);

  const Decomposition &decomposition() const { return decomp_; }
  const FeatureMap &map(Index j) const { return maps_[static_cast<std::size_t>(j)]; }
  double amplitude(Index j) const { return amplitudes_[static_cast<std::size_t>(j)]; }
  Index num_groups() const { return decomp_.num_groups(); }
  Index feature_dim() const { return offsets_.back(); }
  Index offset(Index j) const { return offsets_[static_cast<std::size_t>(j)]; }
  Index block_size(Index j) const { return map(j).feature_dim(); }

  /// Global feature vector of a full point.
  Vector evaluate(const Eigen::Ref<const Vector> &x) const;
  /// Scaled block of group j at a group sub-point.
  Vector evaluate_group(Index j, const Eigen::Ref<const Vector> &xj) const;
  Matrix evaluate_group_batch(Index j, const Eigen::Ref<const Matrix> &xj) const;

private:
  Decomposition decomp_;
  std::vector<FeatureMap> maps_;
  std::vector<double> amplitudes_;
  std::vector<Index> offsets_;
};

/// Bayesian linear regression in feature space: A = Phi^T Phi + s^2 I,
/// v = A^{-1} Phi^T y. The Cholesky factor of A is updated by rank-1 steps.
class LinearPosterior {
public:
  LinearPosterior(FeatureStack stack, NoiseParams noise);

  /// Rank-1 update with one observation.
  void add(const Eigen::Ref<const Vector> &x, double y);
  /// Adds every observation of `data`; refactorizes instead of running
  /// rank-1 updates when the batch is large relative to the feature count.
  void add_all(const Dataset &data);

  const FeatureStack &stack() const { return stack_; }
  const NoiseParams &noise() const { return noise_; }
  Index feature_dim() const { return stack_.feature_dim(); }
  Index count() const { return features_.rows(); }
  const Vector &v() const { return v_; }
  const Vector &phi_ty() const { return phi_ty_; }
  /// Feature rows Phi(X_t), t x M.
  const Matrix &features() const { return features_; }
  const Matrix &chol_factor() const { return chol_; }
  /// A_t rebuilt from its Cholesky factor.
  Matrix system_matrix() const;

  Prediction predict_features(const Eigen::Ref<const Vector> &phi) const;
  /// sigma^2 A^{-1} applied to the features, columnwise: returns per-column
  /// quadratic forms phi^T (s^2 A^{-1}) phi.
  Vector variance_batch(const Eigen::Ref<const Matrix> &phi) const;

  /// s^2 times the j-th diagonal block of A^{-1}, for every group.
  std::vector<Matrix> group_covariance_blocks() const;

private:
  void refresh_mean();

  FeatureStack stack_;
  NoiseParams noise_;
  Matrix chol_;
  Matrix features_;
  Vector phi_ty_;
  Vector v_;
};

/// Minimum noise variance accepted by the linear posterior.
inline constexpr double kLinearNoiseFloor = 1e-6;

LinearPosterior fit_linear(const Dataset &data, const FeatureStack &stack, const NoiseParams &noise);
LinearPosterior update_linear(const LinearPosterior &post, const Eigen::Ref<const Vector> &x, double y);
Prediction predict_linear(const LinearPosterior &post, const Eigen::Ref<const Vector> &x);
/// theta ~ N(v, s^2 A^{-1}).
Vector sample_ts_weights(const LinearPosterior &post, Rng &rng);

double log_marginal_likelihood(const Dataset &data, const KernelSpec &kernel, const NoiseParams &noise);
/// Derivative of the log evidence with respect to a common log-scaling of
/// every group lengthscale.
double log_marginal_likelihood_grad_log_lengthscale(const Dataset &data, const KernelSpec &kernel,
                                                    const NoiseParams &noise);

struct HyperFit {
  std::vector<SEKernelParams> group_params;
  NoiseParams noise;
  /// Total (pre-split) amplitude and the shared lengthscale.
  double lengthscale = 1.0;
  double amplitude = 1.0;
  double log_likelihood = 0.0;
};

struct HyperGrid {
  std::vector<double> lengthscales{0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  std::vector<double> amplitudes{0.5, 1.0, 2.0};
  std::vector<double> noise_variances{1e-6, 1e-4, 1e-2};
};

/// Grid search of the log evidence. Inputs are expected in [0,1]^d and values
/// standardized. Every group shares one lengthscale and gets amplitude / G.
HyperFit fit_hyperparams(const Dataset &data, const Decomposition &decomp,
                         const HyperGrid &grid = HyperGrid{});

} // namespace addbo
