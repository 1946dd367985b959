#include "addbo/gp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace addbo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// In-place rank-1 update of a lower Cholesky factor: L L^T + x x^T.
void chol_rank1_update(Matrix &L, Vector x) {
  const Index n = L.rows();
  for (Index k = 0; k < n; ++k) {
    const double lkk = L(k, k);
    const double r = std::hypot(lkk, x[k]);
    const double c = r / lkk;
    const double s = x[k] / lkk;
    L(k, k) = r;
    const Index rest = n - k - 1;
    if (rest > 0) {
      auto col = L.col(k).tail(rest);
      auto xs = x.tail(rest);
      col = (col + s * xs) / c;
      xs = c * xs - s * col;
    }
  }
}

std::string condition_diagnostics(const Matrix &sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  std::ostringstream os;
  const Vector &ev = es.eigenvalues();
  os << "n=" << sym.rows() << ", min eigenvalue=" << ev.minCoeff()
     << ", max eigenvalue=" << ev.maxCoeff();
  if (ev.minCoeff() > 0)
    os << ", condition=" << ev.maxCoeff() / ev.minCoeff();
  return os.str();
}

} // namespace

Dataset::Dataset(Matrix points, Vector values) : points_(std::move(points)), values_(std::move(values)) {
  if (points_.cols() != values_.size())
    throw UsageError("Dataset: number of points and values differ");
}

void Dataset::add(const Eigen::Ref<const Vector> &x, double y) {
  if (points_.rows() == 0 && points_.cols() == 0)
    points_.resize(x.size(), 0);
  if (x.size() != points_.rows())
    throw UsageError("Dataset::add: point dimension mismatch");
  const Index t = points_.cols();
  points_.conservativeResize(Eigen::NoChange, t + 1);
  points_.col(t) = x;
  values_.conservativeResize(t + 1);
  values_[t] = y;
}

void NoiseParams::validate() const {
  if (!(variance >= 0.0))
    throw UsageError("NoiseParams: noise variance must be >= 0");
}

OutputScaling OutputScaling::fit(const Eigen::Ref<const Vector> &y) {
  OutputScaling s;
  if (y.size() == 0)
    return s;
  s.mean = y.mean();
  const double var = (y.array() - s.mean).square().mean();
  s.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  return s;
}

JitteredCholesky factorize_with_jitter(const Matrix &sym, double base_jitter, const char *context) {
  JitteredCholesky out;
  double jitter = base_jitter;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Matrix m = sym;
    m.diagonal().array() += jitter;
    out.llt.compute(m);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
    jitter *= 10.0;
  }
  throw NumericalError(std::string(context) + ": Cholesky failed after jitter escalation (" +
                       condition_diagnostics(sym) + ")");
}

ExactPosterior::ExactPosterior(Dataset data, KernelSpec kernel, NoiseParams noise, JitteredCholesky chol,
                               Vector alpha)
    : data_(std::move(data)), kernel_(std::move(kernel)), noise_(noise), chol_(std::move(chol)),
      alpha_(std::move(alpha)) {}

ExactPosterior fit_exact(const Dataset &data, const KernelSpec &kernel, const NoiseParams &noise) {
  noise.validate();
  if (data.size() < 1)
    throw UsageError("fit_exact: at least one observation required");
  if (data.dim() != kernel.dim())
    throw UsageError("fit_exact: data dimension does not match kernel");
  Matrix k = kernel.cross(data.points(), data.points());
  k.diagonal().array() += noise.variance;
  auto chol = factorize_with_jitter(k, 1e-8 * kernel.prior_variance(), "fit_exact");
  Vector alpha = chol.llt.solve(data.values());
  // refine against the unjittered system; stop as soon as it stops helping
  Vector residual = data.values() - k * alpha;
  for (int step = 0; step < 3; ++step) {
    const Vector candidate = alpha + chol.llt.solve(residual);
    Vector next = data.values() - k * candidate;
    if (next.norm() >= residual.norm())
      break;
    alpha = candidate;
    residual = std::move(next);
  }
  return {data, kernel, noise, std::move(chol), std::move(alpha)};
}

void ExactPosterior::predict_batch(const Eigen::Ref<const Matrix> &x, Vector &mean, Vector &variance) const {
  const Matrix ks = kernel_.cross(data_.points(), x);
  mean = ks.transpose() * alpha_;
  const Matrix v = chol_.llt.matrixL().solve(ks);
  variance = (kernel_.prior_variance() - v.colwise().squaredNorm().array()).cwiseMax(0.0).matrix().transpose();
}

Prediction predict_exact(const ExactPosterior &post, const Eigen::Ref<const Vector> &x) {
  Vector mean, var;
  post.predict_batch(x, mean, var);
  return {mean[0], var[0]};
}

FeatureStack::FeatureStack(Decomposition decomp, std::vector<FeatureMap> maps, std::vector<double> amplitudes)
    : decomp_(std::move(decomp)), maps_(std::move(maps)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<Index>(maps_.size()) != decomp_.num_groups())
    throw UsageError("FeatureStack: need one feature map per group");
  if (amplitudes_.size() != maps_.size())
    throw UsageError("FeatureStack: need one amplitude per group");
  offsets_.push_back(0);
  for (Index j = 0; j < decomp_.num_groups(); ++j) {
    if (maps_[static_cast<std::size_t>(j)].group_dim() != static_cast<Index>(decomp_.group(j).size()))
      throw UsageError("FeatureStack: map " + std::to_string(j) + " has the wrong group dimension");
    if (!(amplitudes_[static_cast<std::size_t>(j)] > 0.0))
      throw UsageError("FeatureStack: amplitudes must be positive");
    offsets_.push_back(offsets_.back() + maps_[static_cast<std::size_t>(j)].feature_dim());
  }
}

FeatureStack::FeatureStack(Decomposition decomp, std::vector<FeatureMap> maps)
    : FeatureStack(decomp, maps, std::vector<double>(maps.size(), 1.0)) {}

Vector FeatureStack::evaluate_group(Index j, const Eigen::Ref<const Vector> &xj) const {
  return std::sqrt(amplitude(j)) * map(j).evaluate(xj);
}

Matrix FeatureStack::evaluate_group_batch(Index j, const Eigen::Ref<const Matrix> &xj) const {
  Matrix phi = map(j).evaluate_batch(xj);
  phi *= std::sqrt(amplitude(j));
  return phi;
}

Vector FeatureStack::evaluate(const Eigen::Ref<const Vector> &x) const {
  if (x.size() != decomp_.dim())
    throw UsageError("FeatureStack: point dimension mismatch");
  Vector phi(feature_dim());
  for (Index j = 0; j < num_groups(); ++j)
    phi.segment(offset(j), block_size(j)) = evaluate_group(j, decomp_.slice(x, j));
  return phi;
}

LinearPosterior::LinearPosterior(FeatureStack stack, NoiseParams noise)
    : stack_(std::move(stack)), noise_(noise) {
  noise_.validate();
  if (!(noise_.variance > 0.0))
    throw UsageError("linear posterior needs a positive noise variance (use at least " +
                     std::to_string(kLinearNoiseFloor) + ")");
  noise_.variance = std::max(noise_.variance, kLinearNoiseFloor);
  const Index m = stack_.feature_dim();
  chol_ = Matrix::Identity(m, m) * std::sqrt(noise_.variance);
  features_.resize(0, m);
  phi_ty_ = Vector::Zero(m);
  v_ = Vector::Zero(m);
}

void LinearPosterior::add(const Eigen::Ref<const Vector> &x, double y) {
  const Vector phi = stack_.evaluate(x);
  chol_rank1_update(chol_, phi);
  const Index t = features_.rows();
  features_.conservativeResize(t + 1, Eigen::NoChange);
  features_.row(t) = phi.transpose();
  phi_ty_ += y * phi;
  refresh_mean();
}

void LinearPosterior::refresh_mean() {
  v_ = chol_.triangularView<Eigen::Lower>().solve(phi_ty_);
  chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(v_);
}

Matrix LinearPosterior::system_matrix() const {
  const Matrix L = chol_.triangularView<Eigen::Lower>();
  return L * L.transpose();
}

Prediction LinearPosterior::predict_features(const Eigen::Ref<const Vector> &phi) const {
  const Vector z = chol_.triangularView<Eigen::Lower>().solve(phi);
  return {phi.dot(v_), noise_.variance * z.squaredNorm()};
}

Vector LinearPosterior::variance_batch(const Eigen::Ref<const Matrix> &phi) const {
  const Matrix z = chol_.triangularView<Eigen::Lower>().solve(phi);
  return noise_.variance * z.colwise().squaredNorm().transpose();
}

std::vector<Matrix> LinearPosterior::group_covariance_blocks() const {
  std::vector<Matrix> blocks;
  const Index t = count();
  const Index m = feature_dim();
  blocks.reserve(static_cast<std::size_t>(stack_.num_groups()));
  if (t < m) {
    // s^2 A^{-1} = I - Phi^T (Phi Phi^T + s^2 I)^{-1} Phi
    Matrix gram = features_ * features_.transpose();
    gram.diagonal().array() += noise_.variance;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw NumericalError("group_covariance_blocks: dual system not positive definite");
    for (Index j = 0; j < stack_.num_groups(); ++j) {
      const Index b = stack_.block_size(j);
      const Matrix w = llt.matrixL().solve(features_.middleCols(stack_.offset(j), b));
      Matrix block = -(w.transpose() * w);
      block.diagonal().array() += 1.0;
      blocks.push_back(std::move(block));
    }
  } else {
    const Matrix linv = chol_.triangularView<Eigen::Lower>().solve(Matrix::Identity(m, m));
    for (Index j = 0; j < stack_.num_groups(); ++j) {
      const auto cols = linv.middleCols(stack_.offset(j), stack_.block_size(j));
      blocks.push_back(noise_.variance * (cols.transpose() * cols));
    }
  }
  return blocks;
}

void LinearPosterior::add_all(const Dataset &data) {
  const Index n = data.size();
  if (n == 0)
    return;
  const Index m = feature_dim();
  const bool fresh = features_.rows() == 0;
  if (!fresh && 3 * n < m) {
    for (Index i = 0; i < n; ++i)
      add(data.point(i), data.value(i));
    return;
  }
  Matrix phi(n, m);
  for (Index i = 0; i < n; ++i)
    phi.row(i) = stack_.evaluate(data.point(i)).transpose();
  Matrix a = fresh ? Matrix(Matrix::Identity(m, m) * noise_.variance) : system_matrix();
  a.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("LinearPosterior: system matrix not positive definite");
  chol_ = llt.matrixL();
  const Index t = features_.rows();
  features_.conservativeResize(t + n, Eigen::NoChange);
  features_.bottomRows(n) = phi;
  phi_ty_ += phi.transpose() * data.values();
  refresh_mean();
}

LinearPosterior fit_linear(const Dataset &data, const FeatureStack &stack, const NoiseParams &noise) {
  LinearPosterior post(stack, noise);
  post.add_all(data);
  return post;
}

LinearPosterior update_linear(const LinearPosterior &post, const Eigen::Ref<const Vector> &x, double y) {
  LinearPosterior next = post;
  next.add(x, y);
  return next;
}

Prediction predict_linear(const LinearPosterior &post, const Eigen::Ref<const Vector> &x) {
  return post.predict_features(post.stack().evaluate(x));
}

Vector sample_ts_weights(const LinearPosterior &post, Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index m = post.feature_dim();
  Vector z(m);
  for (Index i = 0; i < m; ++i)
    z[i] = normal(rng);
  const Matrix &L = post.chol_factor();
  const Vector offset = L.transpose().triangularView<Eigen::Upper>().solve(z);
  return post.v() + std::sqrt(post.noise().variance) * offset;
}

namespace {

struct Evidence {
  JitteredCholesky chol;
  Vector alpha;
  Matrix gram;
};

Evidence factor_evidence(const Dataset &data, const KernelSpec &kernel, const NoiseParams &noise) {
  noise.validate();
  if (data.size() < 2)
    throw UsageError("log_marginal_likelihood: at least two observations required");
  Matrix k = kernel.cross(data.points(), data.points());
  k.diagonal().array() += noise.variance;
  auto chol = factorize_with_jitter(k, 1e-8 * kernel.prior_variance(), "log_marginal_likelihood");
  Vector alpha = chol.llt.solve(data.values());
  return {std::move(chol), std::move(alpha), std::move(k)};
}

double evidence_from_factor(const Eigen::LLT<Matrix> &llt, const Vector &y) {
  const Vector z = llt.matrixL().solve(y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

} // namespace

double log_marginal_likelihood(const Dataset &data, const KernelSpec &kernel, const NoiseParams &noise) {
  const auto ev = factor_evidence(data, kernel, noise);
  return evidence_from_factor(ev.chol.llt, data.values());
}

double log_marginal_likelihood_grad_log_lengthscale(const Dataset &data, const KernelSpec &kernel,
                                                    const NoiseParams &noise) {
  const auto ev = factor_evidence(data, kernel, noise);
  const Index t = data.size();
  Matrix dk = Matrix::Zero(t, t);
  const auto &decomp = kernel.decomposition();
  for (Index j = 0; j < decomp.num_groups(); ++j) {
    const auto &p = kernel.params()[static_cast<std::size_t>(j)];
    const Matrix pts = data.points()(decomp.group(j), Eigen::all);
    const Matrix d2 = squared_distances(pts, pts);
    const double l2 = p.lengthscale * p.lengthscale;
    dk.array() += p.amplitude * (-0.5 * d2.array() / l2).exp() * d2.array() / l2;
  }
  const Matrix kinv = ev.chol.llt.solve(Matrix::Identity(t, t));
  return 0.5 * (ev.alpha.dot(dk * ev.alpha) - (kinv.cwiseProduct(dk)).sum());
}

HyperFit fit_hyperparams(const Dataset &data, const Decomposition &decomp, const HyperGrid &grid) {
  if (data.size() < 5)
    throw UsageError("fit_hyperparams: at least five observations required");
  if (data.dim() != decomp.dim())
    throw UsageError("fit_hyperparams: data dimension does not match decomposition");
  const Index t = data.size();
  const Index groups = decomp.num_groups();

  std::vector<Matrix> dist;
  dist.reserve(static_cast<std::size_t>(groups));
  for (Index j = 0; j < groups; ++j) {
    const Matrix pts = data.points()(decomp.group(j), Eigen::all);
    dist.push_back(squared_distances(pts, pts));
  }

  std::vector<double> lengths = grid.lengthscales;
  std::sort(lengths.begin(), lengths.end(), std::greater<>());

  HyperFit best;
  bool have = false;
  for (double l : lengths) {
    // Sum of unit-amplitude group kernels for this lengthscale.
    Matrix base = Matrix::Zero(t, t);
    for (const auto &d2 : dist)
      base.array() += (-0.5 / (l * l) * d2.array()).exp();
    for (double amp : grid.amplitudes) {
      const double group_amp = amp / static_cast<double>(groups);
      for (double nv : grid.noise_variances) {
        Matrix k = group_amp * base;
        k.diagonal().array() += nv;
        double lml;
        try {
          const auto chol = factorize_with_jitter(k, 1e-8 * amp, "fit_hyperparams");
          lml = evidence_from_factor(chol.llt, data.values());
        } catch (const NumericalError &) {
          continue;
        }
        if (!have || lml > best.log_likelihood) {
          have = true;
          best.log_likelihood = lml;
          best.lengthscale = l;
          best.amplitude = amp;
          best.noise.variance = nv;
        }
      }
    }
  }
  if (!have)
    throw NumericalError("fit_hyperparams: no grid point could be factorized");
  best.group_params.assign(static_cast<std::size_t>(groups),
                           SEKernelParams{best.lengthscale, best.amplitude / static_cast<double>(groups)});
  return best;
}

} // namespace addbo
