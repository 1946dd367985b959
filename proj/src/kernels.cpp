#include "addbo/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

namespace addbo {

namespace {

// One range reduction for both values where the C library offers it.
std::pair<double, double> cos_sin(double a) {
#if defined(__GLIBC__)
  double s, c;
  ::sincos(a, &s, &c);
  return {c, s};
#else
  return {std::cos(a), std::sin(a)};
#endif
}

} // namespace

void SEKernelParams::validate() const {
  if (!(lengthscale > 0.0))
    throw UsageError("SEKernelParams: lengthscale must be positive");
  if (!(amplitude > 0.0))
    throw UsageError("SEKernelParams: amplitude must be positive");
}

KernelSpec::KernelSpec(Decomposition decomp, std::vector<SEKernelParams> params)
    : decomp_(std::move(decomp)), params_(std::move(params)) {
  if (static_cast<Index>(params_.size()) != decomp_.num_groups())
    throw UsageError("KernelSpec: need one parameter set per group");
  for (const auto &p : params_)
    p.validate();
}

KernelSpec KernelSpec::full(Index dim, SEKernelParams params) {
  return {Decomposition::single(dim), {params}};
}

KernelSpec KernelSpec::additive(Decomposition decomp, std::vector<SEKernelParams> params) {
  return {std::move(decomp), std::move(params)};
}

double KernelSpec::operator()(const Eigen::Ref<const Vector> &x,
                              const Eigen::Ref<const Vector> &x2) const {
  if (decomp_.num_groups() == 1)
    return se_kernel(x, x2, params_.front());
  return additive_kernel(x, x2, decomp_, params_);
}

double KernelSpec::prior_variance() const {
  double v = 0.0;
  for (const auto &p : params_)
    v += p.amplitude;
  return v;
}

Matrix squared_distances(const Eigen::Ref<const Matrix> &a, const Eigen::Ref<const Matrix> &b) {
  if (a.rows() != b.rows())
    throw UsageError("squared_distances: dimension mismatch");
  const Vector an = a.colwise().squaredNorm().transpose();
  const Vector bn = b.colwise().squaredNorm().transpose();
  Matrix d(a.cols(), b.cols());
  d.noalias() = a.transpose() * b;
  for (Index c = 0; c < d.cols(); ++c)
    d.col(c) = (an.array() + bn[c] - 2.0 * d.col(c).array()).cwiseMax(0.0).matrix();
  return d;
}

Matrix KernelSpec::cross(const Eigen::Ref<const Matrix> &a, const Eigen::Ref<const Matrix> &b) const {
  if (a.rows() != dim() || b.rows() != dim())
    throw UsageError("KernelSpec::cross: dimension mismatch");
  if (decomp_.num_groups() == 1) {
    const auto &p = params_.front();
    Matrix out = squared_distances(a, b);
    out.array() = p.amplitude * (out.array() * (-0.5 / (p.lengthscale * p.lengthscale))).exp();
    return out;
  }
  Matrix out = Matrix::Zero(a.cols(), b.cols());
  for (Index j = 0; j < decomp_.num_groups(); ++j) {
    const auto &p = params_[static_cast<std::size_t>(j)];
    const double scale = -0.5 / (p.lengthscale * p.lengthscale);
    const auto &g = decomp_.group(j);
    const Matrix ag = a(g, Eigen::all);
    const Matrix bg = b(g, Eigen::all);
    out.array() += p.amplitude * (scale * squared_distances(ag, bg).array()).exp();
  }
  return out;
}

FeatureMap::FeatureMap(FeatureKind kind, Matrix frequencies, Vector weights)
    : kind_(kind), frequencies_(std::move(frequencies)), weights_(std::move(weights)) {
  if (frequencies_.rows() < 1 || frequencies_.cols() < 1)
    throw UsageError("FeatureMap: need at least one frequency of dimension >= 1");
  if (weights_.size() != frequencies_.rows())
    throw UsageError("FeatureMap: one weight per frequency required");
  if ((weights_.array() < 0.0).any())
    throw UsageError("FeatureMap: weights must be non-negative");
  sqrt_weights_ = weights_.cwiseSqrt();
}

Vector FeatureMap::evaluate_raw(const Eigen::Ref<const Vector> &x) const {
  if (x.size() != group_dim())
    throw UsageError("FeatureMap: point dimension " + std::to_string(x.size()) +
                     " does not match group dimension " + std::to_string(group_dim()));
  const Index m = num_frequencies();
  const Vector proj = frequencies_ * x;
  Vector phi(2 * m);
  for (Index i = 0; i < m; ++i) {
    const auto [c, s] = cos_sin(proj[i]);
    phi[i] = sqrt_weights_[i] * c;
    phi[m + i] = sqrt_weights_[i] * s;
  }
  return phi;
}

Vector FeatureMap::evaluate(const Eigen::Ref<const Vector> &x) const {
  Vector phi = evaluate_raw(x);
  if (kind_ == FeatureKind::Quadrature)
    phi /= phi.norm();
  return phi;
}

Matrix FeatureMap::evaluate_batch(const Eigen::Ref<const Matrix> &x) const {
  if (x.rows() != group_dim())
    throw UsageError("FeatureMap: batch point dimension does not match group dimension");
  const Index m = num_frequencies();
  const Matrix proj = frequencies_ * x;
  Matrix phi(2 * m, x.cols());
  for (Index col = 0; col < x.cols(); ++col)
    for (Index i = 0; i < m; ++i) {
      const auto [c, s] = cos_sin(proj(i, col));
      phi(i, col) = sqrt_weights_[i] * c;
      phi(m + i, col) = sqrt_weights_[i] * s;
    }
  if (kind_ == FeatureKind::Quadrature)
    phi.array().rowwise() /= phi.colwise().norm().array();
  return phi;
}

FeatureMap sample_rff(Index group_dim, Index m, const SEKernelParams &params, Rng &rng) {
  params.validate();
  if (m < 1)
    throw UsageError("sample_rff: m must be >= 1");
  if (group_dim < 1)
    throw UsageError("sample_rff: group_dim must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0 / params.lengthscale);
  Matrix w(m, group_dim);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < group_dim; ++k)
      w(i, k) = normal(rng);
  return {FeatureKind::Random, std::move(w), Vector::Constant(m, 1.0 / static_cast<double>(m))};
}

void gauss_hermite(Index n, Vector &nodes, Vector &weights) {
  if (n < 1)
    throw UsageError("gauss_hermite: need at least one node");
  // Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
  Matrix jacobi = Matrix::Zero(n, n);
  for (Index i = 1; i < n; ++i) {
    const double b = std::sqrt(static_cast<double>(i) / 2.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  nodes = es.eigenvalues();
  weights = std::sqrt(M_PI) * es.eigenvectors().row(0).transpose().array().square().matrix();
}

FeatureMap build_qff(Index group_dim, Index nodes_per_dim, const SEKernelParams &params) {
  params.validate();
  if (group_dim < 1)
    throw UsageError("build_qff: group_dim must be >= 1");
  if (group_dim > 2)
    throw UnsupportedError("build_qff: quadrature features support group dimension <= 2, got " +
                           std::to_string(group_dim));
  if (nodes_per_dim < 1)
    throw UsageError("build_qff: nodes_per_dim must be >= 1");

  Vector nodes, weights;
  gauss_hermite(nodes_per_dim, nodes, weights);
  // Substituting w = sqrt(2) u / l turns the SE spectral integral into a
  // Gauss-Hermite integral with normalized weights w_i / sqrt(pi).
  const Index n = nodes_per_dim;
  Vector freq(n), wnorm(n);
  for (Index i = 0; i < n; ++i) {
    // The rule is symmetric about zero; enforce it exactly before folding.
    freq[i] = 0.5 * (nodes[i] - nodes[n - 1 - i]) * (std::sqrt(2.0) / params.lengthscale);
    wnorm[i] = 0.5 * (weights[i] + weights[n - 1 - i]) / std::sqrt(M_PI);
  }
  // Frequencies f and -f give identical cos/sin pair products, so each
  // mirrored pair is folded into one frequency with twice the weight.
  auto mirror = [n](Index i) { return n - 1 - i; };
  std::vector<std::vector<Index>> keep;
  if (group_dim == 1) {
    for (Index a = 0; a < n; ++a)
      if (a >= mirror(a))
        keep.push_back({a});
  } else {
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        if (a > mirror(a) || (a == mirror(a) && b >= mirror(b)))
          keep.push_back({a, b});
  }
  const Index m = static_cast<Index>(keep.size());
  Matrix f(m, group_dim);
  Vector w(m);
  for (Index r = 0; r < m; ++r) {
    const auto &idx = keep[static_cast<std::size_t>(r)];
    double weight = 1.0;
    bool self_mirror = true;
    for (Index k = 0; k < group_dim; ++k) {
      const Index a = idx[static_cast<std::size_t>(k)];
      f(r, k) = freq[a];
      weight *= wnorm[a];
      self_mirror = self_mirror && a == mirror(a);
    }
    w[r] = self_mirror ? weight : 2.0 * weight;
  }
  return {FeatureKind::Quadrature, std::move(f), std::move(w)};
}

} // namespace addbo
