#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace addbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Caller passed arguments that violate an operation's preconditions.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization or solve failed even after regularization.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested configuration is outside what is implemented (e.g. QFF in 3-D).
class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box [lower, upper] in R^d.
class SearchSpace {
public:
  SearchSpace(Vector lower, Vector upper);

  static SearchSpace unit(Index d) { return {Vector::Zero(d), Vector::Ones(d)}; }
  static SearchSpace uniform(Index d, double lo, double hi) {
    return {Vector::Constant(d, lo), Vector::Constant(d, hi)};
  }

  Index dim() const { return lower_.size(); }
  const Vector &lower() const { return lower_; }
  const Vector &upper() const { return upper_; }
  Vector width() const { return upper_ - lower_; }

  bool contains(const Eigen::Ref<const Vector> &x) const;
  Vector clamp(const Eigen::Ref<const Vector> &x) const;

  /// Affine map to and from [0,1]^d.
  Vector to_unit(const Eigen::Ref<const Vector> &x) const;
  Vector from_unit(const Eigen::Ref<const Vector> &u) const;

  /// Box of the coordinates listed in `indices`.
  SearchSpace restrict(const std::vector<Index> &indices) const;

private:
  Vector lower_;
  Vector upper_;
};

/// Disjoint coordinate groups that partition {0..d-1}.
class Decomposition {
public:
  Decomposition(std::vector<std::vector<Index>> groups, Index dim);

  /// One group holding every coordinate.
  static Decomposition single(Index d);
  /// One group per coordinate.
  static Decomposition singletons(Index d);
  /// Consecutive blocks of `block` coordinates (d must be a multiple).
  static Decomposition blocks(Index d, Index block);

  Index dim() const { return dim_; }
  Index num_groups() const { return static_cast<Index>(groups_.size()); }
  Index effective_dim() const { return effective_dim_; }
  const std::vector<Index> &group(Index j) const { return groups_[j]; }
  const std::vector<std::vector<Index>> &groups() const { return groups_; }

  /// Coordinates of `x` belonging to group j, in group order.
  Vector slice(const Eigen::Ref<const Vector> &x, Index j) const;

private:
  std::vector<std::vector<Index>> groups_;
  Index dim_ = 0;
  Index effective_dim_ = 0;
};

std::string describe(const Decomposition &decomp);

} // namespace addbo
