#pragma once

#include "addbo/gp.hpp"

#include <functional>
#include <string>
#include <vector>

namespace addbo {

enum class AcquisitionKind { TS, LCB, UCB, EI };

std::string to_string(AcquisitionKind kind);
/// Accepts "ts", "lcb", "ucb", "ei" (case-insensitive).
AcquisitionKind parse_acquisition(const std::string &name);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::TS;
  double delta = 0.1;
  double xi = 0.0;

  void validate() const;
};

struct GroupProposal {
  Index group = 0;
  Vector point;
  double value = 0.0;
};

/// 2 log(d_eff t^2 pi^2 / (6 delta))
double beta_schedule(Index t, Index d_eff, double delta);

inline double lcb(double mean, double stddev, double beta) { return mean - std::sqrt(beta) * stddev; }
inline double ucb(double mean, double stddev, double beta) { return mean + std::sqrt(beta) * stddev; }

/// Expected improvement below `best` (minimization form).
double ei(double mean, double stddev, double best, double xi);

double normal_pdf(double z);
double normal_cdf(double z);

/// Vectorized objective: columns of a (dim x n) matrix to n values.
using BatchObjective = std::function<Vector(const Eigen::Ref<const Matrix> &)>;

/// Derivative-free box maximizer: uniform random search followed by rounds of
/// coordinate-wise golden-section refinement around the incumbent.
struct InnerSolverOptions {
  Index samples_per_dim = 256;
  int rounds = 3;
  double shrink = 0.25;
  int golden_iterations = 20;
  /// Columns evaluated per batch call during random search.
  Index chunk = 4096;
};

struct InnerResult {
  Vector point;
  double value = 0.0;
};

InnerResult maximize_in_box(const BatchObjective &objective, const SearchSpace &box, Rng &rng,
                            const InnerSolverOptions &options = {});

/// Maximizes theta_j . phi_j(x) over the group box.
GroupProposal propose_group_ts(Index j, const Eigen::Ref<const Vector> &theta, const FeatureStack &stack,
                               const SearchSpace &group_box, Rng &rng,
                               const InnerSolverOptions &options = {});

/// Group-marginal surrogate: mean phi_j . v_j and variance phi_j^T B_j phi_j
/// where B_j = s^2 (A^{-1})_jj. Cross-group covariance is ignored.
struct GroupSurrogate {
  Index group = 0;
  Vector weights;
  Matrix covariance;

  /// Means and variances at columns of xj (group_dim x n).
  void predict(const FeatureStack &stack, const Eigen::Ref<const Matrix> &xj, Vector &mean,
               Vector &variance) const;
};

std::vector<GroupSurrogate> group_surrogates(const LinearPosterior &post);

/// Maximizes the group-restricted acquisition. LCB and EI are in their
/// minimization form (the returned point minimizes LCB / maximizes EI); UCB
/// is maximized as is.
GroupProposal propose_group_analytic(const GroupSurrogate &surrogate, AcquisitionSpec acq, const FeatureStack &stack,
                                     double beta, double best, const SearchSpace &group_box, Rng &rng,
                                     const InnerSolverOptions &options = {});
GroupProposal propose_group_analytic(Index j, AcquisitionSpec acq, const LinearPosterior &post, double beta,
                                     double best, const SearchSpace &group_box, Rng &rng,
                                     const InnerSolverOptions &options = {});

/// Writes each group's sub-point into a d-vector. Exactly one proposal per group.
Vector assemble_point(const std::vector<GroupProposal> &proposals, const Decomposition &decomp);

/// Points of a regular grid with `per_axis` nodes per coordinate spanning the
/// box, as columns.
Matrix product_grid(const SearchSpace &box, Index per_axis);

/// Per-group argmax of theta_j . phi_j over each group's product grid,
/// assembled into a full point.
Vector grid_argmax_by_group(const Eigen::Ref<const Vector> &theta, const FeatureStack &stack,
                            const SearchSpace &box, Index per_axis);

} // namespace addbo
