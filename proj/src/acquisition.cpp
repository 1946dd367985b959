#include "addbo/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace addbo {

std::string to_string(AcquisitionKind kind) {
  switch (kind) {
  case AcquisitionKind::TS:
    return "ts";
  case AcquisitionKind::LCB:
    return "lcb";
  case AcquisitionKind::UCB:
    return "ucb";
  case AcquisitionKind::EI:
    return "ei";
  }
  return "?";
}

AcquisitionKind parse_acquisition(const std::string &name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "ts")
    return AcquisitionKind::TS;
  if (s == "lcb")
    return AcquisitionKind::LCB;
  if (s == "ucb")
    return AcquisitionKind::UCB;
  if (s == "ei")
    return AcquisitionKind::EI;
  throw UsageError("unknown acquisition '" + name + "' (expected ts, lcb, ucb or ei)");
}

void AcquisitionSpec::validate() const {
  if (!(delta > 0.0 && delta < 1.0))
    throw UsageError("AcquisitionSpec: delta must lie in (0,1)");
  if (!(xi >= 0.0))
    throw UsageError("AcquisitionSpec: xi must be >= 0");
}

double beta_schedule(Index t, Index d_eff, double delta) {
  if (t < 1)
    throw UsageError("beta_schedule: t must be >= 1");
  if (d_eff < 1)
    throw UsageError("beta_schedule: d_eff must be >= 1");
  const double tt = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(d_eff) * tt * tt * M_PI * M_PI / (6.0 * delta));
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ei(double mean, double stddev, double best, double xi) {
  const double gain = best - xi - mean;
  if (!(stddev > 0.0))
    return std::max(gain, 0.0);
  const double z = gain / stddev;
  return std::max(gain * normal_cdf(z) + stddev * normal_pdf(z), 0.0);
}

namespace {

double evaluate_one(const BatchObjective &objective, const Vector &x) { return objective(x)[0]; }

// Golden-section maximization of objective along coordinate i on [lo, hi].
// Returns the best abscissa among the interior search and both endpoints.
std::pair<double, double> golden_line(const BatchObjective &objective, Vector x, Index i, double lo, double hi,
                                      int iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto at = [&](double s) {
    x[i] = s;
    return evaluate_one(objective, x);
  };
  double best_s = lo;
  double best_v = at(lo);
  const double vhi = at(hi);
  if (vhi > best_v) {
    best_v = vhi;
    best_s = hi;
  }
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = at(c), fd = at(d);
  for (int k = 0; k < iterations; ++k) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = at(d);
    }
  }
  if (fc > best_v) {
    best_v = fc;
    best_s = c;
  }
  if (fd > best_v) {
    best_v = fd;
    best_s = d;
  }
  return {best_s, best_v};
}

} // namespace

InnerResult maximize_in_box(const BatchObjective &objective, const SearchSpace &box, Rng &rng,
                            const InnerSolverOptions &options) {
  const Index dim = box.dim();
  const Index total = std::max<Index>(1, options.samples_per_dim * dim);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector width = box.width();

  InnerResult best;
  bool have = false;
  for (Index start = 0; start < total; start += options.chunk) {
    const Index n = std::min(options.chunk, total - start);
    Matrix cand(dim, n);
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < dim; ++r)
        cand(r, c) = box.lower()[r] + unif(rng) * width[r];
    const Vector vals = objective(cand);
    for (Index c = 0; c < n; ++c) {
      if (!have || vals[c] > best.value) {
        have = true;
        best.value = vals[c];
        best.point = cand.col(c);
      }
    }
  }

  double h = 1.0;
  for (int round = 0; round < options.rounds; ++round) {
    h *= options.shrink;
    for (Index i = 0; i < dim; ++i) {
      const double lo = std::max(box.lower()[i], best.point[i] - h * width[i]);
      const double hi = std::min(box.upper()[i], best.point[i] + h * width[i]);
      if (!(hi > lo))
        continue;
      const auto [s, v] = golden_line(objective, best.point, i, lo, hi, options.golden_iterations);
      if (v > best.value) {
        best.value = v;
        best.point[i] = s;
      }
    }
  }
  best.point = box.clamp(best.point);
  return best;
}

GroupProposal propose_group_ts(Index j, const Eigen::Ref<const Vector> &theta, const FeatureStack &stack,
                               const SearchSpace &group_box, Rng &rng, const InnerSolverOptions &options) {
  if (theta.size() != stack.feature_dim())
    throw UsageError("propose_group_ts: theta length does not match the feature stack");
  const Vector theta_j = theta.segment(stack.offset(j), stack.block_size(j));
  const BatchObjective g = [&](const Eigen::Ref<const Matrix> &x) -> Vector {
    return stack.evaluate_group_batch(j, x).transpose() * theta_j;
  };
  auto res = maximize_in_box(g, group_box, rng, options);
  return {j, std::move(res.point), res.value};
}

void GroupSurrogate::predict(const FeatureStack &stack, const Eigen::Ref<const Matrix> &xj, Vector &mean,
                             Vector &variance) const {
  const Matrix phi = stack.evaluate_group_batch(group, xj);
  mean = phi.transpose() * weights;
  variance = (covariance * phi).cwiseProduct(phi).colwise().sum().transpose().cwiseMax(0.0);
}

std::vector<GroupSurrogate> group_surrogates(const LinearPosterior &post) {
  const auto &stack = post.stack();
  auto blocks = post.group_covariance_blocks();
  std::vector<GroupSurrogate> out;
  out.reserve(blocks.size());
  for (Index j = 0; j < stack.num_groups(); ++j)
    out.push_back({j, post.v().segment(stack.offset(j), stack.block_size(j)),
                   std::move(blocks[static_cast<std::size_t>(j)])});
  return out;
}

GroupProposal propose_group_analytic(const GroupSurrogate &surrogate, AcquisitionSpec acq, const FeatureStack &stack,
                                     double beta, double best, const SearchSpace &group_box, Rng &rng,
                                     const InnerSolverOptions &options) {
  if (acq.kind == AcquisitionKind::TS)
    throw UsageError("propose_group_analytic: Thompson sampling has no analytic group acquisition");
  const BatchObjective g = [&](const Eigen::Ref<const Matrix> &x) -> Vector {
    Vector mean, var;
    surrogate.predict(stack, x, mean, var);
    Vector out(mean.size());
    for (Index i = 0; i < mean.size(); ++i) {
      const double sd = std::sqrt(var[i]);
      switch (acq.kind) {
      case AcquisitionKind::LCB:
        out[i] = -lcb(mean[i], sd, beta);
        break;
      case AcquisitionKind::UCB:
        out[i] = ucb(mean[i], sd, beta);
        break;
      default:
        out[i] = ei(mean[i], sd, best, acq.xi);
        break;
      }
    }
    return out;
  };
  auto res = maximize_in_box(g, group_box, rng, options);
  return {surrogate.group, std::move(res.point), res.value};
}

GroupProposal propose_group_analytic(Index j, AcquisitionSpec acq, const LinearPosterior &post, double beta,
                                     double best, const SearchSpace &group_box, Rng &rng,
                                     const InnerSolverOptions &options) {
  const auto surrogates = group_surrogates(post);
  return propose_group_analytic(surrogates.at(static_cast<std::size_t>(j)), acq, post.stack(), beta, best,
                                group_box, rng, options);
}

Vector assemble_point(const std::vector<GroupProposal> &proposals, const Decomposition &decomp) {
  if (static_cast<Index>(proposals.size()) != decomp.num_groups())
    throw UsageError("assemble_point: expected one proposal per group");
  std::vector<int> seen(static_cast<std::size_t>(decomp.num_groups()), 0);
  Vector x(decomp.dim());
  for (const auto &p : proposals) {
    if (p.group < 0 || p.group >= decomp.num_groups())
      throw UsageError("assemble_point: group index out of range");
    if (seen[static_cast<std::size_t>(p.group)]++)
      throw UsageError("assemble_point: duplicate proposal for group " + std::to_string(p.group));
    const auto &g = decomp.group(p.group);
    if (p.point.size() != static_cast<Index>(g.size()))
      throw UsageError("assemble_point: proposal dimension does not match its group");
    x(g) = p.point;
  }
  return x;
}

Matrix product_grid(const SearchSpace &box, Index per_axis) {
  if (per_axis < 2)
    throw UsageError("product_grid: need at least two nodes per axis");
  const Index dim = box.dim();
  Index n = 1;
  for (Index i = 0; i < dim; ++i)
    n *= per_axis;
  Matrix grid(dim, n);
  for (Index c = 0; c < n; ++c) {
    Index rem = c;
    for (Index i = dim - 1; i >= 0; --i) {
      const Index k = rem % per_axis;
      rem /= per_axis;
      grid(i, c) = box.lower()[i] + (box.upper()[i] - box.lower()[i]) * static_cast<double>(k) /
                                        static_cast<double>(per_axis - 1);
    }
  }
  return grid;
}

Vector grid_argmax_by_group(const Eigen::Ref<const Vector> &theta, const FeatureStack &stack, const SearchSpace &box,
                            Index per_axis) {
  const auto &decomp = stack.decomposition();
  std::vector<GroupProposal> props;
  for (Index j = 0; j < decomp.num_groups(); ++j) {
    const SearchSpace gbox = box.restrict(decomp.group(j));
    const Matrix grid = product_grid(gbox, per_axis);
    const Vector vals = stack.evaluate_group_batch(j, grid).transpose() *
                        theta.segment(stack.offset(j), stack.block_size(j));
    Index arg = 0;
    vals.maxCoeff(&arg);
    props.push_back({j, grid.col(arg), vals[arg]});
  }
  return assemble_point(props, decomp);
}

} // namespace addbo
