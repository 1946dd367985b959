#include "addbo/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace addbo {

std::string to_string(Mode mode) { return mode == Mode::Standard ? "standard" : "additive"; }

Mode parse_mode(const std::string &name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "standard")
    return Mode::Standard;
  if (s == "additive")
    return Mode::Additive;
  throw UsageError("unknown mode '" + name + "' (expected standard or additive)");
}

std::string to_string(FeatureChoice choice) {
  switch (choice) {
  case FeatureChoice::Auto:
    return "auto";
  case FeatureChoice::Random:
    return "rff";
  case FeatureChoice::Quadrature:
    return "qff";
  }
  return "?";
}

FeatureChoice parse_feature_choice(const std::string &name) {
  if (name == "auto")
    return FeatureChoice::Auto;
  if (name == "rff" || name == "random")
    return FeatureChoice::Random;
  if (name == "qff" || name == "quadrature")
    return FeatureChoice::Quadrature;
  throw UsageError("unknown feature kind '" + name + "' (expected auto, rff or qff)");
}

Index default_n0(Mode mode, Index d) { return mode == Mode::Standard ? 2 * d + 2 : 10; }

std::optional<double> Trace::final_best() const {
  if (records.empty())
    return std::nullopt;
  return records.back().best_seen;
}

std::optional<Index> Trace::evaluations_to_best() const {
  const auto best = final_best();
  if (!best)
    return std::nullopt;
  for (const auto &r : records)
    if (r.best_seen && *r.best_seen == *best)
      return r.t;
  return std::nullopt;
}

std::optional<Index> Trace::evaluations_to_reach(double target) const {
  for (const auto &r : records)
    if (r.feasible && r.y <= target)
      return r.t;
  return std::nullopt;
}

double Trace::total_ms() const {
  double s = 0.0;
  for (const auto &r : records)
    s += r.iter_ms;
  return s;
}

std::vector<Vector> initial_design(Index n0, const SearchSpace &space, Rng &rng) {
  if (n0 < 2)
    throw UsageError("initial_design: n0 must be >= 2");
  const Index d = space.dim();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix u(d, n0);
  std::vector<Index> perm(static_cast<std::size_t>(n0));
  for (Index i = 0; i < d; ++i) {
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index k = 0; k < n0; ++k)
      u(i, k) = (static_cast<double>(perm[static_cast<std::size_t>(k)]) + unif(rng)) / static_cast<double>(n0);
  }
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(n0));
  for (Index k = 0; k < n0; ++k)
    pts.push_back(space.clamp(space.from_unit(u.col(k))));
  return pts;
}

std::vector<std::optional<double>> best_seen(const Trace &trace) {
  std::vector<std::optional<double>> out;
  out.reserve(trace.records.size());
  std::optional<double> best;
  for (const auto &r : trace.records) {
    if (r.feasible && (!best || r.y < *best))
      best = r.y;
    out.push_back(best);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kQuadratureNodesPerLengthscale = 8.0;

FeatureMap make_feature_map(Index group_dim, const SEKernelParams &params, const EngineOptions &opt, Rng &rng) {
  FeatureChoice kind = opt.feature_kind;
  if (kind == FeatureChoice::Auto)
    kind = group_dim == 1 ? FeatureChoice::Quadrature : FeatureChoice::Random;
  if (kind == FeatureChoice::Quadrature) {
    Index nodes = opt.features;
    if (group_dim == 2)
      nodes = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(opt.features))));
    // Gauss-Hermite nodes must resolve distances up to the unit-cube diameter.
    const double diameter = std::sqrt(static_cast<double>(group_dim));
    nodes = std::max(nodes, static_cast<Index>(std::ceil(kQuadratureNodesPerLengthscale * diameter / params.lengthscale)));
    return build_qff(group_dim, nodes, params);
  }
  return sample_rff(group_dim, opt.features, params, rng);
}

HyperFit fit_or_default(const Dataset &data, const Decomposition &decomp) {
  if (data.size() >= 5)
    return fit_hyperparams(data, decomp);
  HyperFit hp;
  hp.lengthscale = 0.2;
  hp.amplitude = 1.0;
  hp.noise.variance = 1e-4;
  hp.group_params.assign(static_cast<std::size_t>(decomp.num_groups()),
                         SEKernelParams{hp.lengthscale, hp.amplitude / static_cast<double>(decomp.num_groups())});
  return hp;
}

FeatureStack make_stack(const Decomposition &decomp, const HyperFit &hp, const EngineOptions &opt, Rng &rng) {
  std::vector<FeatureMap> maps;
  std::vector<double> amps;
  for (Index j = 0; j < decomp.num_groups(); ++j) {
    const auto &p = hp.group_params[static_cast<std::size_t>(j)];
    maps.push_back(make_feature_map(static_cast<Index>(decomp.group(j).size()), p, opt, rng));
    amps.push_back(p.amplitude);
  }
  return {decomp, std::move(maps), std::move(amps)};
}

// Surrogate state of one run, working in the unit cube with standardized
// outputs. The standardization is frozen between refits.
class Model {
public:
  virtual ~Model() = default;
  virtual void refit(const Dataset &unit_raw, Rng &rng) = 0;
  virtual void observe(const Vector &u, double y_raw) = 0;
  virtual Vector propose(Rng &rng) = 0;

protected:
  OutputScaling scaling_;
  Dataset data_std_;

  void restandardize(const Dataset &unit_raw) {
    scaling_ = OutputScaling::fit(unit_raw.values());
    data_std_ = Dataset(unit_raw.points(), scaling_.apply(unit_raw.values()));
  }
};

class StandardModel final : public Model {
public:
  StandardModel(Index dim, AcquisitionSpec acq, const EngineOptions &opt)
      : dim_(dim), acq_(acq), opt_(opt), box_(SearchSpace::unit(dim)) {}

  void refit(const Dataset &unit_raw, Rng &rng) override {
    restandardize(unit_raw);
    const auto decomp = Decomposition::single(dim_);
    hp_ = fit_or_default(data_std_, decomp);
    if (acq_.kind == AcquisitionKind::TS) {
      linear_.emplace(fit_linear(data_std_, make_stack(decomp, hp_, opt_, rng), hp_.noise));
    } else {
      kernel_.emplace(KernelSpec::full(dim_, hp_.group_params.front()));
      exact_.emplace(fit_exact(data_std_, *kernel_, hp_.noise));
    }
  }

  void observe(const Vector &u, double y_raw) override {
    const double z = scaling_.apply(y_raw);
    data_std_.add(u, z);
    if (linear_)
      linear_->add(u, z);
    else
      exact_.emplace(fit_exact(data_std_, *kernel_, hp_.noise));
  }

  Vector propose(Rng &rng) override {
    InnerSolverOptions solver = opt_.group_solver;
    solver.samples_per_dim = opt_.full_samples_per_dim;
    BatchObjective objective;
    if (acq_.kind == AcquisitionKind::TS) {
      const Vector theta = sample_ts_weights(*linear_, rng);
      const FeatureStack &stack = linear_->stack();
      objective = [&stack, theta](const Eigen::Ref<const Matrix> &x) -> Vector {
        return -(stack.evaluate_group_batch(0, x).transpose() * theta);
      };
    } else {
      const double beta = beta_schedule(data_std_.size(), dim_, acq_.delta);
      const double best = data_std_.values().minCoeff();
      const ExactPosterior &post = *exact_;
      const AcquisitionSpec acq = acq_;
      objective = [&post, acq, beta, best](const Eigen::Ref<const Matrix> &x) -> Vector {
        Vector mean, var;
        post.predict_batch(x, mean, var);
        Vector out(mean.size());
        for (Index i = 0; i < mean.size(); ++i) {
          const double sd = std::sqrt(var[i]);
          if (acq.kind == AcquisitionKind::LCB)
            out[i] = -lcb(mean[i], sd, beta);
          else if (acq.kind == AcquisitionKind::UCB)
            out[i] = ucb(mean[i], sd, beta);
          else
            out[i] = ei(mean[i], sd, best, acq.xi);
        }
        return out;
      };
    }
    // Same stream layout as a one-group additive proposal.
    Rng solver_rng(rng());
    return maximize_in_box(objective, box_, solver_rng, solver).point;
  }

private:
  Index dim_;
  AcquisitionSpec acq_;
  EngineOptions opt_;
  SearchSpace box_;
  HyperFit hp_;
  std::optional<KernelSpec> kernel_;
  std::optional<ExactPosterior> exact_;
  std::optional<LinearPosterior> linear_;
};

class AdditiveModel final : public Model {
public:
  AdditiveModel(Decomposition decomp, AcquisitionSpec acq, const EngineOptions &opt, TraceMeta &meta)
      : decomp_(std::move(decomp)), acq_(acq), opt_(opt), meta_(meta), box_(SearchSpace::unit(decomp_.dim())) {
    for (Index j = 0; j < decomp_.num_groups(); ++j)
      group_boxes_.push_back(box_.restrict(decomp_.group(j)));
  }

  void refit(const Dataset &unit_raw, Rng &rng) override {
    restandardize(unit_raw);
    const HyperFit hp = fit_or_default(data_std_, decomp_);
    linear_.emplace(fit_linear(data_std_, make_stack(decomp_, hp, opt_, rng), hp.noise));
  }

  void observe(const Vector &u, double y_raw) override {
    const double z = scaling_.apply(y_raw);
    data_std_.add(u, z);
    linear_->add(u, z);
  }

  Vector propose(Rng &rng) override {
    ++iteration_;
    const FeatureStack &stack = linear_->stack();
    std::vector<GroupProposal> props;
    props.reserve(static_cast<std::size_t>(decomp_.num_groups()));
    if (acq_.kind == AcquisitionKind::TS) {
      // Minimization: each group maximizes the negated sampled surrogate.
      const Vector neg_theta = -sample_ts_weights(*linear_, rng);
      for (Index j = 0; j < decomp_.num_groups(); ++j) {
        Rng group_rng(rng());
        props.push_back(propose_group_ts(j, neg_theta, stack, group_boxes_[static_cast<std::size_t>(j)], group_rng,
                                         opt_.group_solver));
      }
      if (opt_.debug_ts_check && decomp_.dim() <= 4 && iteration_ % 25 == 0)
        cross_check(neg_theta);
    } else {
      const auto surrogates = group_surrogates(*linear_);
      const double beta = beta_schedule(data_std_.size(), decomp_.effective_dim(), acq_.delta);
      Index inc = 0;
      const double best = data_std_.values().minCoeff(&inc);
      const Vector u_inc = data_std_.point(inc);
      std::vector<double> inc_means;
      double inc_total = 0.0;
      for (Index j = 0; j < decomp_.num_groups(); ++j) {
        Vector m, v;
        surrogates[static_cast<std::size_t>(j)].predict(stack, decomp_.slice(u_inc, j), m, v);
        inc_means.push_back(m[0]);
        inc_total += m[0];
      }
      for (Index j = 0; j < decomp_.num_groups(); ++j) {
        // Improvement of group j's term with the others held at the incumbent.
        const double group_best = best - (inc_total - inc_means[static_cast<std::size_t>(j)]);
        Rng group_rng(rng());
        props.push_back(propose_group_analytic(surrogates[static_cast<std::size_t>(j)], acq_, stack, beta,
                                               group_best, group_boxes_[static_cast<std::size_t>(j)], group_rng,
                                               opt_.group_solver));
      }
    }
    return assemble_point(props, decomp_);
  }

private:
  void cross_check(const Vector &neg_theta) {
    const FeatureStack &stack = linear_->stack();
    const Vector by_group = grid_argmax_by_group(neg_theta, stack, box_, 21);
    const Matrix grid = product_grid(box_, 21);
    Vector values = Vector::Zero(grid.cols());
    for (Index j = 0; j < decomp_.num_groups(); ++j) {
      const Matrix sub = grid(decomp_.group(j), Eigen::all);
      values += stack.evaluate_group_batch(j, sub).transpose() *
                neg_theta.segment(stack.offset(j), stack.block_size(j));
    }
    Index arg = 0;
    values.maxCoeff(&arg);
    ++meta_.ts_checks;
    if ((grid.col(arg) - by_group).cwiseAbs().maxCoeff() > 1e-12)
      ++meta_.ts_check_failures;
  }

  Decomposition decomp_;
  AcquisitionSpec acq_;
  EngineOptions opt_;
  TraceMeta &meta_;
  SearchSpace box_;
  std::vector<SearchSpace> group_boxes_;
  std::optional<LinearPosterior> linear_;
  Index iteration_ = 0;
};

Trace run_loop(const Problem &problem, const AcquisitionSpec &acq, Mode mode, Index budget, Index n0, Rng &rng,
               const EngineOptions &options) {
  problem.validate();
  acq.validate();
  if (budget < 1)
    throw UsageError("budget must be >= 1");
  if (options.refit_every < 1)
    throw UsageError("refit_every must be >= 1");
  if (options.features < 1)
    throw UsageError("features must be >= 1");
  const SearchSpace &space = problem.space;
  const Index d = space.dim();

  Trace trace;
  trace.meta.problem = problem.name;
  trace.meta.mode = mode;
  trace.meta.acq = acq.kind;
  trace.meta.features = options.features;
  trace.meta.budget = budget;
  trace.meta.n0 = n0;
  trace.records.reserve(static_cast<std::size_t>(n0 + budget));

  std::unique_ptr<Model> model;
  if (mode == Mode::Standard) {
    model = std::make_unique<StandardModel>(d, acq, options);
  } else {
    if (!problem.decomposition)
      throw UsageError("additive mode requires a problem decomposition");
    model = std::make_unique<AdditiveModel>(*problem.decomposition, acq, options, trace.meta);
  }

  Dataset unit_raw(d);
  std::optional<double> best;
  auto evaluate = [&](const Vector &x, Clock::time_point start) {
    const Evaluation ev = problem.objective(x);
    const Vector u = space.to_unit(x);
    unit_raw.add(u, ev.value);
    if (ev.feasible && (!best || ev.value < *best))
      best = ev.value;
    TraceRecord rec;
    rec.t = static_cast<Index>(trace.records.size()) + 1;
    rec.x = x;
    rec.y = ev.value;
    rec.feasible = ev.feasible;
    rec.best_seen = best;
    if (options.record_timing)
      rec.iter_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.records.push_back(std::move(rec));
  };

  {
    const auto design = initial_design(n0, space, rng);
    for (const auto &x : design)
      evaluate(x, Clock::now());
  }

  for (Index it = 0; it < budget; ++it) {
    const auto start = Clock::now();
    if (it % options.refit_every == 0)
      model->refit(unit_raw, rng);
    else
      model->observe(unit_raw.point(unit_raw.size() - 1), unit_raw.value(unit_raw.size() - 1));
    const Vector u = model->propose(rng);
    evaluate(space.clamp(space.from_unit(u)), start);
  }
  return trace;
}

} // namespace

Trace run_standard_bo(const Problem &problem, const AcquisitionSpec &acq, Index budget, Index n0, Rng &rng,
                      const EngineOptions &options) {
  return run_loop(problem, acq, Mode::Standard, budget, n0, rng, options);
}

Trace run_additive_bo(const Problem &problem, const AcquisitionSpec &acq, Index budget, Index n0, Rng &rng,
                      const EngineOptions &options) {
  return run_loop(problem, acq, Mode::Additive, budget, n0, rng, options);
}

Trace run_one(const RunSpec &spec) {
  if (!spec.problem)
    throw UsageError("run_one: missing problem");
  const Index n0 = spec.n0.value_or(default_n0(spec.mode, spec.problem->space.dim()));
  Rng rng(spec.seed);
  Trace trace = spec.mode == Mode::Standard
                    ? run_standard_bo(*spec.problem, spec.acq, spec.budget, n0, rng, spec.options)
                    : run_additive_bo(*spec.problem, spec.acq, spec.budget, n0, rng, spec.options);
  trace.meta.seed = spec.seed;
  trace.meta.run_id = spec.problem->name + "-" + to_string(spec.mode) + "-" + to_string(spec.acq.kind) + "-" +
                      std::to_string(spec.seed);
  return trace;
}

BatchOutcome run_batch_partial(const std::vector<RunSpec> &specs, unsigned threads) {
  BatchOutcome res;
  res.traces.resize(specs.size());
  res.errors.resize(specs.size());
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, specs.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        res.traces[i] = run_one(specs[i]);
      } catch (...) {
        res.errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k)
      pool.emplace_back(worker);
    for (auto &th : pool)
      th.join();
  }
  return res;
}

std::vector<Trace> run_batch(const std::vector<RunSpec> &specs, unsigned threads) {
  auto res = run_batch_partial(specs, threads);
  for (const auto &e : res.errors)
    if (e)
      std::rethrow_exception(e);
  std::vector<Trace> out;
  out.reserve(specs.size());
  for (auto &t : res.traces)
    out.push_back(std::move(*t));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

void write_trace_header(std::ostream &out, Index dim) {
  out << "run_id,mode,acq,seed,t";
  for (Index i = 1; i <= dim; ++i)
    out << ",x_" << i;
  out << ",y,feasible,best_seen,iter_ms\n";
}

void write_trace_rows(std::ostream &out, const Trace &trace) {
  const auto &m = trace.meta;
  for (const auto &r : trace.records) {
    out << m.run_id << ',' << to_string(m.mode) << ',' << to_string(m.acq) << ',' << m.seed << ',' << r.t;
    for (Index i = 0; i < r.x.size(); ++i)
      out << ',' << format_double(r.x[i]);
    out << ',' << format_double(r.y) << ',' << (r.feasible ? 1 : 0) << ','
        << (r.best_seen ? format_double(*r.best_seen) : std::string("none")) << ',' << format_double(r.iter_ms)
        << '\n';
  }
}

} // namespace addbo
