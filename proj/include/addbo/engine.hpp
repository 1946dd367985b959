#pragma once

#include "addbo/acquisition.hpp"
#include "addbo/problem.hpp"

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace addbo {

enum class Mode { Standard, Additive };

std::string to_string(Mode mode);
Mode parse_mode(const std::string &name);

/// Which Fourier construction backs each group's feature map.
enum class FeatureChoice {
  /// Quadrature for one-dimensional groups, random otherwise.
  Auto,
  Random,
  Quadrature,
};

std::string to_string(FeatureChoice choice);
FeatureChoice parse_feature_choice(const std::string &name);

struct EngineOptions {
  /// Frequencies per group (random) or nodes per axis (quadrature).
  Index features = 64;
  FeatureChoice feature_kind = FeatureChoice::Auto;
  /// Hyperparameters and feature maps are refreshed every `refit_every`
  /// evaluations after the initial design.
  Index refit_every = 10;
  InnerSolverOptions group_solver{};
  /// Random-search samples per dimension for full-space proposals.
  Index full_samples_per_dim = 512;
  /// Cross-check additive TS proposals against a product-grid argmax every 25
  /// iterations (only for d <= 4).
  bool debug_ts_check = false;
  /// When false, iteration timings are recorded as zero.
  bool record_timing = true;
};

/// Default initial design size: 2d + 2 (standard) or 10 (additive).
Index default_n0(Mode mode, Index d);

struct TraceRecord {
  Index t = 0;
  Vector x;
  double y = 0.0;
  bool feasible = true;
  std::optional<double> best_seen;
  double iter_ms = 0.0;
};

struct TraceMeta {
  std::string run_id;
  std::string problem;
  Mode mode = Mode::Standard;
  AcquisitionKind acq = AcquisitionKind::TS;
  std::uint64_t seed = 0;
  Index features = 0;
  Index budget = 0;
  Index n0 = 0;
  /// Debug TS cross-checks run and failed.
  Index ts_checks = 0;
  Index ts_check_failures = 0;
};

struct Trace {
  TraceMeta meta;
  std::vector<TraceRecord> records;

  Index size() const { return static_cast<Index>(records.size()); }
  /// Final best feasible value, if any.
  std::optional<double> final_best() const;
  /// 1-based index of the first evaluation achieving the final best.
  std::optional<Index> evaluations_to_best() const;
  /// 1-based index of the first feasible evaluation with y <= target.
  std::optional<Index> evaluations_to_reach(double target) const;
  double total_ms() const;
};

/// Latin hypercube design of n0 points in the box.
std::vector<Vector> initial_design(Index n0, const SearchSpace &space, Rng &rng);

/// Running minimum over feasible observations; nullopt until the first one.
std::vector<std::optional<double>> best_seen(const Trace &trace);

Trace run_standard_bo(const Problem &problem, const AcquisitionSpec &acq, Index budget, Index n0, Rng &rng,
                      const EngineOptions &options = {});

/// Additive BO: linear feature-space posterior, per-group proposals, one
/// black-box evaluation per iteration.
Trace run_additive_bo(const Problem &problem, const AcquisitionSpec &acq, Index budget, Index n0, Rng &rng,
                      const EngineOptions &options = {});

struct RunSpec {
  const Problem *problem = nullptr;
  Mode mode = Mode::Standard;
  AcquisitionSpec acq{};
  Index budget = 1;
  /// Uses default_n0 when unset.
  std::optional<Index> n0;
  std::uint64_t seed = 0;
  EngineOptions options{};
};

Trace run_one(const RunSpec &spec);

/// Runs independent BO runs on up to `threads` worker threads. Results are in
/// the order of `specs` and do not depend on the thread count.
std::vector<Trace> run_batch(const std::vector<RunSpec> &specs, unsigned threads = 0);

/// Like run_batch, but a failing run leaves its slot empty and records the
/// exception instead of discarding the other results.
struct BatchOutcome {
  std::vector<std::optional<Trace>> traces;
  std::vector<std::exception_ptr> errors;
};
BatchOutcome run_batch_partial(const std::vector<RunSpec> &specs, unsigned threads = 0);

/// Header plus one row per evaluation:
/// run_id,mode,acq,seed,t,x_1..x_d,y,feasible,best_seen,iter_ms
void write_trace_header(std::ostream &out, Index dim);
void write_trace_rows(std::ostream &out, const Trace &trace);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace addbo
