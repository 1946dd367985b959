#pragma once

#include "addbo/config.hpp"
#include "addbo/engine.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace addbo {

/// A seeded multi-run comparison: every (mode, acquisition, seed) triple is
/// one independent BO run on the same problem.
struct RunConfig {
  std::string problem = "styblinski_tang";
  /// Ignored by pump_scheduling, whose dimension comes from the network.
  Index dim = 10;
  std::vector<Mode> modes{Mode::Standard, Mode::Additive};
  std::vector<AcquisitionKind> acquisitions{AcquisitionKind::TS, AcquisitionKind::LCB, AcquisitionKind::EI};
  Index budget = 100;
  /// Engine default when unset.
  std::optional<Index> n0 = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  Index features = 64;
  FeatureChoice feature_kind = FeatureChoice::Auto;
  double delta = 0.1;
  double xi = 0.0;
  std::string out_dir = "results";
  std::optional<std::string> wdn_config;
  bool gnuplot = false;
  bool record_timing = true;
  unsigned threads = 0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Keys accepted by run_config_from_keys.
std::vector<std::string> run_config_keys();

/// Overrides fields of `base` with the keys present in `kv`. Keys match the
/// long CLI flags with dashes turned into underscores.
RunConfig run_config_from_keys(const KeyValueConfig &kv, RunConfig base = {});

/// "N" means seeds 1..N; "a,b,c" is an explicit list.
std::vector<std::uint64_t> parse_seeds(const std::string &text);

/// Builds the benchmark or pump problem named in the config.
Problem make_problem(const RunConfig &config);

struct SummaryRow {
  std::string run_id;
  std::string mode;
  std::string acq;
  std::uint64_t seed = 0;
  std::optional<double> final_best;
  std::optional<Index> evals_to_best;
  double total_ms = 0.0;
};

SummaryRow summarize(const Trace &trace);

/// Per-(mode, acq) best-seen statistics at one evaluation index.
struct CurvePoint {
  std::string mode;
  std::string acq;
  Index t = 0;
  /// Runs with a feasible observation by evaluation t.
  Index runs = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

std::vector<CurvePoint> bestseen_curves(const std::vector<Trace> &traces);

/// Linear-interpolation quantile, p in [0, 1]. Empty input throws.
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

void write_summary_header(std::ostream &out);
void write_summary_row(std::ostream &out, const SummaryRow &row);
void write_curves(std::ostream &out, const std::vector<CurvePoint> &curves);
void write_gnuplot_script(std::ostream &out, const std::vector<CurvePoint> &curves, const std::string &title);

/// Raised after all completed runs have been written when some run failed.
class RunFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExperimentResult {
  std::vector<Trace> traces;
  std::vector<SummaryRow> summary;
};

/// Runs the whole grid and writes traces.csv, summary.csv and
/// bestseen_curves.csv (plus plot.gp with `gnuplot`) into out_dir.
ExperimentResult run_experiment(const RunConfig &config);

/// Malformed summary file; the message carries "file:line: ".
class CsvError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::vector<SummaryRow> read_summary(const std::string &path);

struct ReportRow {
  std::string mode;
  std::string acq;
  Index runs = 0;
  std::optional<double> median_best;
  std::optional<double> median_evals;
  double median_ms = 0.0;
};

/// One row per (mode, acq): additive before standard, then ts, lcb, ucb, ei.
std::vector<ReportRow> compare_rows(const std::vector<SummaryRow> &rows);
std::string format_report(const std::vector<ReportRow> &rows);

/// Reads every file and formats the comparison table.
std::string compare_report(const std::vector<std::string> &paths);

} // namespace addbo
