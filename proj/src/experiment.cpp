#include "addbo/experiment.hpp"

#include "addbo/benchmarks.hpp"
#include "addbo/watersim.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace addbo {

namespace {

template <class T, class F>
std::vector<T> parse_each(const KeyValueConfig &kv, const std::string &key, F parse) {
  std::vector<T> out;
  for (const auto &item : kv.get_strings(key)) {
    try {
      out.push_back(parse(item));
    } catch (const UsageError &e) {
      throw ConfigError(key, "invalid value '" + item + "' for key '" + key + "': " + e.what());
    }
  }
  if (out.empty())
    throw ConfigError(key, "key '" + key + "' needs at least one value");
  return out;
}

bool parse_bool(const std::string &key, const std::string &text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on")
    return true;
  if (text == "0" || text == "false" || text == "no" || text == "off")
    return false;
  throw ConfigError(key, "invalid boolean '" + text + "' for key '" + key + "'");
}

int acq_rank(const std::string &acq) {
  static const std::vector<std::string> order{"ts", "lcb", "ucb", "ei"};
  const auto it = std::find(order.begin(), order.end(), acq);
  return static_cast<int>(it - order.begin());
}

std::string opt_str(const std::optional<double> &v) { return v ? format_double(*v) : "none"; }

} // namespace

void RunConfig::validate() const {
  if (problem.empty())
    throw ConfigError("problem", "key 'problem' must not be empty");
  if (dim < 1)
    throw ConfigError("dim", "key 'dim' must be >= 1");
  if (modes.empty())
    throw ConfigError("mode", "key 'mode' needs at least one value");
  if (acquisitions.empty())
    throw ConfigError("acq", "key 'acq' needs at least one value");
  if (budget < 1)
    throw ConfigError("budget", "key 'budget' must be >= 1");
  if (n0 && *n0 < 2)
    throw ConfigError("n0", "key 'n0' must be >= 2");
  if (seeds.empty())
    throw ConfigError("seeds", "key 'seeds' needs at least one seed");
  if (features < 1)
    throw ConfigError("features", "key 'features' must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("delta", "key 'delta' must lie in (0, 1)");
  if (!(xi >= 0.0))
    throw ConfigError("xi", "key 'xi' must be >= 0");
  if (out_dir.empty())
    throw ConfigError("out", "key 'out' must not be empty");
}

std::vector<std::string> run_config_keys() {
  return {"problem", "dim",   "mode",       "acq",     "budget", "n0",     "seeds",  "features",
          "feature_kind", "delta", "xi", "out", "wdn_config", "gnuplot", "timing", "threads"};
}

std::vector<std::uint64_t> parse_seeds(const std::string &text) {
  const auto items = split_list(text);
  if (items.empty())
    throw ConfigError("seeds", "key 'seeds' needs at least one seed");
  std::vector<std::uint64_t> out;
  for (const auto &item : items) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError("seeds", "invalid value '" + item + "' for key 'seeds'");
    out.push_back(v);
  }
  if (items.size() == 1) {
    const auto n = out.front();
    if (n < 1)
      throw ConfigError("seeds", "seed count must be >= 1");
    out.clear();
    for (std::uint64_t s = 1; s <= n; ++s)
      out.push_back(s);
  }
  return out;
}

RunConfig run_config_from_keys(const KeyValueConfig &kv, RunConfig cfg) {
  kv.check_keys(run_config_keys());
  if (kv.has("problem"))
    cfg.problem = kv.get_string("problem");
  if (kv.has("dim"))
    cfg.dim = kv.get_int("dim");
  if (kv.has("mode"))
    cfg.modes = parse_each<Mode>(kv, "mode", parse_mode);
  if (kv.has("acq"))
    cfg.acquisitions = parse_each<AcquisitionKind>(kv, "acq", parse_acquisition);
  if (kv.has("budget"))
    cfg.budget = kv.get_int("budget");
  if (kv.has("n0")) {
    if (kv.get_string("n0") == "auto")
      cfg.n0.reset();
    else
      cfg.n0 = kv.get_int("n0");
  }
  if (kv.has("seeds"))
    cfg.seeds = parse_seeds(kv.get_string("seeds"));
  if (kv.has("features"))
    cfg.features = kv.get_int("features");
  if (kv.has("feature_kind")) {
    const auto v = parse_each<FeatureChoice>(kv, "feature_kind", parse_feature_choice);
    if (v.size() != 1)
      throw ConfigError("feature_kind", "key 'feature_kind' takes a single value");
    cfg.feature_kind = v.front();
  }
  if (kv.has("delta"))
    cfg.delta = kv.get_double("delta");
  if (kv.has("xi"))
    cfg.xi = kv.get_double("xi");
  if (kv.has("out"))
    cfg.out_dir = kv.get_string("out");
  if (kv.has("wdn_config"))
    cfg.wdn_config = kv.get_string("wdn_config");
  if (kv.has("gnuplot"))
    cfg.gnuplot = parse_bool("gnuplot", kv.get_string("gnuplot"));
  if (kv.has("timing"))
    cfg.record_timing = parse_bool("timing", kv.get_string("timing"));
  if (kv.has("threads")) {
    const long t = kv.get_int("threads");
    if (t < 0)
      throw ConfigError("threads", "key 'threads' must be >= 0");
    cfg.threads = static_cast<unsigned>(t);
  }
  cfg.validate();
  return cfg;
}

Problem make_problem(const RunConfig &config) {
  config.validate();
  if (config.problem == "pump_scheduling") {
    const auto net = config.wdn_config ? watersim::load_config(*config.wdn_config) : watersim::default_config();
    return watersim::pso_problem(net);
  }
  if (config.wdn_config)
    throw ConfigError("wdn_config", "key 'wdn_config' only applies to problem 'pump_scheduling'");
  try {
    return benchmark_problem(config.problem, config.dim);
  } catch (const UsageError &e) {
    throw ConfigError("problem", "invalid value '" + config.problem + "' for key 'problem': " + e.what());
  }
}

SummaryRow summarize(const Trace &trace) {
  return {trace.meta.run_id,    to_string(trace.meta.mode),   to_string(trace.meta.acq), trace.meta.seed,
          trace.final_best(), trace.evaluations_to_best(), trace.total_ms()};
}

double quantile(std::vector<double> values, double p) {
  if (values.empty())
    throw UsageError("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[hi] == values[lo])
    return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<CurvePoint> bestseen_curves(const std::vector<Trace> &traces) {
  std::map<std::pair<int, int>, std::vector<const Trace *>> groups;
  for (const auto &tr : traces)
    groups[{static_cast<int>(tr.meta.mode), static_cast<int>(tr.meta.acq)}].push_back(&tr);
  std::vector<CurvePoint> out;
  for (const auto &[key, members] : groups) {
    Index len = 0;
    for (const auto *tr : members)
      len = std::max(len, tr->size());
    for (Index t = 0; t < len; ++t) {
      std::vector<double> vals;
      for (const auto *tr : members)
        if (t < tr->size() && tr->records[static_cast<std::size_t>(t)].best_seen)
          vals.push_back(*tr->records[static_cast<std::size_t>(t)].best_seen);
      CurvePoint pt;
      pt.mode = to_string(members.front()->meta.mode);
      pt.acq = to_string(members.front()->meta.acq);
      pt.t = t + 1;
      pt.runs = static_cast<Index>(vals.size());
      if (!vals.empty()) {
        pt.median = quantile(vals, 0.5);
        pt.q25 = quantile(vals, 0.25);
        pt.q75 = quantile(vals, 0.75);
      }
      out.push_back(pt);
    }
  }
  return out;
}

void write_summary_header(std::ostream &out) {
  out << "run_id,mode,acq,seed,final_best_seen,evals_to_best,total_ms\n";
}

void write_summary_row(std::ostream &out, const SummaryRow &row) {
  out << row.run_id << ',' << row.mode << ',' << row.acq << ',' << row.seed << ',' << opt_str(row.final_best) << ','
      << (row.evals_to_best ? std::to_string(*row.evals_to_best) : std::string("none")) << ','
      << format_double(row.total_ms) << '\n';
}

void write_curves(std::ostream &out, const std::vector<CurvePoint> &curves) {
  out << "mode,acq,t,runs,median,q25,q75\n";
  for (const auto &c : curves) {
    out << c.mode << ',' << c.acq << ',' << c.t << ',' << c.runs << ',';
    if (c.runs == 0)
      out << "none,none,none\n";
    else
      out << format_double(c.median) << ',' << format_double(c.q25) << ',' << format_double(c.q75) << '\n';
  }
}

void write_gnuplot_script(std::ostream &out, const std::vector<CurvePoint> &curves, const std::string &title) {
  std::vector<std::pair<std::string, std::string>> series;
  for (const auto &c : curves)
    if (std::find(series.begin(), series.end(), std::make_pair(c.mode, c.acq)) == series.end())
      series.emplace_back(c.mode, c.acq);
  out << "# gnuplot plot.gp (run from the output directory)\n"
      << "set datafile separator ','\n"
      << "set datafile missing 'none'\n"
      << "set terminal pngcairo size 900,600\n"
      << "set output 'bestseen.png'\n"
      << "set title '" << title << "'\n"
      << "set xlabel 'function evaluations'\n"
      << "set ylabel 'best seen'\n"
      << "set key top right\n"
      << "set style fill transparent solid 0.2 noborder\n"
      << "plot \\\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto &[mode, acq] = series[i];
    const std::string src = "\"< awk -F, '$1==\\\"" + mode + "\\\" && $2==\\\"" + acq + "\\\"' bestseen_curves.csv\"";
    out << "  " << src << " using 3:6:7 with filledcurves lc " << i + 1 << " notitle, \\\n"
        << "  " << src << " using 3:5 with lines lw 2 lc " << i + 1 << " title '" << mode << "-" << acq << "'"
        << (i + 1 < series.size() ? ", \\\n" : "\n");
  }
}

ExperimentResult run_experiment(const RunConfig &config) {
  const Problem problem = make_problem(config);
  problem.validate();

  EngineOptions opts;
  opts.features = config.features;
  opts.feature_kind = config.feature_kind;
  opts.record_timing = config.record_timing;

  std::vector<RunSpec> specs;
  for (const auto mode : config.modes) {
    if (mode == Mode::Additive && !problem.decomposition)
      throw ConfigError("mode", "additive mode needs a problem with a decomposition");
    for (const auto kind : config.acquisitions)
      for (const auto seed : config.seeds) {
        RunSpec s;
        s.problem = &problem;
        s.mode = mode;
        s.acq = AcquisitionSpec{kind, config.delta, config.xi};
        s.budget = config.budget;
        s.n0 = config.n0;
        s.seed = seed;
        s.options = opts;
        specs.push_back(s);
      }
  }

  auto outcome = run_batch_partial(specs, config.threads);

  ExperimentResult res;
  std::string first_error;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (outcome.traces[i]) {
      res.traces.push_back(std::move(*outcome.traces[i]));
      res.summary.push_back(summarize(res.traces.back()));
    } else if (first_error.empty()) {
      try {
        std::rethrow_exception(outcome.errors[i]);
      } catch (const std::exception &e) {
        first_error = "run seed " + std::to_string(specs[i].seed) + " (" + to_string(specs[i].mode) + "-" +
                      to_string(specs[i].acq.kind) + ") failed: " + e.what();
      } catch (...) {
        first_error = "run seed " + std::to_string(specs[i].seed) + " failed";
      }
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);
  auto open = [&](const char *name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f)
      throw RunFailure("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("traces.csv");
    write_trace_header(f, problem.space.dim());
    for (const auto &tr : res.traces)
      write_trace_rows(f, tr);
  }
  {
    auto f = open("summary.csv");
    write_summary_header(f);
    for (const auto &row : res.summary)
      write_summary_row(f, row);
  }
  const auto curves = bestseen_curves(res.traces);
  {
    auto f = open("bestseen_curves.csv");
    write_curves(f, curves);
  }
  if (config.gnuplot) {
    auto f = open("plot.gp");
    write_gnuplot_script(f, curves, problem.name + " d=" + std::to_string(problem.space.dim()));
  }
  if (!first_error.empty())
    throw RunFailure(first_error);
  return res;
}

std::vector<SummaryRow> read_summary(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw CsvError(path + ": cannot open");
  std::string line;
  Index lineno = 0;
  auto fail = [&](const std::string &msg) { return CsvError(path + ":" + std::to_string(lineno) + ": " + msg); };
  if (!std::getline(in, line))
    throw CsvError(path + ":1: empty file");
  lineno = 1;
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != "run_id,mode,acq,seed,final_best_seen,evals_to_best,total_ms")
    throw fail("unexpected header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ','))
      cols.push_back(c);
    if (!line.empty() && line.back() == ',')
      cols.emplace_back();
    if (cols.size() != 7)
      throw fail("expected 7 columns, got " + std::to_string(cols.size()));
    auto num = [&](const std::string &text, auto &out, const char *what) {
      const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
      if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw fail(std::string("invalid ") + what + " '" + text + "'");
    };
    SummaryRow r;
    r.run_id = cols[0];
    r.mode = cols[1];
    r.acq = cols[2];
    try {
      parse_mode(r.mode);
      parse_acquisition(r.acq);
    } catch (const UsageError &e) {
      throw fail(e.what());
    }
    num(cols[3], r.seed, "seed");
    if (cols[4] != "none") {
      double v = 0.0;
      num(cols[4], v, "final_best_seen");
      r.final_best = v;
    }
    if (cols[5] != "none") {
      Index v = 0;
      num(cols[5], v, "evals_to_best");
      r.evals_to_best = v;
    }
    num(cols[6], r.total_ms, "total_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReportRow> compare_rows(const std::vector<SummaryRow> &rows) {
  std::map<std::pair<std::string, std::string>, std::vector<const SummaryRow *>> groups;
  for (const auto &r : rows)
    groups[{r.mode, r.acq}].push_back(&r);
  std::vector<ReportRow> out;
  for (const auto &[key, members] : groups) {
    ReportRow rr;
    rr.mode = key.first;
    rr.acq = key.second;
    rr.runs = static_cast<Index>(members.size());
    std::vector<double> best, evals, ms;
    for (const auto *m : members) {
      if (m->final_best)
        best.push_back(*m->final_best);
      if (m->evals_to_best)
        evals.push_back(static_cast<double>(*m->evals_to_best));
      ms.push_back(m->total_ms);
    }
    if (!best.empty())
      rr.median_best = median(best);
    if (!evals.empty())
      rr.median_evals = median(evals);
    rr.median_ms = median(ms);
    out.push_back(rr);
  }
  std::sort(out.begin(), out.end(), [](const ReportRow &a, const ReportRow &b) {
    const bool aa = a.mode == "additive", ba = b.mode == "additive";
    if (aa != ba)
      return aa;
    if (a.mode != b.mode)
      return a.mode < b.mode;
    return acq_rank(a.acq) < acq_rank(b.acq);
  });
  return out;
}

std::string format_report(const std::vector<ReportRow> &rows) {
  std::vector<std::vector<std::string>> cells{
      {"mode", "acq", "runs", "median_best_seen", "median_evals_to_best", "median_total_ms"}};
  auto fixed = [](double v, int prec) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
  };
  for (const auto &r : rows)
    cells.push_back({r.mode, r.acq, std::to_string(r.runs), r.median_best ? fixed(*r.median_best, 4) : "none",
                     r.median_evals ? fixed(*r.median_evals, 1) : "none", fixed(r.median_ms, 1)});
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto &row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (const auto &row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c < 2)
        os << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      else
        os << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      os << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  return os.str();
}

std::string compare_report(const std::vector<std::string> &paths) {
  if (paths.empty())
    throw UsageError("compare_report: need at least one summary file");
  std::vector<SummaryRow> all;
  for (const auto &p : paths) {
    auto rows = read_summary(p);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return format_report(compare_rows(all));
}

} // namespace addbo
