#include <limits>
#include "addbo/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace addbo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small(const std::string &out) {
  RunConfig c;
  c.dim = 3;
  c.budget = 6;
  c.n0 = 5;
  c.seeds = {1, 2, 3};
  c.features = 8;
  c.acquisitions = {AcquisitionKind::TS, AcquisitionKind::EI};
  c.out_dir = out;
  c.record_timing = false;
  c.threads = 1;
  return c;
}

SummaryRow row(const std::string &mode, const std::string &acq, std::uint64_t seed, double best, Index evals,
               double ms) {
  return {"p-" + mode + "-" + acq + "-" + std::to_string(seed), mode, acq, seed, best, evals, ms};
}

} // namespace

TEST_CASE("seed lists") {
  CHECK(parse_seeds("3") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(parse_seeds("7, 11") == std::vector<std::uint64_t>{7, 11});
  CHECK_THROWS_AS(parse_seeds("0"), ConfigError);
  CHECK_THROWS_AS(parse_seeds("a"), ConfigError);
  CHECK_THROWS_AS(parse_seeds(""), ConfigError);
}

TEST_CASE("run configuration from keys") {
  const auto kv = KeyValueConfig::parse("problem = separable_quadratic\ndim = 4\nmode = additive\nacq = ei, lcb\n"
                                        "seeds = 2\nn0 = auto\nfeature_kind = rff\ntiming = false\n");
  const auto c = run_config_from_keys(kv);
  CHECK(c.problem == "separable_quadratic");
  CHECK(c.dim == 4);
  CHECK(c.modes == std::vector<Mode>{Mode::Additive});
  CHECK(c.acquisitions == std::vector<AcquisitionKind>{AcquisitionKind::EI, AcquisitionKind::LCB});
  CHECK(c.seeds.size() == 2);
  CHECK(!c.n0);
  CHECK(c.feature_kind == FeatureChoice::Random);
  CHECK(!c.record_timing);

  auto key_of = [](const std::string &text) {
    try {
      run_config_from_keys(KeyValueConfig::parse(text));
    } catch (const ConfigError &e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("acq = ts, foo\n") == "acq");
  CHECK(key_of("mode = both\n") == "mode");
  CHECK(key_of("budget = 0\n") == "budget");
  CHECK(key_of("features = 0\n") == "features");
  CHECK(key_of("colour = red\n") == "colour");
  CHECK(key_of("gnuplot = maybe\n") == "gnuplot");
  CHECK(key_of("n0 = 1\n") == "n0");
}

TEST_CASE("problem construction") {
  RunConfig c;
  c.problem = "pump_scheduling";
  CHECK(make_problem(c).space.dim() == 96);
  c.problem = "nope";
  CHECK_THROWS_AS(make_problem(c), ConfigError);
  c.problem = "styblinski_tang";
  c.wdn_config = "x.cfg";
  CHECK_THROWS_AS(make_problem(c), ConfigError);
}

TEST_CASE("quantiles") {
  CHECK(median({1.0, 2.0, 9.0}) == 2.0);
  CHECK(median({4.0, 1.0}) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.75) == 3.25);
  CHECK_THROWS_AS(median({}), UsageError);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(median({1.0, inf, inf, inf}) == inf);
  CHECK(median({1.0, 2.0, inf}) == 2.0);
  CHECK(median({1.0, 2.0, inf, inf}) == inf);
}

TEST_CASE("experiment outputs") {
  const std::string out = "exp_outputs_test";
  fs::remove_all(out);
  auto cfg = small(out);
  cfg.gnuplot = true;
  const auto res = run_experiment(cfg);
  CHECK(res.traces.size() == 12);
  for (const auto &t : res.traces)
    CHECK(t.size() == 11);

  const auto traces = slurp(fs::path(out) / "traces.csv");
  CHECK(std::count(traces.begin(), traces.end(), '\n') == 1 + 12 * 11);
  CHECK(fs::exists(fs::path(out) / "plot.gp"));

  const auto rows = read_summary((fs::path(out) / "summary.csv").string());
  REQUIRE(rows.size() == 12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].run_id == res.summary[i].run_id);
    CHECK(*rows[i].final_best == *res.summary[i].final_best);
    CHECK(*rows[i].evals_to_best == *res.summary[i].evals_to_best);
  }

  const auto curves = slurp(fs::path(out) / "bestseen_curves.csv");
  CHECK(curves.rfind("mode,acq,t,runs,median,q25,q75\n", 0) == 0);
  CHECK(std::count(curves.begin(), curves.end(), '\n') == 1 + 4 * 11);

  SUBCASE("same config twice gives identical files") {
    const std::string out2 = "exp_outputs_test2";
    fs::remove_all(out2);
    run_experiment(small(out2));
    for (const char *f : {"traces.csv", "summary.csv", "bestseen_curves.csv"})
      CHECK(slurp(fs::path(out) / f) == slurp(fs::path(out2) / f));
    fs::remove_all(out2);
  }
  fs::remove_all(out);
}

TEST_CASE("best-seen curves") {
  std::vector<Trace> traces(3);
  const double ys[3][2] = {{1.0, 0.5}, {2.0, 3.0}, {9.0, -1.0}};
  for (int s = 0; s < 3; ++s) {
    traces[s].meta.mode = Mode::Additive;
    traces[s].meta.acq = AcquisitionKind::TS;
    std::optional<double> best;
    for (int k = 0; k < 2; ++k) {
      TraceRecord r;
      r.t = k + 1;
      r.y = ys[s][k];
      best = best ? std::min(*best, r.y) : r.y;
      r.best_seen = best;
      traces[s].records.push_back(r);
    }
  }
  const auto c = bestseen_curves(traces);
  REQUIRE(c.size() == 2);
  CHECK(c[0].median == 2.0);
  CHECK(c[0].runs == 3);
  CHECK(c[1].median == 0.5);
  CHECK(c[1].q25 == doctest::Approx(-0.25));
}

TEST_CASE("comparison report") {
  SUBCASE("single run echoes its values") {
    const auto r = compare_rows({row("standard", "ei", 1, -3.5, 12, 40.0)});
    REQUIRE(r.size() == 1);
    CHECK(*r[0].median_best == -3.5);
    CHECK(*r[0].median_evals == 12.0);
    CHECK(r[0].median_ms == 40.0);
    const auto text = format_report(r);
    CHECK(text.find("-3.5000") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  }
  SUBCASE("additive rows first, medians over seeds") {
    const auto r = compare_rows({row("standard", "ts", 1, 1, 5, 10), row("additive", "ts", 1, 1, 5, 1),
                                 row("additive", "ts", 2, 2, 6, 2), row("additive", "ts", 3, 9, 7, 3),
                                 row("additive", "ei", 1, 0, 1, 1)});
    REQUIRE(r.size() == 3);
    CHECK(r[0].mode == "additive");
    CHECK(r[0].acq == "ts");
    CHECK(*r[0].median_best == 2.0);
    CHECK(r[1].acq == "ei");
    CHECK(r[2].mode == "standard");
  }
  SUBCASE("runs without a feasible point") {
    SummaryRow none = row("additive", "ts", 1, 0, 0, 5);
    none.final_best.reset();
    none.evals_to_best.reset();
    const auto r = compare_rows({none});
    CHECK(!r[0].median_best);
    CHECK(format_report(r).find("none") != std::string::npos);
  }
}

TEST_CASE("summary files round trip and reject malformed input") {
  const std::string path = "summary_roundtrip.csv";
  {
    std::ofstream f(path);
    write_summary_header(f);
    write_summary_row(f, row("additive", "ts", 4, -1.25, 17, 3.5));
    SummaryRow none = row("standard", "lcb", 2, 0, 0, 0.0);
    none.final_best.reset();
    none.evals_to_best.reset();
    write_summary_row(f, none);
  }
  const auto rows = read_summary(path);
  REQUIRE(rows.size() == 2);
  CHECK(*rows[0].final_best == -1.25);
  CHECK(!rows[1].final_best);
  CHECK(compare_report({path}).find("additive") != std::string::npos);

  {
    std::ofstream f(path);
    write_summary_header(f);
    f << "x,additive,ts,1,-1,3,2\n";
    f << "x,additive,ts,1,abc,3,2\n";
  }
  CHECK_THROWS_WITH_AS(read_summary(path), doctest::Contains((path + ":3").c_str()), CsvError);
  {
    std::ofstream f(path);
    f << "a,b\n";
  }
  CHECK_THROWS_WITH_AS(read_summary(path), doctest::Contains((path + ":1").c_str()), CsvError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_summary("no_such_summary.csv"), CsvError);
}
