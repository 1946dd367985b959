#include "addbo/acquisition.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace addbo;

namespace {

FeatureStack rff_stack(const Decomposition &decomp, Index m, double l, Rng &rng) {
  std::vector<FeatureMap> maps;
  for (Index j = 0; j < decomp.num_groups(); ++j)
    maps.push_back(sample_rff(static_cast<Index>(decomp.group(j).size()), m, {l, 1.0}, rng));
  return {decomp, std::move(maps)};
}

Vector random_theta(Index n, Rng &rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector t(n);
  for (Index i = 0; i < n; ++i)
    t[i] = z(rng);
  return t;
}

} // namespace

TEST_CASE("acquisition names") {
  CHECK(parse_acquisition("ts") == AcquisitionKind::TS);
  CHECK(parse_acquisition("LCB") == AcquisitionKind::LCB);
  CHECK(parse_acquisition("ei") == AcquisitionKind::EI);
  CHECK(to_string(AcquisitionKind::UCB) == "ucb");
  CHECK_THROWS_WITH_AS(parse_acquisition("pi"), doctest::Contains("'pi'"), UsageError);
  CHECK_THROWS_AS((AcquisitionSpec{AcquisitionKind::LCB, 1.5, 0.0}.validate()), UsageError);
}

TEST_CASE("beta schedule") {
  CHECK(beta_schedule(1, 1, 1.0) == doctest::Approx(2.0 * std::log(M_PI * M_PI / 6.0)).epsilon(1e-12));
  CHECK(beta_schedule(100, 10, 0.1) == doctest::Approx(28.6264).epsilon(1e-5));
  for (Index t = 1; t < 200; ++t)
    CHECK(beta_schedule(t + 1, 4, 0.1) > beta_schedule(t, 4, 0.1));
  CHECK_THROWS_AS(beta_schedule(0, 1, 0.1), UsageError);
}

TEST_CASE("confidence bounds") {
  CHECK(lcb(1.0, 2.0, 4.0) == -3.0);
  CHECK(ucb(1.0, 2.0, 4.0) == 5.0);
  CHECK(lcb(1.5, 0.0, 9.0) == 1.5);
  CHECK(lcb(1.5, 3.0, 0.0) == 1.5);
  for (double c : {-3.0, 0.5, 10.0})
    CHECK(lcb(1.0 + c, 0.7, 2.3) - lcb(1.0, 0.7, 2.3) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("expected improvement") {
  CHECK(ei(2.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(ei(1.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(ei(0.3, 1.0, 0.3, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(ei(-1.0, 1e-12, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(normal_cdf(0.0) == 0.5);
  Rng rng(2);
  std::uniform_real_distribution<double> u(-3, 3), s(0.01, 3);
  for (int i = 0; i < 500; ++i)
    CHECK(ei(u(rng), s(rng), u(rng), 0.0) >= 0.0);
  for (double sd = 0.1; sd < 5.0; sd += 0.1)
    CHECK(ei(-0.5, sd + 0.1, 0.0, 0.0) > ei(-0.5, sd, 0.0, 0.0));
}

TEST_CASE("inner solver on a 1-D grid oracle") {
  Rng rng(3);
  const auto box = SearchSpace::uniform(1, -2.0, 3.0);
  auto f = [](double x) { return std::sin(3.0 * x) + 0.3 * x - 0.05 * x * x; };
  const BatchObjective obj = [&](const Eigen::Ref<const Matrix> &x) {
    Vector v(x.cols());
    for (Index i = 0; i < x.cols(); ++i)
      v[i] = f(x(0, i));
    return v;
  };
  const auto res = maximize_in_box(obj, box, rng);
  const auto [gx, gv] = oracle::grid_min_1d([&](double x) { return -f(x); }, -2.0, 3.0, 1001);
  CHECK(res.value >= -gv - 1e-3);
  CHECK(box.contains(res.point));
}

TEST_CASE("group TS proposals") {
  Rng rng(4);
  const auto decomp = Decomposition::singletons(3);
  const auto stack = rff_stack(decomp, 16, 0.2, rng);
  const auto box = SearchSpace::unit(1);

  SUBCASE("within 1e-3 of a 1001-point grid maximum") {
    for (int rep = 0; rep < 20; ++rep) {
      const Vector theta = random_theta(stack.feature_dim(), rng);
      for (Index j = 0; j < 3; ++j) {
        const auto prop = propose_group_ts(j, theta, stack, box, rng);
        const Matrix grid = product_grid(box, 1001);
        const Vector vals =
            stack.evaluate_group_batch(j, grid).transpose() * theta.segment(stack.offset(j), stack.block_size(j));
        CHECK(prop.value >= vals.maxCoeff() - 1e-3);
        CHECK(box.contains(prop.point));
        CHECK(prop.group == j);
      }
    }
  }
  SUBCASE("zero weights") {
    const auto prop = propose_group_ts(1, Vector::Zero(stack.feature_dim()), stack, box, rng);
    CHECK(prop.value == 0.0);
    CHECK(box.contains(prop.point));
  }
  SUBCASE("positive scaling of theta leaves the argmax in place") {
    for (int rep = 0; rep < 10; ++rep) {
      const Vector theta = random_theta(stack.feature_dim(), rng);
      Rng r1(50 + rep), r2(50 + rep);
      const auto a = propose_group_ts(0, theta, stack, box, r1);
      const auto b = propose_group_ts(0, 7.5 * theta, stack, box, r2);
      CHECK(std::abs(a.point[0] - b.point[0]) <= 1e-6);
    }
  }
  SUBCASE("theta length is checked") {
    CHECK_THROWS_AS(propose_group_ts(0, Vector::Zero(3), stack, box, rng), UsageError);
  }
}

TEST_CASE("TS decomposition exactness on a product grid") {
  Rng rng(5);
  const auto decomp = Decomposition::blocks(4, 2);
  const auto stack = rff_stack(decomp, 8, 0.5, rng);
  const auto box = SearchSpace::unit(4);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector theta = random_theta(stack.feature_dim(), rng);
    const auto full = oracle::full_grid_argmax(theta, stack, box, 11);
    if (full.margin < 1e-9)
      continue;
    ++checked;
    CHECK((grid_argmax_by_group(theta, stack, box, 11) - full.point).norm() == 0.0);
  }
  CHECK(checked >= 15);
}

TEST_CASE("analytic group proposals") {
  Rng rng(6);
  const auto decomp = Decomposition::singletons(2);
  const auto stack = rff_stack(decomp, 32, 0.2, rng);
  Dataset data(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 8; ++i) {
    Vector x(2);
    x << u(rng), u(rng);
    data.add(x, std::sin(5 * x[0]) + x[1] * x[1]);
  }
  const auto post = fit_linear(data, stack, {0.01});
  const auto box = SearchSpace::unit(1);
  const auto surrogates = group_surrogates(post);
  const Matrix grid = product_grid(box, 1001);

  SUBCASE("LCB and EI are within 1e-3 of the grid optimum") {
    for (const auto kind : {AcquisitionKind::LCB, AcquisitionKind::EI, AcquisitionKind::UCB})
      for (Index j = 0; j < 2; ++j) {
        const AcquisitionSpec acq{kind, 0.1, 0.0};
        const double beta = 4.0, best = -0.2;
        const auto prop = propose_group_analytic(surrogates[j], acq, stack, beta, best, box, rng);
        Vector mean, var;
        surrogates[j].predict(stack, grid, mean, var);
        double grid_best = -1e300;
        for (Index i = 0; i < grid.cols(); ++i) {
          const double sd = std::sqrt(var[i]);
          const double v = kind == AcquisitionKind::LCB   ? -lcb(mean[i], sd, beta)
                           : kind == AcquisitionKind::UCB ? ucb(mean[i], sd, beta)
                                                          : ei(mean[i], sd, best, 0.0);
          grid_best = std::max(grid_best, v);
        }
        CHECK(prop.value >= grid_best - 1e-3);
      }
  }
  SUBCASE("beta = 0 LCB minimizes the group mean") {
    const auto prop = propose_group_analytic(0, {AcquisitionKind::LCB, 0.1, 0.0}, post, 0.0, 0.0, box, rng);
    Vector mean, var;
    surrogates[0].predict(stack, grid, mean, var);
    CHECK(-prop.value <= mean.minCoeff() + 1e-3);
  }
  SUBCASE("TS is rejected") {
    CHECK_THROWS_AS(propose_group_analytic(0, {AcquisitionKind::TS, 0.1, 0.0}, post, 1.0, 0.0, box, rng), UsageError);
  }
  SUBCASE("group variance equals the diagonal block of the full posterior") {
    Vector mean, var;
    const Matrix pts = product_grid(box, 5);
    surrogates[1].predict(stack, pts, mean, var);
    const Matrix ainv = post.system_matrix().inverse();
    const Index off = stack.offset(1), b = stack.block_size(1);
    for (Index i = 0; i < pts.cols(); ++i) {
      const Vector phi = stack.evaluate_group(1, pts.col(i));
      CHECK(var[i] == doctest::Approx(0.01 * phi.dot(ainv.block(off, off, b, b) * phi)).epsilon(1e-8));
      CHECK(mean[i] == doctest::Approx(phi.dot(post.v().segment(off, b))).epsilon(1e-12));
    }
  }
  SUBCASE("single group matches a full-space optimization") {
    const auto one = rff_stack(Decomposition::single(2), 32, 0.3, rng);
    const auto p1 = fit_linear(data, one, {0.01});
    const auto s = group_surrogates(p1);
    const auto prop =
        propose_group_analytic(s[0], {AcquisitionKind::LCB, 0.1, 0.0}, one, 2.0, 0.0, SearchSpace::unit(2), rng);
    double best = -1e300;
    const Matrix g2 = product_grid(SearchSpace::unit(2), 101);
    for (Index i = 0; i < g2.cols(); ++i) {
      const auto p = predict_linear(p1, g2.col(i));
      best = std::max(best, -lcb(p.mean, p.stddev(), 2.0));
    }
    CHECK(prop.value >= best - 1e-3);
  }
}

TEST_CASE("assemble_point") {
  const auto d = Decomposition::singletons(2);
  const std::vector<GroupProposal> props{{0, Vector::Constant(1, 0.3), 0.0}, {1, Vector::Constant(1, 0.7), 0.0}};
  const Vector x = assemble_point(props, d);
  CHECK(x[0] == 0.3);
  CHECK(x[1] == 0.7);
  const std::vector<GroupProposal> swapped{props[1], props[0]};
  CHECK(assemble_point(swapped, d) == x);

  Vector y(3);
  y << 1, 2, 3;
  CHECK(assemble_point({{0, y, 0.0}}, Decomposition::single(3)) == y);

  CHECK_THROWS_AS(assemble_point({props[0]}, d), UsageError);
  CHECK_THROWS_AS(assemble_point({props[0], props[0]}, d), UsageError);
}

TEST_CASE("product grid") {
  const Matrix g = product_grid(SearchSpace::uniform(2, -1, 1), 3);
  CHECK(g.cols() == 9);
  CHECK(g.minCoeff() == -1.0);
  CHECK(g.maxCoeff() == 1.0);
  CHECK_THROWS_AS(product_grid(SearchSpace::unit(1), 1), UsageError);
}
