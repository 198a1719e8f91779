#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "iclkit/errors.hpp"
#include "iclkit/mixed_effects.hpp"
#include "iclkit/rng.hpp"
#include "iclkit/stats.hpp"

using namespace iclkit;

namespace {

// Plain least squares, the oracle for every degenerate case.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

DesignMatrix intercept_design(const Eigen::VectorXd& x, std::vector<int> groups) {
  DesignMatrix d;
  d.fixed = x;
  d.group_ids = std::move(groups);
  d.random = Eigen::MatrixXd::Ones(x.size(), 1);
  return d;
}

}  // namespace

TEST_SUITE("mixed_effects") {

TEST_CASE("noiseless random-intercept data is recovered exactly") {
  const int per_group = 20;
  const double offsets[3] = {-1.0, 0.0, 1.0};
  Rng rng(41);
  Eigen::VectorXd x(3 * per_group), y(3 * per_group);
  std::vector<int> groups;
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < per_group; ++i) {
      const Eigen::Index row = g * per_group + i;
      x[row] = rng.uniform(-2.0, 2.0);
      y[row] = 2.0 * x[row] + offsets[g];
      groups.push_back(g);
    }
  }
  const DesignMatrix design = intercept_design(x, groups);
  const LmmFit fit = fit_lmm(y, design);
  REQUIRE(fit.converged);
  REQUIRE(fit.beta.size() == 1);
  CHECK(std::abs(fit.beta[0] - 2.0) <= 1e-6);
  REQUIRE(fit.u.rows() == 3);
  for (int g = 0; g < 3; ++g) CHECK(std::abs(fit.u(g, 0) - offsets[g]) <= 1e-6);
  CHECK(fit.tau2[0] > 0.0);
}

TEST_CASE("identical groups degenerate to ordinary least squares") {
  const int per_group = 25;
  Rng rng(52);
  Eigen::MatrixXd base(per_group, 2);
  Eigen::VectorXd base_y(per_group);
  for (int i = 0; i < per_group; ++i) {
    base(i, 0) = 1.0;
    base(i, 1) = rng.uniform(-1.0, 1.0);
    base_y[i] = 0.5 - 1.3 * base(i, 1) + 0.05 * rng.normal();
  }
  DesignMatrix design;
  design.fixed = Eigen::MatrixXd(3 * per_group, 2);
  design.random = Eigen::MatrixXd::Ones(3 * per_group, 1);
  Eigen::VectorXd y(3 * per_group);
  for (int g = 0; g < 3; ++g) {
    design.fixed.middleRows(g * per_group, per_group) = base;
    y.segment(g * per_group, per_group) = base_y;
    for (int i = 0; i < per_group; ++i) design.group_ids.push_back(g);
  }
  const LmmFit fit = fit_lmm(y, design);
  REQUIRE(fit.converged);
  CHECK(fit.tau2[0] <= 1e-10);
  const Eigen::VectorXd ref = ols(design.fixed, y);
  for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(fit.beta[j] - ref[j]) <= 1e-6);
}

TEST_CASE("removing the random design reproduces least squares") {
  Rng rng(53);
  const int n = 40;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  std::vector<int> groups;
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    y[i] = 0.2 + 0.9 * x(i, 1) + 0.1 * rng.normal();
    groups.push_back(i % 2);
  }
  DesignMatrix design{x, groups, Eigen::MatrixXd()};
  const LmmFit fit = fit_lmm(y, design);
  REQUIRE(fit.converged);
  CHECK(fit.tau2.size() == 0);
  const Eigen::VectorXd ref = ols(x, y);
  for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(fit.beta[j] - ref[j]) <= 1e-6);
}

TEST_CASE("pure noise with a dead column explains nothing") {
  const int n = 1000;
  Rng rng(64);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 2);
  Eigen::VectorXd y(n);
  std::vector<int> groups;
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    y[i] = rng.normal();
    groups.push_back(i % 5);
  }
  DesignMatrix design{x, groups, Eigen::MatrixXd::Ones(n, 1)};
  const LmmFit fit = fit_lmm(y, design);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.beta[0]) <= 0.1);
  CHECK(std::abs(fit.beta[1]) <= 1e-9);  // zero regressor gets a zero weight
  const R2Report r2 = nakagawa_r2(fit, design);
  CHECK(r2.marginal < 0.05);
}

TEST_CASE("beta ignores observation order") {
  const int n = 90;
  Rng rng(75);
  Eigen::VectorXd x(n), y(n);
  std::vector<int> groups;
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    groups.push_back(i % 3);
    y[i] = 1.5 * x[i] + 0.4 * (groups.back() - 1) + 0.1 * rng.normal();
  }
  const LmmFit fit = fit_lmm(y, intercept_design(x, groups));

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffler(76);
  shuffler.shuffle(order);
  Eigen::VectorXd xp(n), yp(n);
  std::vector<int> gp;
  for (int i = 0; i < n; ++i) {
    xp[i] = x[order[i]];
    yp[i] = y[order[i]];
    gp.push_back(groups[order[i]]);
  }
  const LmmFit permuted = fit_lmm(yp, intercept_design(xp, gp));
  CHECK(std::abs(fit.beta[0] - permuted.beta[0]) <= 1e-6);
  CHECK(std::abs(fit.tau2[0] - permuted.tau2[0]) <= 1e-6);
}

TEST_CASE("fit_lmm rejects unusable designs") {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
  Eigen::VectorXd y = 2.0 * x;

  SUBCASE("single group") {
    CHECK_THROWS_AS(fit_lmm(y, intercept_design(x, {0, 0, 0, 0, 0, 0})), InputError);
  }
  SUBCASE("too few observations") {
    DesignMatrix d;
    d.fixed = Eigen::MatrixXd::Ones(3, 2);
    d.fixed.col(1) = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
    d.group_ids = {0, 1, 0};
    d.random = Eigen::MatrixXd::Ones(3, 1);
    CHECK_THROWS_AS(fit_lmm(y.head(3), d), RankError);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(fit_lmm(y.head(5), intercept_design(x, {0, 1, 0, 1, 0, 1})), ShapeError);
  }
  SUBCASE("sparse group ids") {
    CHECK_THROWS_AS(fit_lmm(y, intercept_design(x, {0, 2, 0, 2, 0, 2})), InputError);
  }
}

TEST_CASE("variance partition follows the direct formula") {
  // Fixed column (2,0,-2,0): population variance of X*beta is exactly 2.
  DesignMatrix design;
  design.fixed = Eigen::MatrixXd(4, 1);
  design.fixed << 2.0, 0.0, -2.0, 0.0;
  design.group_ids = {0, 0, 1, 1};
  design.random = Eigen::MatrixXd::Ones(4, 1);

  LmmFit fit;
  fit.beta = Eigen::VectorXd::Ones(1);
  fit.u = Eigen::MatrixXd::Zero(2, 1);
  fit.tau2 = Eigen::VectorXd::Ones(1);
  fit.sigma2 = 1.0;
  fit.converged = true;

  SUBCASE("var 2, tau2 1, sigma2 1") {
    const R2Report r2 = nakagawa_r2(fit, design);
    CHECK(r2.marginal == 0.5);
    CHECK(r2.conditional == 0.75);
  }
  SUBCASE("no random variance collapses the gap") {
    fit.tau2[0] = 0.0;
    const R2Report r2 = nakagawa_r2(fit, design);
    CHECK(r2.marginal == r2.conditional);
  }
  SUBCASE("constant fixed prediction has zero marginal") {
    design.fixed = Eigen::MatrixXd::Ones(4, 1);
    const R2Report r2 = nakagawa_r2(fit, design);
    CHECK(r2.marginal == 0.0);
    CHECK(r2.conditional > 0.0);
  }
  SUBCASE("unconverged fit is refused") {
    fit.converged = false;
    CHECK_THROWS_AS(nakagawa_r2(fit, design), InputError);
  }
  SUBCASE("all variances zero") {
    design.fixed = Eigen::MatrixXd::Ones(4, 1);
    fit.tau2[0] = 0.0;
    fit.sigma2 = 0.0;
    CHECK_THROWS_AS(nakagawa_r2(fit, design), DegenerateVarianceError);
  }
}

TEST_CASE("r2 bounds hold on fitted models") {
  const int n = 120;
  Rng rng(86);
  Eigen::VectorXd x(n), y(n);
  std::vector<int> groups;
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    groups.push_back(i % 4);
    y[i] = 0.8 * x[i] + 0.5 * (groups.back() - 1.5) + 0.3 * rng.normal();
  }
  const DesignMatrix design = intercept_design(x, groups);
  const LmmFit fit = fit_lmm(y, design);
  REQUIRE(fit.converged);
  const R2Report r2 = nakagawa_r2(fit, design);
  CHECK(r2.conditional >= r2.marginal);
  CHECK(r2.marginal >= 0.0);
  CHECK(r2.conditional <= 1.0);
}

TEST_CASE("accuracy model") {
  SUBCASE("benign-first flag with no effect stays near zero") {
    const int n = 500;
    const double model_pull[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    Rng rng(97);
    Eigen::VectorXd acc(n), b(n), e(n);
    std::vector<int> model;
    for (int i = 0; i < n; ++i) {
      b[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
      e[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
      model.push_back(i % 5);
      acc[i] = 0.5 + 0.05 * model_pull[model.back()] * e[i] + 0.02 * rng.uniform(-1.0, 1.0);
    }
    const LmmFit fit = fit_accuracy_model(acc, b, e, model, false);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.beta[1]) <= 0.02);
  }
  SUBCASE("exact additive effect is recovered") {
    const int n = 60;
    Rng rng(98);
    Eigen::VectorXd acc(n), b(n), e(n);
    std::vector<int> model;
    for (int i = 0; i < n; ++i) {
      b[i] = (i / 2) % 2;
      e[i] = i % 2;
      model.push_back(i % 3);
      acc[i] = 0.1 * b[i];
    }
    const LmmFit fit = fit_accuracy_model(acc, b, e, model, false);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.beta[0]) <= 1e-6);
    CHECK(std::abs(fit.beta[1] - 0.1) <= 1e-6);
  }
  SUBCASE("interaction column carries a pure b*e effect") {
    const int n = 60;
    Eigen::VectorXd acc(n), b(n), e(n);
    std::vector<int> model;
    for (int i = 0; i < n; ++i) {
      b[i] = (i / 2) % 2;
      e[i] = i % 2;
      model.push_back(i % 3);
      acc[i] = 0.05 + 0.2 * b[i] * e[i];
    }
    const LmmFit fit = fit_accuracy_model(acc, b, e, model, true);
    REQUIRE(fit.converged);
    REQUIRE(fit.beta.size() == 3);
    CHECK(std::abs(fit.beta[0] - 0.05) <= 1e-6);
    CHECK(std::abs(fit.beta[1]) <= 1e-6);
    CHECK(std::abs(fit.beta[2] - 0.2) <= 1e-6);
  }
  SUBCASE("dead explanation column leaves no random variance") {
    const int n = 40;
    Rng rng(99);
    Eigen::VectorXd acc(n), b(n), e = Eigen::VectorXd::Zero(n);
    std::vector<int> model;
    for (int i = 0; i < n; ++i) {
      b[i] = i % 2;
      model.push_back(i % 4);
      acc[i] = 0.3 + 0.1 * b[i] + 0.01 * rng.uniform(-1.0, 1.0);
    }
    const LmmFit fit = fit_accuracy_model(acc, b, e, model, false);
    REQUIRE(fit.converged);
    CHECK(fit.tau2[0] <= 1e-12);
  }
  SUBCASE("rejects out-of-range inputs") {
    Eigen::VectorXd acc(4), b(4), e(4);
    acc << 0.5, 0.5, 0.5, 0.5;
    b << 0, 1, 0, 1;
    e << 0, 0, 1, 1;
    std::vector<int> model{0, 1, 0, 1};
    Eigen::VectorXd bad_acc = acc;
    bad_acc[2] = 1.5;
    CHECK_THROWS_AS(fit_accuracy_model(bad_acc, b, e, model, false), DomainError);
    Eigen::VectorXd bad_b = b;
    bad_b[0] = 0.5;
    CHECK_THROWS_AS(fit_accuracy_model(acc, bad_b, e, model, false), DomainError);
    CHECK_THROWS_AS(fit_accuracy_model(acc.head(3), b, e, model, false), ShapeError);
  }
}

TEST_CASE("linear probe") {
  SUBCASE("realizable regression target scores r2 1") {
    const int n = 60, d = 5;
    const Eigen::MatrixXd x = testutil::random_matrix(n, d, 111);
    const Eigen::VectorXd w_true = testutil::random_vector(d, 112);
    const Eigen::VectorXd y = (x * w_true).array() + 0.7;
    const ProbeFit fit = fit_linear_probe(x, y, ProbeTask::regression);
    CHECK(std::abs(fit.score - 1.0) <= 1e-9);
    for (int j = 0; j < d; ++j) CHECK(std::abs(fit.weights[j] - w_true[j]) <= 1e-5);
    CHECK(std::abs(fit.intercept - 0.7) <= 1e-5);
  }
  SUBCASE("shuffled labels score a chance-level auc") {
    const int n = 1000, d = 8;
    const Eigen::MatrixXd x = testutil::random_matrix(n, d, 113);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = x.row(i).sum() > 0.0 ? 1.0 : 0.0;
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffler(114);
    shuffler.shuffle(order);
    Eigen::VectorXd yp(n);
    for (int i = 0; i < n; ++i) yp[i] = y[order[i]];
    const ProbeFit fit = fit_linear_probe(x, yp, ProbeTask::binary);
    CHECK(fit.score >= 0.45);
    CHECK(fit.score <= 0.55);
  }
  SUBCASE("separated scores give auc 1") {
    Eigen::MatrixXd x(6, 1);
    x << -3, -2, -1, 1, 2, 3;
    Eigen::VectorXd y(6);
    y << 0, 0, 0, 1, 1, 1;
    const ProbeFit fit = fit_linear_probe(x, y, ProbeTask::binary);
    CHECK(fit.score == 1.0);
  }
  SUBCASE("single-class labels are refused") {
    const Eigen::MatrixXd x = testutil::random_matrix(10, 2, 115);
    CHECK_THROWS_AS(fit_linear_probe(x, Eigen::VectorXd::Ones(10), ProbeTask::binary),
                    DegenerateLabelError);
    CHECK_THROWS_AS(fit_linear_probe(x, Eigen::VectorXd::Zero(10), ProbeTask::binary),
                    DegenerateLabelError);
  }
  SUBCASE("non-binary labels are refused in binary mode") {
    const Eigen::MatrixXd x = testutil::random_matrix(10, 2, 116);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
    y[3] = 0.25;
    CHECK_THROWS_AS(fit_linear_probe(x, y, ProbeTask::binary), DomainError);
  }
  SUBCASE("auc survives monotone transforms of the score") {
    const int n = 80, d = 3;
    const Eigen::MatrixXd x = testutil::random_matrix(n, d, 117);
    Rng rng(118);
    Eigen::VectorXd y(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = x(i, 0) + 0.8 * rng.normal() > 0.0 ? 1 : 0;
      y[i] = labels[i];
    }
    const ProbeFit fit = fit_linear_probe(x, y, ProbeTask::binary);
    Eigen::VectorXd scores = x * fit.weights;
    scores.array() += fit.intercept;
    std::vector<double> raw(scores.data(), scores.data() + n);
    std::vector<double> warped(n);
    for (int i = 0; i < n; ++i) warped[i] = std::tanh(raw[i]) + 2.0 * raw[i];
    CHECK(metrics(raw, labels, Metric::auc) == metrics(warped, labels, Metric::auc));
    CHECK(fit.score == metrics(raw, labels, Metric::auc));
  }
}

TEST_CASE("high-dimensional mixed map") {
  SUBCASE("identity data stays at the identity") {
    const int n = 200, d = 8;
    const Eigen::MatrixXd h = testutil::random_matrix(n, d, 121);
    MapTrainConfig config;
    const HighDimMapFit fit =
        fit_highdim_mixed_map(h, h, std::vector<std::string>(n, "m/a"), config);
    CHECK(fit.holdout_cosine >= 0.999);
    const Eigen::MatrixXd gap = fit.w_random - Eigen::MatrixXd::Identity(d, d);
    CHECK(gap.cwiseAbs().maxCoeff() <= 0.05);
    REQUIRE(fit.index_labels.size() == 1);
    CHECK(fit.index_labels[0] == "m/a");
  }
  SUBCASE("fixed linear map is learned to high cosine") {
    const int n = 300, d = 6;
    const Eigen::MatrixXd h_zsl = testutil::random_matrix(n, d, 122);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d) +
                              0.3 / std::sqrt(double(d)) * testutil::random_matrix(d, d, 123);
    const Eigen::MatrixXd h_icl = h_zsl * r.transpose();
    MapTrainConfig config;
    const HighDimMapFit fit =
        fit_highdim_mixed_map(h_zsl, h_icl, std::vector<std::string>(n, "m/a"), config);
    CHECK(fit.holdout_cosine >= 0.99);
    CHECK(fit.train_cosine >= 0.99);
  }
  SUBCASE("analytic gradient matches finite differences") {
    const int n = 12, d = 8;
    const Eigen::MatrixXd h_zsl = testutil::random_matrix(n, d, 124);
    const Eigen::MatrixXd h_icl = testutil::random_matrix(n, d, 125);
    std::vector<int> index_ids;
    for (int i = 0; i < n; ++i) index_ids.push_back(i % 2);
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);

    MapParams params;
    params.w_random = Eigen::MatrixXd::Identity(d, d) + 0.1 * testutil::random_matrix(d, d, 126);
    params.w_fixed = {0.1 * testutil::random_matrix(d, d, 127),
                      0.1 * testutil::random_matrix(d, d, 128)};
    params.w0 = 0.1 * testutil::random_vector(d, 129);

    const MapParams grad = detail::map_gradient(params, h_zsl, h_icl, index_ids, rows);
    const double h = 1e-5;
    auto check_entry = [&](double got, double fd) {
      CHECK(std::abs(got - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    };
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        check_entry(grad.w_random(r, c),
                    testutil::fd_entry(
                        [&](const Eigen::MatrixXd& w) {
                          MapParams p = params;
                          p.w_random = w;
                          return detail::map_objective(p, h_zsl, h_icl, index_ids, rows);
                        },
                        params.w_random, r, c, h));
        for (int slab = 0; slab < 2; ++slab) {
          check_entry(grad.w_fixed[slab](r, c),
                      testutil::fd_entry(
                          [&](const Eigen::MatrixXd& w) {
                            MapParams p = params;
                            p.w_fixed[slab] = w;
                            return detail::map_objective(p, h_zsl, h_icl, index_ids, rows);
                          },
                          params.w_fixed[slab], r, c, h));
        }
      }
      check_entry(grad.w0[r], testutil::fd_entry(
                                  [&](const Eigen::MatrixXd& w) {
                                    MapParams p = params;
                                    p.w0 = w.col(0);
                                    return detail::map_objective(p, h_zsl, h_icl, index_ids, rows);
                                  },
                                  params.w0, r, 0, h));
    }
  }
  SUBCASE("baseline drops the indexed term") {
    const int n = 200, d = 6;
    const Eigen::MatrixXd h_zsl = testutil::random_matrix(n, d, 131);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d) +
                              0.3 / std::sqrt(double(d)) * testutil::random_matrix(d, d, 132);
    const Eigen::MatrixXd h_icl = h_zsl * r.transpose();
    std::vector<std::string> index(n, "m/a");
    MapTrainConfig config;
    const HighDimMapFit full = fit_highdim_mixed_map(h_zsl, h_icl, index, config);
    config.baseline = true;
    const HighDimMapFit base = fit_highdim_mixed_map(h_zsl, h_icl, index, config);
    CHECK(base.baseline);
    CHECK(base.w_fixed.empty());
    // One shared label means the fixed slab only duplicates w_random, so the
    // baseline reaches the same quality up to optimizer noise.
    CHECK(std::abs(base.holdout_cosine - full.holdout_cosine) <= 0.02);
  }
  SUBCASE("rejects mismatched shapes") {
    const Eigen::MatrixXd a = testutil::random_matrix(10, 4, 133);
    const Eigen::MatrixXd b = testutil::random_matrix(10, 5, 134);
    const std::vector<std::string> index(10, "m/a");
    CHECK_THROWS_AS(fit_highdim_mixed_map(a, b, index, MapTrainConfig{}), ShapeError);
    CHECK_THROWS_AS(
        fit_highdim_mixed_map(a, a, std::vector<std::string>(9, "m/a"), MapTrainConfig{}),
        ShapeError);
  }
  SUBCASE("config validation") {
    MapTrainConfig config;
    config.lr = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = MapTrainConfig{};
    config.holdout = 1.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
  }
}

TEST_CASE("distance regression") {
  SUBCASE("identity relation is exact") {
    const Eigen::MatrixXd d_zsl = testutil::random_matrix(100, 4, 141);
    const DistanceRegressionFit fit = fit_distance_regression(d_zsl, d_zsl);
    CHECK(std::abs(fit.r2 - 1.0) <= 1e-9);
    const Eigen::MatrixXd gap = fit.w - Eigen::MatrixXd::Identity(4, 4);
    CHECK(gap.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(fit.w0.cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("affine relation recovers slope and intercept") {
    const Eigen::MatrixXd d_zsl = testutil::random_matrix(50, 1, 142);
    const Eigen::MatrixXd d_icl = (0.5 * d_zsl).array() + 1.0;
    const DistanceRegressionFit fit = fit_distance_regression(d_zsl, d_icl);
    CHECK(std::abs(fit.w(0, 0) - 0.5) <= 1e-6);
    CHECK(std::abs(fit.w0[0] - 1.0) <= 1e-6);
    CHECK(std::abs(fit.r2 - 1.0) <= 1e-9);
  }
  SUBCASE("independent targets explain nothing") {
    const Eigen::MatrixXd d_zsl = testutil::random_matrix(1000, 1, 143);
    const Eigen::MatrixXd d_icl = testutil::random_matrix(1000, 1, 144);
    const DistanceRegressionFit fit = fit_distance_regression(d_zsl, d_icl);
    CHECK(fit.r2 < 0.05);
  }
  SUBCASE("underdetermined system without ridge is refused") {
    const Eigen::MatrixXd d_zsl = testutil::random_matrix(4, 6, 145);
    const Eigen::MatrixXd d_icl = testutil::random_matrix(4, 6, 146);
    CHECK_THROWS_AS(fit_distance_regression(d_zsl, d_icl, 0.0), RankError);
  }
  SUBCASE("row count mismatch") {
    const Eigen::MatrixXd a = testutil::random_matrix(10, 2, 147);
    const Eigen::MatrixXd b = testutil::random_matrix(9, 2, 148);
    CHECK_THROWS_AS(fit_distance_regression(a, b), ShapeError);
  }
}

}  // TEST_SUITE
