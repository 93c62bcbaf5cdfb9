#include <doctest.h>

#include <cmath>

#include "adaptrt/rng.hpp"
#include "adaptrt/stats.hpp"

using namespace adaptrt;

TEST_CASE("abs_t_stat degenerate cases") {
  // Exact linear fit: zero residual variance hits the sentinel.
  Eigen::MatrixXd x(4, 2);
  Eigen::VectorXd y(4);
  for (int i = 0; i < 4; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    y(i) = 2.0 * i + 1.0;
  }
  CHECK(abs_t_stat(x, y, 1) == kTStatSentinel);

  // Intercept-only design with constant response: sigma-hat is zero.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(5, 1);
  Eigen::VectorXd cy = Eigen::VectorXd::Constant(5, 3.25);
  CHECK(abs_t_stat(ones, cy, 0) == kTStatSentinel);

  // Singular design (duplicate column) records 0.
  Eigen::MatrixXd dup(5, 2);
  dup.col(0).setOnes();
  dup.col(1).setOnes();
  Eigen::VectorXd ry(5);
  ry << 1, 2, 0, -1, 3;
  CHECK(abs_t_stat(dup, ry, 1) == 0.0);

  // Over-saturated design records 0.
  Eigen::MatrixXd wide(2, 3);
  wide.setRandom();
  Eigen::VectorXd wy(2);
  wy << 1, 2;
  CHECK(abs_t_stat(wide, wy, 0) == 0.0);
}

TEST_CASE("abs_t_stat matches a hand-computed two-point regression") {
  // y = (1, 3, 2, 5), x = (0, 1, 2, 3): beta and SE computable by hand.
  Eigen::MatrixXd x(4, 2);
  Eigen::VectorXd y(4);
  const double ys[4] = {1, 3, 2, 5};
  for (int i = 0; i < 4; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    y(i) = ys[i];
  }
  // beta = (1.1, 1.1); residuals (-0.1, 0.8, -1.3, 0.6); RSS = 2.70;
  // sigma2 = 1.35; var(beta1) = sigma2/Sxx = 0.27; |t| = 1.1/sqrt(0.27).
  const double expected = 1.1 / std::sqrt(0.27);
  CHECK(abs_t_stat(x, y, 1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("abs_t_stat null distribution matches |t| moments") {
  // Coefficient truly zero: the statistic is |t_{n-p}|; the Monte Carlo mean
  // must sit within 3 SEs of the closed-form mean of |t_nu|.
  Rng rng(101);
  const int n = 1000, reps = 400;
  const int nu = n - 2;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = rng.normal();
      y(i) = rng.normal();
    }
    const double t = abs_t_stat(x, y, 1);
    sum += t;
    sumsq += t * t;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sumsq / reps - mean * mean);
  // E|t_nu| = 2 sqrt(nu) Gamma((nu+1)/2) / (sqrt(pi) (nu-1) Gamma(nu/2)).
  const double log_ratio = std::lgamma((nu + 1) / 2.0) - std::lgamma(nu / 2.0);
  const double expected =
      2.0 * std::sqrt(static_cast<double>(nu)) * std::exp(log_ratio) /
      (std::sqrt(M_PI) * (nu - 1));
  CHECK(std::abs(mean - expected) < 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("ols_min_norm handles singular designs") {
  Eigen::MatrixXd x(3, 2);
  x.col(0).setOnes();
  x.col(1).setOnes();
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  const Eigen::VectorXd beta = ols_min_norm(x, y);
  CHECK((x * beta - Eigen::VectorXd::Constant(3, 2.0)).norm() < 1e-9);
}

TEST_CASE("lasso_cd satisfies the KKT conditions") {
  Rng rng(7);
  const int n = 40, p = 8;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    y(i) = 2.0 * x(i, 0) - 1.0 * x(i, 3) + 0.5 * rng.normal();
  }
  const double lambda = 0.2;
  std::vector<bool> pen(p, true);
  pen[0] = false;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  lasso_cd(x, y, lambda, pen, beta, 2000, 1e-12);
  const Eigen::VectorXd grad = x.transpose() * (y - x * beta) / n;
  for (int j = 0; j < p; ++j) {
    if (!pen[static_cast<std::size_t>(j)]) {
      CHECK(std::abs(grad(j)) < 1e-6);
    } else if (beta(j) == 0.0) {
      CHECK(std::abs(grad(j)) <= lambda + 1e-6);
    } else {
      CHECK(grad(j) == doctest::Approx(lambda * (beta(j) > 0 ? 1.0 : -1.0))
                           .epsilon(1e-5));
    }
  }
}

TEST_CASE("lasso_cd with zero penalty equals least squares") {
  Rng rng(13);
  const int n = 30, p = 4;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    y(i) = x(i, 1) - x(i, 2) + 0.1 * rng.normal();
  }
  std::vector<bool> pen(p, true);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  lasso_cd(x, y, 0.0, pen, beta, 5000, 1e-13);
  const Eigen::VectorXd ols = ols_min_norm(x, y);
  CHECK((beta - ols).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lasso_cv is deterministic and picks a reasonable penalty") {
  Rng rng(19);
  const int n = 60, p = 10;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    y(i) = 3.0 * x(i, 0) + 0.3 * rng.normal();
  }
  std::vector<bool> pen(p, true);
  double lam1 = 0.0, lam2 = 0.0;
  const Eigen::VectorXd b1 = lasso_cv(x, y, {0.01, 0.1, 1.0, 10.0}, 5, pen, &lam1);
  const Eigen::VectorXd b2 = lasso_cv(x, y, {0.01, 0.1, 1.0, 10.0}, 5, pen, &lam2);
  CHECK(lam1 == lam2);
  CHECK((b1 - b2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lam1 < 10.0);  // strong signal: heaviest shrinkage cannot win
  CHECK(std::abs(b1(0) - 3.0) < 0.3);
}
