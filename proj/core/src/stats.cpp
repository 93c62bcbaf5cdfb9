#include "adaptrt/stats.hpp"

#include <algorithm>
#include <cmath>

#include "adaptrt/errors.hpp"

namespace adaptrt {

double abs_t_stat(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int coef_index) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (coef_index < 0 || coef_index >= p)
    throw ArgumentError("abs_t_stat: coefficient index out of range");
  if (n <= p) return 0.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) return 0.0;  // singular design, recorded as 0

  const Eigen::VectorXd beta = qr.solve(y);
  const double rss = (y - x * beta).squaredNorm();
  const double sigma2 = rss / static_cast<double>(n - p);

  const Eigen::MatrixXd xtx_inv =
      (x.transpose() * x).llt().solve(Eigen::MatrixXd::Identity(p, p));
  const double var = sigma2 * xtx_inv(coef_index, coef_index);
  if (var <= 0.0) return kTStatSentinel;
  const double t = std::abs(beta(coef_index)) / std::sqrt(var);
  if (!std::isfinite(t) || t > kTStatSentinel) return kTStatSentinel;
  return t;
}

Eigen::VectorXd ols_min_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  cod.setThreshold(1e-10);
  return cod.solve(y);
}

void lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
              const std::vector<bool>& penalized, Eigen::VectorXd& beta,
              int max_sweeps, double tol) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (static_cast<int>(penalized.size()) != p)
    throw ArgumentError("lasso_cd: penalty mask size mismatch");
  if (beta.size() != p) beta = Eigen::VectorXd::Zero(p);
  if (n == 0) return;

  Eigen::VectorXd col_sq(p);
  for (int j = 0; j < p; ++j) col_sq(j) = x.col(j).squaredNorm() / n;

  Eigen::VectorXd resid = y - x * beta;
  const auto update = [&](int j) {
    const double old = beta(j);
    const double rho = x.col(j).dot(resid) / n + col_sq(j) * old;
    double next;
    if (penalized[static_cast<std::size_t>(j)]) {
      if (rho > lambda)
        next = (rho - lambda) / col_sq(j);
      else if (rho < -lambda)
        next = (rho + lambda) / col_sq(j);
      else
        next = 0.0;
    } else {
      next = rho / col_sq(j);
    }
    if (next != old) {
      resid -= (next - old) * x.col(j);
      beta(j) = next;
    }
    return std::abs(next - old);
  };

  // Full sweeps establish the active set; cheap active-set sweeps do the bulk
  // of the convergence work in between.
  int sweeps_used = 0;
  while (sweeps_used < max_sweeps) {
    double max_move = 0.0;
    double max_beta = 1.0;
    std::vector<int> active;
    for (int j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) continue;
      max_move = std::max(max_move, update(j));
      max_beta = std::max(max_beta, std::abs(beta(j)));
      if (beta(j) != 0.0) active.push_back(j);
    }
    ++sweeps_used;
    if (max_move <= tol * max_beta) break;
    while (sweeps_used < max_sweeps) {
      double inner_move = 0.0;
      double inner_beta = 1.0;
      for (int j : active) {
        inner_move = std::max(inner_move, update(j));
        inner_beta = std::max(inner_beta, std::abs(beta(j)));
      }
      ++sweeps_used;
      if (inner_move <= tol * inner_beta) break;
    }
  }
}

Eigen::VectorXd lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::vector<double>& lambda_grid, int folds,
                         const std::vector<bool>& penalized, double* chosen_lambda,
                         int max_sweeps, double tol) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (lambda_grid.empty()) throw ArgumentError("lasso_cv: empty lambda grid");
  const int k = std::max(2, std::min(folds, n));

  std::vector<double> cv_err(lambda_grid.size(), 0.0);
  for (int fold = 0; fold < k; ++fold) {
    const int lo = static_cast<int>(static_cast<long>(fold) * n / k);
    const int hi = static_cast<int>(static_cast<long>(fold + 1) * n / k);
    const int n_test = hi - lo;
    const int n_train = n - n_test;
    if (n_train == 0 || n_test == 0) continue;

    Eigen::MatrixXd xtr(n_train, p);
    Eigen::VectorXd ytr(n_train);
    int r = 0;
    for (int i = 0; i < n; ++i) {
      if (i >= lo && i < hi) continue;
      xtr.row(r) = x.row(i);
      ytr(r) = y(i);
      ++r;
    }
    // Warm-start down the grid: larger lambdas first.
    std::vector<std::size_t> order(lambda_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return lambda_grid[a] > lambda_grid[b];
    });
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (std::size_t oi : order) {
      lasso_cd(xtr, ytr, lambda_grid[oi], penalized, beta, max_sweeps, tol);
      for (int i = lo; i < hi; ++i) {
        const double e = y(i) - x.row(i).dot(beta);
        cv_err[oi] += e * e;
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
    const bool better = cv_err[i] < cv_err[best] ||
                        (cv_err[i] == cv_err[best] && lambda_grid[i] > lambda_grid[best]);
    if (better) best = i;
  }
  if (chosen_lambda) *chosen_lambda = lambda_grid[best];

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  lasso_cd(x, y, lambda_grid[best], penalized, beta, max_sweeps, tol);
  return beta;
}

}  // namespace adaptrt
