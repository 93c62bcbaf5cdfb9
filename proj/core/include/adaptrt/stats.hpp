#pragma once

#include <Eigen/Dense>
#include <vector>

namespace adaptrt {

// Guard value for t-statistics whose residual variance is exactly zero.
inline constexpr double kTStatSentinel = 1e12;

// |beta_j / SE(beta_j)| from OLS with SE^2 = sigma2 * [(X'X)^-1]_jj and
// sigma2 = RSS / (n - rank).  Rank-deficient or over-saturated designs give
// 0; an exact fit gives the sentinel.
double abs_t_stat(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int coef_index);

// Minimum-norm least squares coefficients (rank-revealing; works for any
// design, including singular ones).
Eigen::VectorXd ols_min_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Cyclic coordinate descent for
//   (1/(2n)) ||y - X beta||^2 + lambda * sum_{j penalized} |beta_j|.
// `beta` is both warm start and output.  Stops after max_sweeps or when the
// largest coefficient move falls below tol * max(1, |beta|_inf).
void lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
              const std::vector<bool>& penalized, Eigen::VectorXd& beta,
              int max_sweeps = 200, double tol = 1e-8);

// k-fold cross-validated lasso over a lambda grid (contiguous fold blocks,
// ties broken toward the larger lambda).  Returns the refit-on-all-data
// coefficients and reports the chosen lambda.
Eigen::VectorXd lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::vector<double>& lambda_grid, int folds,
                         const std::vector<bool>& penalized,
                         double* chosen_lambda = nullptr, int max_sweeps = 200,
                         double tol = 1e-8);

}  // namespace adaptrt
