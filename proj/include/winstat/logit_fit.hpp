#pragma once

#include <Eigen/Core>
#include <vector>

#include "winstat/common.hpp"

namespace winstat {

// Logistic regression of treatment on covariates, fit by iteratively
// reweighted least squares.  The design always carries an intercept, so a
// fit with no covariates yields a constant propensity of n1/n.
struct PropensityModel {
    Eigen::VectorXd beta;     // intercept first, then covariate slopes
    Eigen::VectorXd fitted;   // e_i = P(z_i = 1 | x_i)
    Eigen::VectorXd residual; // z_i - e_i
    Eigen::MatrixXd design;   // n x (p+1), ones column first
    Eigen::MatrixXd fisher;   // averaged information (1/n) sum e(1-e) x x'
    int iterations = 0;
    double max_score = 0.0;   // residual score inf-norm at the solution

    // Fitted propensities at an alternative coefficient vector.
    Eigen::VectorXd fitted_at(const Eigen::VectorXd& beta_alt) const;
};

struct LogitOptions {
    int max_iter = 50;
    double score_tol = 1e-8;       // converged when score inf-norm is below
    double coef_tol = 1e-10;       // or the relative coefficient change is below
    double boundary_tol = 1e-10;   // fitted value this close to 0/1 is separation
};

// Requires [1, x] to have full column rank and both arms non-empty.  Throws
// model_error on rank deficiency, separation, or non-convergence.
PropensityModel fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& z,
                             const LogitOptions& opts = {});

// Per-subject influence rows l_i = I^{-1} x_i (z_i - e_i), so that
// n^{-2} sum_i l_i l_i' estimates var(beta).  Rows average to zero.
Eigen::MatrixXd influence_beta(const PropensityModel& pm);

}  // namespace winstat
