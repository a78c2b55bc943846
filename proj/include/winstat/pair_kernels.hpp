#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "winstat/polr_fit.hpp"

namespace winstat {

// Weighted per-level totals for each arm plus inclusive prefix sums
// (prefix(l) = sum of levels 1..l, prefix(0) = 0).  These factorize every
// treated-by-control double sum into O(n + L) work.
struct ArmWeightTables {
    Eigen::VectorXd t, c;                // L: level totals, treated / control
    Eigen::VectorXd t_prefix, c_prefix;  // L+1: inclusive prefix sums
    double t_total = 0.0, c_total = 0.0;

    double t_below(int level) const { return t_prefix(level - 1); }
    double t_above(int level) const { return t_total - t_prefix(level); }
    double c_below(int level) const { return c_prefix(level - 1); }
    double c_above(int level) const { return c_total - c_prefix(level); }
};

ArmWeightTables arm_weight_tables(const std::vector<int>& z, const std::vector<int>& y,
                                  int n_levels, const Eigen::VectorXd& w1,
                                  const Eigen::VectorXd& w0);

// All pairwise double sums used by the estimators.  win/loss/denom run over
// treated i, control j; the aug_cross terms replace the comparison indicator
// with the model win expectation mu(X_i, X_j); the aug_all terms and h_denom
// run over all ordered pairs i != j with weights a_i b_j.
struct KernelSums {
    double win = 0.0;
    double loss = 0.0;
    double denom = 0.0;
    double aug_cross_win = 0.0;
    double aug_cross_loss = 0.0;
    double aug_all_win = 0.0;
    double aug_all_loss = 0.0;
    double h_denom = 0.0;
};

KernelSums factorized_sums(const std::vector<int>& z, const std::vector<int>& y,
                           int n_levels, const Eigen::VectorXd& w1,
                           const Eigen::VectorXd& w0, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b, const CategoryProbs* cp);

// Explicit double loops over ordered pairs; identical contract, used as the
// testing oracle.  Refuses n beyond the cap.
KernelSums brute_force_sums(const std::vector<int>& z, const std::vector<int>& y,
                            int n_levels, const Eigen::VectorXd& w1,
                            const Eigen::VectorXd& w0, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b, const CategoryProbs* cp,
                            int n_cap = 2000);

// Per-subject averages of the symmetrized pairwise kernels.  mean(q_win)
// equals the point estimate of the win probability (and likewise for loss),
// which is the anchor identity for the influence-function variance.
struct Projections {
    Eigen::VectorXd q_win;
    Eigen::VectorXd q_loss;
};

// Plain weighted estimator: q_i collects subject i's share of the win/loss
// sums through both pair roles, normalized by the pair-weight total.
Projections projections_qhat(const std::vector<int>& z, const std::vector<int>& y,
                             int n_levels, const Eigen::VectorXd& w1,
                             const Eigen::VectorXd& w0);

// Augmented estimator: adds the residual (indicator minus mu) cross part and
// the all-pairs model part with same-subject diagonal corrections.
Projections projections_qhat(const std::vector<int>& z, const std::vector<int>& y,
                             int n_levels, const Eigen::VectorXd& w1,
                             const Eigen::VectorXd& w0, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, const CategoryProbs& cp);

// Central finite-difference Jacobian of a smooth vector functional with
// per-coordinate step 1e-5 (1 + |theta0_k|).  Row r, column k holds
// d functional_r / d theta_k.
Eigen::MatrixXd derivative_aggregate(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& functional,
    const Eigen::VectorXd& theta0);

}  // namespace winstat
