#pragma once

#include <Eigen/Core>
#include <vector>

#include "winstat/common.hpp"

namespace winstat {

enum class FeatureExpansion { linear, quadratic, interactions };

// Expands a covariate block into outcome-model features.  quadratic adds
// squares of the non-binary columns (a squared binary duplicates the
// column); interactions adds all pairwise products.
struct FeatureMap {
    FeatureExpansion expansion = FeatureExpansion::linear;
    bool include_treatment = true;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

// Cumulative logit model P(Y <= l | X) = expit(a_l - xi' w) with outcome
// features w (expanded covariates, then the treatment indicator).  The
// natural parameter vector is (a_1..a_{L-1}, xi); the fit itself runs on an
// unconstrained scale with a_l = a_1 + sum_{k<l} exp(phi_k), which keeps the
// cutpoints ordered and every fitted category probability positive.
struct OrdinalModel {
    Eigen::VectorXd alpha;    // natural parameters at the MLE
    int n_levels = 0;
    int n_features = 0;       // slope count, excluding the treatment column
    bool has_treatment = true;
    Eigen::MatrixXd fisher;   // averaged observed information, natural scale
    Eigen::MatrixXd scores;   // n x dim per-subject scores at the MLE
    double loglik = 0.0;
    int iterations = 0;
    double max_score = 0.0;

    int dim() const { return static_cast<int>(alpha.size()); }
};

struct PolrOptions {
    int max_iter = 100;
    double score_tol = 1e-8;
};

// Requires every level 1..n_levels to be observed and the design
// [1, features, z] to have full column rank; throws model_error otherwise
// and on non-convergence.
OrdinalModel fit_proportional_odds(const Eigen::MatrixXd& x, const std::vector<int>& z,
                                   const std::vector<int>& y, int n_levels,
                                   const FeatureMap& fm, const PolrOptions& opts = {});

// Model-based outcome distributions for every subject under either arm.
struct CategoryProbs {
    Eigen::MatrixXd p1;  // n x L category probabilities with z = 1
    Eigen::MatrixXd p0;  // n x L category probabilities with z = 0
};

CategoryProbs category_probs(const OrdinalModel& om, const Eigen::MatrixXd& x,
                             const FeatureMap& fm);

// Same, evaluated at an alternative natural parameter vector.
CategoryProbs category_probs_at(const OrdinalModel& om, const Eigen::MatrixXd& x,
                                const FeatureMap& fm, const Eigen::VectorXd& alpha_alt);

// Per-subject influence rows l_i = I^{-1} s_i; rows average to zero at the
// MLE and n^{-2} sum_i l_i l_i' estimates var(alpha).
Eigen::MatrixXd influence_alpha(const OrdinalModel& om);

// Weighted level-wise aggregates of the pairwise win expectation
// mu(u, v) = sum_{l > l'} p1_l(u) p0_l'(v).  col1/col0 are the weighted
// column sums of p1 and p0; diag_win/diag_loss hold the same-subject values
// needed to correct double sums restricted to distinct pairs.
struct MuTables {
    Eigen::VectorXd col1;       // L: sum_i w_row_i p1(i, l)
    Eigen::VectorXd col0;       // L: sum_j w_col_j p0(j, l)
    Eigen::VectorXd diag_win;   // n: sum_{l > l'} p1(i, l) p0(i, l')
    Eigen::VectorXd diag_loss;  // n: sum_{l < l'} p1(i, l) p0(i, l')
};

MuTables mu_pair_tables(const CategoryProbs& cp, const Eigen::VectorXd& w_row,
                        const Eigen::VectorXd& w_col);

}  // namespace winstat
