#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "winstat/estimators.hpp"
#include "winstat/logit_fit.hpp"
#include "winstat/polr_fit.hpp"

namespace winstat {

enum class VarianceRoute { influence_function, pairwise_moments };

struct VarianceComponents {
    double var_win = 0.0;
    double var_loss = 0.0;
    double cov = 0.0;
    Eigen::VectorXd phi_win;   // per-subject contributions (influence route)
    Eigen::VectorXd phi_loss;
    Method method = Method::unadj;
    VarianceRoute route = VarianceRoute::influence_function;
};

// Fitted nuisance models the influence decomposition needs.  The propensity
// model is required for every scheme except unadj; the outcome model and its
// covariate matrix are required for the augmented schemes.
struct ModelContext {
    const PropensityModel* propensity = nullptr;
    const OrdinalModel* outcome = nullptr;
    const Eigen::MatrixXd* outcome_x = nullptr;
    FeatureMap feature_map;
};

// Closed-form variance from the estimated influence function: projections of
// the pairwise sums, centered at the point estimate, plus chain-rule terms
// propagating the estimated propensity (and, for augmented schemes, outcome)
// model parameters via finite-difference derivative aggregates.
// var = n^-2 sum phi^2, cov = n^-2 sum phi_win phi_loss.
VarianceComponents variance_if(Method m, const std::vector<int>& z,
                               const std::vector<int>& y, int n_levels,
                               const ModelContext& ctx);

// Two-sample U-statistic variance of the unadjusted estimator from plug-in
// pairwise concordance moments; also yields the win/loss covariance.
VarianceComponents variance_pairwise(const std::vector<int>& z, const std::vector<int>& y,
                                 int n_levels);

// Delta-method variances of the win ratio and win difference, with
// two-sided confidence intervals.  The ratio interval is point +/- z * SE on
// the natural scale unless log_scale_wr is set, in which case the interval
// (not the point or SE) is computed on the log scale.
WinEstimate delta_wr_wd(const VarianceComponents& vc, WinEstimate est,
                        double conf_level, bool log_scale_wr = false);

// Percent variance reduction relative to the unadjusted standard error.
double pvr(double se_unadj, double se_method);

}  // namespace winstat
