#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

#include "winstat/pair_kernels.hpp"

namespace winstat {

enum class Method { unadj, ipw, ow, aipw, aow };

std::string method_name(Method m);
Method method_from_name(const std::string& name);  // throws data_error
bool uses_propensity(Method m);
bool is_augmented(Method m);

// Per-subject pair weights defining each scheme: w1 applies to treated
// subjects, w0 to controls; a/b weight the all-pairs model term of the
// augmented estimators (sized zero for plain schemes).
struct SchemeWeights {
    Eigen::VectorXd w1, w0, a, b;
};

// e_hat may be empty for the unadjusted scheme.
SchemeWeights scheme_weights(Method m, const Eigen::VectorXd& e_hat, int n);

// Point estimates; variance and interval fields are filled by the
// inference routines.  The win ratio is flagged undefined instead of
// infinite when the loss probability estimate is zero.
struct WinEstimate {
    Method method = Method::unadj;
    double tau_win = 0.0;
    double tau_loss = 0.0;
    double wr = std::numeric_limits<double>::quiet_NaN();
    bool wr_defined = false;
    double wd = 0.0;
    double var_win = std::numeric_limits<double>::quiet_NaN();
    double var_loss = std::numeric_limits<double>::quiet_NaN();
    double cov = std::numeric_limits<double>::quiet_NaN();
    double var_wr = std::numeric_limits<double>::quiet_NaN();
    double var_wd = std::numeric_limits<double>::quiet_NaN();
    double wr_lower = std::numeric_limits<double>::quiet_NaN();
    double wr_upper = std::numeric_limits<double>::quiet_NaN();
    double wd_lower = std::numeric_limits<double>::quiet_NaN();
    double wd_upper = std::numeric_limits<double>::quiet_NaN();
    double conf_level = std::numeric_limits<double>::quiet_NaN();
};

// Single entry point used by estimation and by the finite-difference
// derivative aggregates: e_hat is ignored for unadj, cp is required for the
// augmented schemes.
WinEstimate estimate(Method m, const std::vector<int>& z, const std::vector<int>& y,
                     int n_levels, const Eigen::VectorXd& e_hat,
                     const CategoryProbs* cp);

WinEstimate estimate_unadj(const std::vector<int>& z, const std::vector<int>& y,
                           int n_levels);
WinEstimate estimate_weighted(const std::vector<int>& z, const std::vector<int>& y,
                              int n_levels, const Eigen::VectorXd& e_hat, Method m);
WinEstimate estimate_augmented(const std::vector<int>& z, const std::vector<int>& y,
                               int n_levels, const Eigen::VectorXd& e_hat,
                               const CategoryProbs& cp, Method m);

}  // namespace winstat
