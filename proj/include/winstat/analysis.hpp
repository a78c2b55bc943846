#pragma once

#include <string>
#include <vector>

#include "winstat/estimators.hpp"
#include "winstat/inference.hpp"
#include "winstat/polr_fit.hpp"
#include "winstat/trial_data.hpp"

namespace winstat {

struct AnalysisOptions {
    std::vector<std::string> methods = {"unadj", "ipw", "ow", "aipw", "aow"};
    FeatureExpansion outcome_features = FeatureExpansion::linear;
    double confidence = 0.95;
    bool log_scale_wr = false;
    // Variance route for unadj: influence function (default) or plug-in
    // pairwise concordance moments.
    bool pairwise_for_unadj = false;
    // Covariates used by each working model, by column name; empty = all.
    std::vector<std::string> propensity_covariates;
    std::vector<std::string> outcome_covariates;
};

struct MethodResult {
    std::string method;
    WinEstimate estimate;          // point estimates, variances, intervals
    double pvr_wr;                 // percent variance reduction vs unadj
    double pvr_wd;                 // (NaN when unadj is not among the methods)
    std::string variance_route;    // "influence_function" or "pairwise_moments"
};

struct AnalysisResult {
    int n = 0;
    int n_treated = 0;
    int n_control = 0;
    int n_levels = 0;
    std::string direction;  // orientation the estimates refer to
    double confidence = 0.95;
    std::vector<MethodResult> methods;

    std::string to_json() const;  // versioned schema; NaN renders as null
    std::string to_text() const;  // aligned table
};

// Full analysis of one dataset: validation, shared propensity and ordinal
// outcome fits, then per requested method the point estimates, variances,
// delta-method intervals, and PVR against the unadjusted rows.  The dataset
// must already be oriented so larger outcome levels are favorable
// (recode_direction).  Deterministic: no randomness anywhere in this path.
AnalysisResult run_analysis(const TrialDataset& ds, const AnalysisOptions& opts);

}  // namespace winstat
