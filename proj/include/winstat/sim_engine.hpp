#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "winstat/common.hpp"

namespace winstat {

enum class DgpModel { quadratic, interaction };

DgpModel dgp_model_from_name(const std::string& name);
std::string dgp_model_name(DgpModel m);

// Three-level ordinal outcome generated from six covariates through
// cumulative logits a1 + lin and a2 + lin, where lin holds arm-dependent
// slopes (scaled by 0.5 + 0.5 z when heterogeneous) plus either squared or
// pairwise-interaction terms and the additive treatment effect delta.
struct DgpSpec {
    DgpModel model = DgpModel::quadratic;
    double pi = 0.5;
    double delta = 1.0;
    double a1 = 1.0;
    double a2 = 0.05;
    bool heterogeneous_slopes = true;

    static DgpSpec quadratic_default();    // delta = 1
    static DgpSpec interaction_default();  // delta = 2

    int n_levels() const { return 3; }
    int n_covariates() const { return 6; }
};

// Columns: N(1, 0.3^2), N(0.9, 0.4^2), N(0.8, 0.5^2), Bern(0.75),
// Bern(0.5), Bern(0.25), independent.
Eigen::MatrixXd gen_covariates(int n, std::mt19937_64& rng);

// Conditional category probabilities (n x 3) under assignment arm.
Eigen::MatrixXd dgp_category_probs(const DgpSpec& spec, const Eigen::MatrixXd& x,
                                   int arm);

// Potential outcomes under control and treatment, drawn independently given
// the covariates (the estimand compares distinct subjects, so their joint
// coupling is irrelevant).
void gen_potential_outcomes(const DgpSpec& spec, const Eigen::MatrixXd& x,
                            std::mt19937_64& rng, std::vector<int>& y0,
                            std::vector<int>& y1);

struct TruthValues {
    double tau_win = 0.0;
    double tau_loss = 0.0;
    double wr = 0.0;
    double wd = 0.0;
    double se_wr = 0.0;
    double se_wd = 0.0;
    long draws = 0;
};

// Marginal category probabilities of Y(1) and Y(0) averaged analytically
// over covariate draws; tau_win = sum_{l > l'} P(Y(1)=l) P(Y(0)=l').
// Depends only on the outcome process, not on the randomization probability.
TruthValues mc_truth(const DgpSpec& spec, long draws, std::uint64_t seed);

// Deterministic stream derivation so replicate results do not depend on the
// thread count.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

struct ExperimentConfig {
    DgpSpec dgp;
    std::vector<int> sample_sizes;
    int replications = 1000;
    std::uint64_t seed = 12345;
    std::vector<std::string> methods = {"unadj", "ipw", "ow", "aipw", "aow"};
    std::string outcome_model = "correct";  // correct | mis | both
    double confidence = 0.95;
    int threads = 1;
    long truth_draws = 2000000;
    std::optional<std::pair<double, double>> truth_taus;  // (tau_win, tau_loss)

    // JSON file; // and /* */ comments allowed.  Unknown keys are errors.
    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
};

struct EstimandSummary {
    double truth = 0.0;
    double mean_estimate = 0.0;
    double relative_bias_pct = 0.0;
    double mc_variance = 0.0;
    double mean_estimated_variance = 0.0;
    double variance_ratio = 0.0;  // mean estimated variance / MC variance
    double coverage = 0.0;
    double mcsd = 0.0;
    double aese = 0.0;  // average estimated standard error
    double relative_efficiency = 0.0;  // MC variance of unadj / MC variance
    double pvr_pct = 0.0;  // from mean estimated variances, vs unadj
};

struct MethodSummary {
    std::string method;  // unadj, unadj_pm, ipw, ow, aipw, aow, aipw_mis, aow_mis
    EstimandSummary wr;
    EstimandSummary wd;
};

struct CellReport {
    int n = 0;
    int replications = 0;
    int failures = 0;
    std::vector<MethodSummary> methods;
};

struct SimulationReport {
    ExperimentConfig config;
    TruthValues truth;
    std::vector<CellReport> cells;

    std::string to_csv() const;
    std::string to_json() const;
    std::string to_text() const;
};

// Runs the replication study: per replicate draw covariates, potential
// outcomes and assignments, fit the working models, and compute every
// requested estimate with its influence-function variance (plus the
// pairwise-moment variance for unadj, reported as unadj_pm).  Replicates
// where any fit fails are excluded and counted; more than 5% failures
// aborts.
SimulationReport run_experiment(const ExperimentConfig& cfg);

}  // namespace winstat
