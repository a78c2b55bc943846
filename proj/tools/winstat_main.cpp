#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "winstat/analysis.hpp"
#include "winstat/sim_engine.hpp"
#include "winstat/trial_data.hpp"

namespace {

struct AnalyzeArgs {
    std::string data;
    std::string outcome;
    std::string treatment;
    std::vector<std::string> covariates;
    std::string direction = "higher_better";
    std::vector<std::string> methods = {"unadj", "ipw", "ow", "aipw", "aow"};
    std::vector<std::string> prop_covariates;
    std::vector<std::string> outcome_covariates;
    std::string outcome_features = "linear";
    std::vector<std::string> levels;  // outcome labels, worst to best
    int n_levels = 0;                 // 0 = infer from the data
    double confidence = 0.95;
    bool log_wr_ci = false;
    std::string unadj_variance = "influence";
    std::string format = "table";
    std::string out;
};

struct SimulateArgs {
    std::string config;
    int reps = -1;
    std::int64_t seed = -1;
    int threads = -1;
    std::string out_prefix;
};

struct TruthArgs {
    std::string model;
    double pi = 0.5;
    long draws = 2000000;
    std::uint64_t seed = 12345;
};

void write_or_print(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    f << text;
    if (!f) throw winstat::data_error("cannot write output file: " + path);
}

int run_analyze(const AnalyzeArgs& a) {
    winstat::CsvSpec cs;
    cs.outcome = a.outcome;
    cs.treatment = a.treatment;
    cs.covariates = a.covariates;
    if (a.n_levels > 0) cs.declared_levels = a.n_levels;
    cs.level_order = a.levels;
    winstat::TrialDataset ds = winstat::load_csv(a.data, cs);

    const winstat::Direction dir =
        a.direction == "lower_better" || a.direction == "lower"
            ? winstat::Direction::lower_better
            : winstat::Direction::higher_better;
    ds = winstat::recode_direction(std::move(ds), dir);

    winstat::AnalysisOptions opts;
    opts.methods = a.methods;
    if (a.outcome_features == "quadratic") {
        opts.outcome_features = winstat::FeatureExpansion::quadratic;
    } else if (a.outcome_features == "interactions") {
        opts.outcome_features = winstat::FeatureExpansion::interactions;
    } else {
        opts.outcome_features = winstat::FeatureExpansion::linear;
    }
    opts.confidence = a.confidence;
    opts.log_scale_wr = a.log_wr_ci;
    opts.pairwise_for_unadj = a.unadj_variance == "pairwise";
    opts.propensity_covariates = a.prop_covariates;
    opts.outcome_covariates = a.outcome_covariates;

    const winstat::AnalysisResult res = winstat::run_analysis(ds, opts);
    write_or_print(a.format == "json" ? res.to_json() : res.to_text(), a.out);
    return 0;
}

int run_simulate(const SimulateArgs& s) {
    winstat::ExperimentConfig cfg = winstat::ExperimentConfig::from_json_file(s.config);
    if (s.reps >= 0) {
        if (s.reps < 1) throw winstat::data_error("--reps must be positive");
        cfg.replications = s.reps;
    }
    if (s.seed >= 0) cfg.seed = static_cast<std::uint64_t>(s.seed);
    if (s.threads >= 0) {
        if (s.threads < 1) throw winstat::data_error("--threads must be positive");
        cfg.threads = s.threads;
    }
    const winstat::SimulationReport rep = winstat::run_experiment(cfg);
    if (!s.out_prefix.empty()) {
        write_or_print(rep.to_csv(), s.out_prefix + ".csv");
        write_or_print(rep.to_json(), s.out_prefix + ".json");
    }
    std::cout << rep.to_text();
    return 0;
}

int run_truth(const TruthArgs& t) {
    if (t.draws < 100000) throw winstat::data_error("--draws must be at least 100000");
    if (!(t.pi > 0.0 && t.pi < 1.0)) {
        throw winstat::data_error("--pi must lie in (0,1)");
    }
    winstat::DgpSpec spec = winstat::dgp_model_from_name(t.model) ==
                                    winstat::DgpModel::quadratic
                                ? winstat::DgpSpec::quadratic_default()
                                : winstat::DgpSpec::interaction_default();
    spec.pi = t.pi;  // recorded for the report; the estimand does not use it
    const winstat::TruthValues tv = winstat::mc_truth(spec, t.draws, t.seed);
    nlohmann::ordered_json j;
    j["model"] = t.model;
    j["tau_win"] = tv.tau_win;
    j["tau_loss"] = tv.tau_loss;
    j["wr"] = tv.wr;
    j["wd"] = tv.wd;
    j["se_wr"] = tv.se_wr;
    j["se_wd"] = tv.se_wd;
    j["draws"] = tv.draws;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Win statistics (win probability, win ratio, win difference) for "
        "ordinal outcomes in two-arm randomized trials"};
    app.require_subcommand(1);

    AnalyzeArgs a;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Estimate win statistics from a trial dataset (CSV)");
    analyze->add_option("--data", a.data, "CSV file with a header row")->required();
    analyze->add_option("--outcome", a.outcome, "Outcome column name")->required();
    analyze->add_option("--treatment", a.treatment, "Treatment column name (0/1)")
        ->required();
    analyze->add_option("--covariates", a.covariates, "Covariate column names")
        ->delimiter(',');
    analyze
        ->add_option("--direction", a.direction,
                     "Whether larger outcome levels are better")
        ->check(CLI::IsMember(
            {"higher_better", "lower_better", "higher", "lower"}));
    analyze->add_option("--methods", a.methods, "Estimators to run")->delimiter(',');
    analyze
        ->add_option("--prop-covariates", a.prop_covariates,
                     "Covariates for the propensity model (default: all)")
        ->delimiter(',');
    analyze
        ->add_option("--outcome-covariates", a.outcome_covariates,
                     "Covariates for the outcome model (default: all)")
        ->delimiter(',');
    analyze
        ->add_option("--outcome-features", a.outcome_features,
                     "Feature expansion for the outcome model")
        ->check(CLI::IsMember({"linear", "quadratic", "interactions"}));
    analyze
        ->add_option("--levels", a.levels,
                     "Outcome labels ordered worst to best (string-coded outcomes)")
        ->delimiter(',');
    analyze->add_option("--n-levels", a.n_levels,
                        "Number of outcome levels (default: inferred)");
    analyze->add_option("--confidence", a.confidence, "Confidence level, in (0,1)");
    analyze->add_flag("--log-wr-ci", a.log_wr_ci,
                      "Compute the win ratio interval on the log scale");
    analyze
        ->add_option("--unadj-variance", a.unadj_variance,
                     "Variance route for the unadjusted estimator")
        ->check(CLI::IsMember({"influence", "pairwise"}));
    analyze->add_option("--format", a.format, "Output format")
        ->check(CLI::IsMember({"json", "table"}));
    analyze->add_option("--out", a.out, "Write the report here instead of stdout");

    SimulateArgs s;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Run a replication experiment from a JSON config");
    simulate->add_option("--config", s.config, "Experiment config file (JSON)")
        ->required();
    simulate->add_option("--reps", s.reps, "Override the replication count");
    simulate->add_option("--seed", s.seed, "Override the base seed");
    simulate->add_option("--threads", s.threads, "Override the worker thread count");
    simulate->add_option("--out-prefix", s.out_prefix,
                         "Write PREFIX.csv and PREFIX.json reports");

    TruthArgs t;
    CLI::App* truth = app.add_subcommand(
        "truth", "Compute true win statistics for a built-in data model");
    truth->add_option("--model", t.model, "Data model")
        ->required()
        ->check(CLI::IsMember({"quadratic", "interaction"}));
    truth->add_option("--pi", t.pi, "Randomization probability (reporting only)");
    truth->add_option("--draws", t.draws, "Covariate draws for the marginalization");
    truth->add_option("--seed", t.seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or help text
        return code == 0 ? 0 : 2;
    }

    try {
        if (*analyze) return run_analyze(a);
        if (*simulate) return run_simulate(s);
        if (*truth) return run_truth(t);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const winstat::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const winstat::simulation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const winstat::model_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
