#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "winstat/common.hpp"
#include "winstat/sim_engine.hpp"

using namespace winstat;

TEST_CASE("covariate generator reproduces the documented moments") {
    std::mt19937_64 rng(1);
    const int n = 400000;
    const Eigen::MatrixXd x = gen_covariates(n, rng);
    REQUIRE(x.cols() == 6);
    const double means[6] = {1.0, 0.9, 0.8, 0.75, 0.5, 0.25};
    const double sds[6] = {0.3, 0.4, 0.5, 0.4330127, 0.5, 0.4330127};
    for (int k = 0; k < 6; ++k) {
        const double m = x.col(k).mean();
        const double sd = std::sqrt((x.col(k).array() - m).square().sum() / (n - 1.0));
        CHECK(m == doctest::Approx(means[k]).epsilon(0.01));
        CHECK(sd == doctest::Approx(sds[k]).epsilon(0.02));
    }
    for (int k = 3; k < 6; ++k) {
        for (int i = 0; i < 100; ++i) {
            CHECK((x(i, k) == 0.0 || x(i, k) == 1.0));
        }
    }
}

TEST_CASE("category probabilities at zero covariates match the intercepts") {
    const DgpSpec spec = DgpSpec::quadratic_default();
    const Eigen::MatrixXd x0 = Eigen::MatrixXd::Zero(1, 6);
    const Eigen::MatrixXd p = dgp_category_probs(spec, x0, 0);
    // expit(1) and expit(0.05) drive the two cumulative splits.
    CHECK(p(0, 0) == doctest::Approx(1.0 - expit(1.0)).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(expit(1.0) - expit(0.05)).epsilon(1e-12));
    CHECK(p(0, 2) == doctest::Approx(expit(0.05)).epsilon(1e-12));
    CHECK(p.row(0).sum() == doctest::Approx(1.0).epsilon(1e-14));

    // Treatment shifts both splits by delta on the logit scale.
    const Eigen::MatrixXd p1 = dgp_category_probs(spec, x0, 1);
    CHECK(p1(0, 2) == doctest::Approx(expit(0.05 + spec.delta)).epsilon(1e-12));
}

TEST_CASE("potential outcome draws follow the model frequencies") {
    const DgpSpec spec = DgpSpec::quadratic_default();
    std::mt19937_64 rng(7);
    const int n = 200000;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 6);
    std::vector<int> y0, y1;
    gen_potential_outcomes(spec, x, rng, y0, y1);
    double f0[3] = {0, 0, 0}, f1[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
        f0[y0[static_cast<std::size_t>(i)] - 1] += 1.0 / n;
        f1[y1[static_cast<std::size_t>(i)] - 1] += 1.0 / n;
    }
    const Eigen::MatrixXd p0 = dgp_category_probs(spec, x.topRows(1), 0);
    const Eigen::MatrixXd p1 = dgp_category_probs(spec, x.topRows(1), 1);
    for (int l = 0; l < 3; ++l) {
        CHECK(f0[l] == doctest::Approx(p0(0, l)).epsilon(0.02));
        CHECK(f1[l] == doctest::Approx(p1(0, l)).epsilon(0.02));
    }
}

TEST_CASE("interaction model changes the linear predictor") {
    const DgpSpec q = DgpSpec::quadratic_default();
    const DgpSpec it = DgpSpec::interaction_default();
    CHECK(it.delta == 2.0);
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd x = gen_covariates(5, rng);
    const Eigen::MatrixXd pq = dgp_category_probs(q, x, 1);
    const Eigen::MatrixXd pi = dgp_category_probs(it, x, 1);
    CHECK((pq - pi).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("seed mixing separates replicate streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t cell = 0; cell < 4; ++cell) {
        for (std::uint64_t rep = 0; rep < 200; ++rep) {
            seen.insert(mix_seed(12345, cell, rep));
        }
    }
    CHECK(seen.size() == 800);
    CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
    CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
}

TEST_CASE("truth values do not depend on the randomization probability") {
    DgpSpec a = DgpSpec::quadratic_default();
    DgpSpec b = a;
    b.pi = 0.25;
    const TruthValues ta = mc_truth(a, 150000, 99);
    const TruthValues tb = mc_truth(b, 150000, 99);
    CHECK(ta.tau_win == tb.tau_win);
    CHECK(ta.tau_loss == tb.tau_loss);
    CHECK_THROWS_AS(mc_truth(a, 99, 1), data_error);
}

TEST_CASE("truth reproduces the exact marginal estimands") {
    const TruthValues q = mc_truth(DgpSpec::quadratic_default(), 2000000, 31);
    CHECK(q.wr == doctest::Approx(1.4418).epsilon(0.01));
    CHECK(q.wd == doctest::Approx(0.0905).epsilon(0.02));
    CHECK(q.tau_win + q.tau_loss < 1.0);
    CHECK(q.se_wr < 0.005);

    const TruthValues it = mc_truth(DgpSpec::interaction_default(), 2000000, 31);
    CHECK(it.wr == doctest::Approx(1.6518).epsilon(0.01));
    CHECK(it.wd == doctest::Approx(0.1253).epsilon(0.02));
}

TEST_CASE("no treatment effect and homogeneous slopes give a null truth") {
    DgpSpec spec = DgpSpec::quadratic_default();
    spec.delta = 0.0;
    spec.heterogeneous_slopes = false;
    const TruthValues tv = mc_truth(spec, 500000, 5);
    CHECK(tv.wr == doctest::Approx(1.0).epsilon(0.01));
    CHECK(tv.wd == doctest::Approx(0.0).epsilon(0.005).scale(1.0));
}

TEST_CASE("config parsing is strict and honors every documented key") {
    const std::string text = R"({
        // comments are allowed
        "model": "interaction",
        "pi": 0.4,
        "n": [100, 200],
        "replications": 7,
        "seed": 555,
        "methods": ["unadj", "aipw", "aipw"],
        "outcome_model": "both",
        "confidence": 0.9,
        "threads": 2,
        "truth": {"draws": 150000}
    })";
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
    CHECK(cfg.dgp.model == DgpModel::interaction);
    CHECK(cfg.dgp.pi == doctest::Approx(0.4));
    CHECK(cfg.dgp.delta == 2.0);  // interaction default
    CHECK(cfg.sample_sizes == std::vector<int>{100, 200});
    CHECK(cfg.replications == 7);
    CHECK(cfg.seed == 555);
    CHECK(cfg.methods == std::vector<std::string>{"unadj", "aipw"});  // deduped
    CHECK(cfg.outcome_model == "both");
    CHECK(cfg.confidence == doctest::Approx(0.9));
    CHECK(cfg.threads == 2);
    CHECK(cfg.truth_draws == 150000);

    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"bogus\": 1}"), data_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"model\": \"cubic\"}"),
                    data_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), data_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"pi\": 1.5}"), data_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"n\": 2}"), data_error);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text("{\"methods\": [\"anova\"]}"), data_error);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text("{\"outcome_model\": \"wrong\"}"),
        data_error);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text("{\"truth\": {\"draws\": 10}}"), data_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_file("/tmp/no_such_config.json"),
                    data_error);

    // Fixed truth values skip the Monte Carlo integration entirely.
    const ExperimentConfig fixed = ExperimentConfig::from_json_text(
        "{\"n\": [50], \"truth\": {\"tau_win\": 0.3, \"tau_loss\": 0.2}}");
    REQUIRE(fixed.truth_taus.has_value());
    CHECK(fixed.truth_taus->first == doctest::Approx(0.3));
}

TEST_CASE("experiment reports are deterministic across thread counts") {
    ExperimentConfig cfg = ExperimentConfig::from_json_text(
        R"({"model": "quadratic", "n": 150, "replications": 12, "seed": 4242,
            "outcome_model": "both", "truth": {"tau_win": 0.2955, "tau_loss": 0.2049}})");
    cfg.threads = 1;
    const SimulationReport one = run_experiment(cfg);
    cfg.threads = 4;
    const SimulationReport four = run_experiment(cfg);
    CHECK(one.to_csv() == four.to_csv());
    CHECK(one.to_json() == four.to_json());
    CHECK(one.to_csv() != "");

    // Different seeds change the results.
    cfg.seed = 4243;
    const SimulationReport other = run_experiment(cfg);
    CHECK(one.to_csv() != other.to_csv());
}

TEST_CASE("report rows cover every requested method variant") {
    ExperimentConfig cfg = ExperimentConfig::from_json_text(
        R"({"model": "quadratic", "n": 120, "replications": 6, "seed": 11,
            "methods": ["unadj", "ipw", "aipw"], "outcome_model": "both",
            "truth": {"tau_win": 0.2955, "tau_loss": 0.2049}})");
    const SimulationReport rep = run_experiment(cfg);
    REQUIRE(rep.cells.size() == 1);
    std::vector<std::string> labels;
    for (const MethodSummary& ms : rep.cells[0].methods) labels.push_back(ms.method);
    CHECK(labels == std::vector<std::string>{"unadj", "unadj_pm", "ipw", "aipw",
                                             "aipw_mis"});
    // The unadjusted row is its own efficiency baseline.
    CHECK(rep.cells[0].methods[0].wd.relative_efficiency == doctest::Approx(1.0));
    CHECK(rep.cells[0].methods[0].wd.pvr_pct == doctest::Approx(0.0));
    CHECK(rep.cells[0].failures == 0);
    CHECK(rep.truth.wr == doctest::Approx(0.2955 / 0.2049));

    // outcome_model=correct drops the _mis variants, mis drops the plain ones.
    cfg.outcome_model = "correct";
    const SimulationReport cor = run_experiment(cfg);
    labels.clear();
    for (const MethodSummary& ms : cor.cells[0].methods) labels.push_back(ms.method);
    CHECK(labels == std::vector<std::string>{"unadj", "unadj_pm", "ipw", "aipw"});
    cfg.outcome_model = "mis";
    const SimulationReport mis = run_experiment(cfg);
    labels.clear();
    for (const MethodSummary& ms : mis.cells[0].methods) labels.push_back(ms.method);
    CHECK(labels == std::vector<std::string>{"unadj", "unadj_pm", "ipw", "aipw_mis"});
}

TEST_CASE("hopeless cells abort with a simulation error") {
    // Thirteen outcome-model parameters cannot fit six subjects.
    ExperimentConfig cfg = ExperimentConfig::from_json_text(
        R"({"model": "quadratic", "n": 6, "replications": 4, "seed": 1,
            "methods": ["aipw"], "truth": {"tau_win": 0.3, "tau_loss": 0.2}})");
    CHECK_THROWS_AS(run_experiment(cfg), simulation_error);
}

TEST_CASE("single-replication smoke run is fast and complete") {
    ExperimentConfig cfg = ExperimentConfig::from_json_text(
        R"({"model": "interaction", "n": 300, "replications": 1, "seed": 2,
            "outcome_model": "both", "truth": {"draws": 150000}})");
    const SimulationReport rep = run_experiment(cfg);
    CHECK(rep.cells[0].methods.size() == 8);
    const std::string csv = rep.to_csv();
    CHECK(csv.find("aow_mis") != std::string::npos);
    const std::string text = rep.to_text();
    CHECK(text.find("n=300") != std::string::npos);
    const std::string json = rep.to_json();
    CHECK(json.find("\"schema_version\": 1") != std::string::npos);
}
