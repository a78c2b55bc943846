#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "winstat/common.hpp"
#include "winstat/logit_fit.hpp"

using namespace winstat;

namespace {

// Independent log-likelihood used to validate the fit as an optimum.
double loglik(const Eigen::MatrixXd& design, const std::vector<int>& z,
              const Eigen::VectorXd& beta) {
    double ll = 0.0;
    for (int i = 0; i < design.rows(); ++i) {
        const double eta = design.row(i).dot(beta);
        const double e = expit(eta);
        ll += z[static_cast<std::size_t>(i)] == 1 ? std::log(e) : std::log(1.0 - e);
    }
    return ll;
}

struct Sample {
    Eigen::MatrixXd x;
    std::vector<int> z;
};

Sample draw_sample(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Sample s;
    s.x.resize(n, 2);
    s.z.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        s.x(i, 0) = nd(rng);
        s.x(i, 1) = u(rng) < 0.4 ? 1.0 : 0.0;
        const double e = expit(0.3 + 0.8 * s.x(i, 0) - 0.5 * s.x(i, 1));
        s.z[static_cast<std::size_t>(i)] = u(rng) < e ? 1 : 0;
    }
    return s;
}

}  // namespace

TEST_CASE("intercept-only fit yields the treated fraction") {
    Eigen::MatrixXd x(10, 0);
    const std::vector<int> z = {1, 0, 1, 1, 0, 1, 0, 0, 1, 1};
    const PropensityModel pm = fit_logistic(x, z);
    CHECK(pm.beta.size() == 1);
    CHECK(pm.beta(0) == doctest::Approx(logit(0.6)).epsilon(1e-9));
    for (int i = 0; i < 10; ++i) CHECK(pm.fitted(i) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("the fit is the likelihood maximum") {
    std::mt19937_64 rng(12);
    const Sample s = draw_sample(400, rng);
    const PropensityModel pm = fit_logistic(s.x, s.z);

    // Score equations: design' (z - e) = 0.
    Eigen::VectorXd score = Eigen::VectorXd::Zero(pm.beta.size());
    for (int i = 0; i < 400; ++i) {
        score += pm.design.row(i).transpose() * pm.residual(i);
    }
    CHECK(score.cwiseAbs().maxCoeff() < 1e-6);

    // Any perturbation lowers the independently computed log-likelihood.
    const double ll_hat = loglik(pm.design, s.z, pm.beta);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd dir(pm.beta.size());
        for (int k = 0; k < dir.size(); ++k) dir(k) = nd(rng);
        dir.normalize();
        CHECK(loglik(pm.design, s.z, pm.beta + 0.05 * dir) < ll_hat);
    }
}

TEST_CASE("fitted_at reproduces the training propensities at the MLE") {
    std::mt19937_64 rng(77);
    const Sample s = draw_sample(150, rng);
    const PropensityModel pm = fit_logistic(s.x, s.z);
    CHECK((pm.fitted_at(pm.beta) - pm.fitted).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd shifted = pm.beta;
    shifted(0) += 1.0;
    CHECK((pm.fitted_at(shifted) - pm.fitted).cwiseAbs().maxCoeff() > 0.01);
}

TEST_CASE("degenerate designs are rejected") {
    std::mt19937_64 rng(5);
    Sample s = draw_sample(60, rng);

    Eigen::MatrixXd dup(60, 2);
    dup.col(0) = s.x.col(0);
    dup.col(1) = s.x.col(0);  // collinear
    CHECK_THROWS_AS(fit_logistic(dup, s.z), model_error);

    std::vector<int> allone(60, 1);
    CHECK_THROWS_AS(fit_logistic(s.x, allone), model_error);

    // Perfect separation on the first covariate.
    std::vector<int> sep(60);
    for (int i = 0; i < 60; ++i) sep[static_cast<std::size_t>(i)] = s.x(i, 0) > 0.0;
    CHECK_THROWS_AS(fit_logistic(s.x, sep), model_error);
}

TEST_CASE("influence rows are centered and match the information inverse") {
    std::mt19937_64 rng(31);
    const Sample s = draw_sample(300, rng);
    const PropensityModel pm = fit_logistic(s.x, s.z);
    const Eigen::MatrixXd infl = influence_beta(pm);
    CHECK(infl.rows() == 300);
    CHECK(infl.colwise().mean().cwiseAbs().maxCoeff() < 1e-8);

    // Fisher-consistency of the rows: the averaged information times l_i
    // recovers subject i's score term.
    for (int i : {0, 57, 123, 299}) {
        const Eigen::VectorXd back = pm.fisher * infl.row(i).transpose();
        const Eigen::VectorXd direct = pm.design.row(i).transpose() * pm.residual(i);
        CHECK((back - direct).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("sandwich variance tracks the Monte Carlo variance of the MLE") {
    std::mt19937_64 rng(2026);
    const int reps = 1500, n = 500;
    Eigen::MatrixXd betas(reps, 3);
    Eigen::MatrixXd est_var(reps, 3);
    for (int r = 0; r < reps; ++r) {
        const Sample s = draw_sample(n, rng);
        const PropensityModel pm = fit_logistic(s.x, s.z);
        const Eigen::MatrixXd infl = influence_beta(pm);
        betas.row(r) = pm.beta.transpose();
        for (int k = 0; k < 3; ++k) {
            est_var(r, k) = infl.col(k).squaredNorm() / (double(n) * double(n));
        }
    }
    for (int k = 0; k < 3; ++k) {
        const double mean = betas.col(k).mean();
        const double mc_var =
            (betas.col(k).array() - mean).square().sum() / (reps - 1.0);
        const double ratio = est_var.col(k).mean() / mc_var;
        CHECK(ratio > 0.85);
        CHECK(ratio < 1.15);
    }
}
