#include "winstat/logit_fit.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace winstat {

namespace {

double log1pexp(double t) {
    if (t > 35.0) return t;
    if (t < -35.0) return std::exp(t);
    return std::log1p(std::exp(t));
}

// Bernoulli log-likelihood at linear predictor eta.
double loglik(const Eigen::VectorXd& eta, const std::vector<int>& z) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += z[static_cast<std::size_t>(i)] * eta[i] - log1pexp(eta[i]);
    }
    return ll;
}

}  // namespace

Eigen::VectorXd PropensityModel::fitted_at(const Eigen::VectorXd& beta_alt) const {
    Eigen::VectorXd eta = design * beta_alt;
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = expit(eta[i]);
    return eta;
}

PropensityModel fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& z,
                             const LogitOptions& opts) {
    const Eigen::Index n = static_cast<Eigen::Index>(z.size());
    if (x.rows() != 0 && x.rows() != n) {
        throw std::invalid_argument("fit_logistic: covariate rows do not match z");
    }
    const Eigen::Index p = x.rows() == 0 ? 0 : x.cols();

    PropensityModel pm;
    pm.design.resize(n, p + 1);
    pm.design.col(0).setOnes();
    if (p > 0) pm.design.rightCols(p) = x;

    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pm.design);
        qr.setThreshold(1e-10);
        if (qr.rank() < p + 1) {
            throw model_error("fit_logistic: design matrix is rank deficient");
        }
    }

    double zbar = 0.0;
    for (int zi : z) zbar += zi;
    zbar /= static_cast<double>(n);
    if (zbar <= 0.0 || zbar >= 1.0) {
        throw model_error("fit_logistic: all subjects are in one arm");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    beta[0] = logit(zbar);
    Eigen::VectorXd eta = pm.design * beta;
    double ll = loglik(eta, z);

    Eigen::VectorXd e(n), resid(n);
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) e[i] = expit(eta[i]);
        for (Eigen::Index i = 0; i < n; ++i) {
            resid[i] = z[static_cast<std::size_t>(i)] - e[i];
        }
        const Eigen::VectorXd score = pm.design.transpose() * resid;
        pm.max_score = score.lpNorm<Eigen::Infinity>();
        if (pm.max_score < opts.score_tol) {
            converged = true;
            break;
        }
        const Eigen::VectorXd w = e.array() * (1.0 - e.array());
        const Eigen::MatrixXd info =
            pm.design.transpose() * w.asDiagonal() * pm.design;
        Eigen::VectorXd step = info.ldlt().solve(score);
        if (!step.allFinite()) {
            throw model_error("fit_logistic: singular working information matrix");
        }
        double t = 1.0;
        Eigen::VectorXd cand;
        double ll_new = ll;
        for (int h = 0; h < 40; ++h) {
            cand = beta + t * step;
            ll_new = loglik(pm.design * cand, z);
            if (std::isfinite(ll_new) && ll_new >= ll) break;
            t *= 0.5;
        }
        const double rel_change =
            (t * step).cwiseAbs().maxCoeff() / (1.0 + beta.cwiseAbs().maxCoeff());
        beta = cand;
        eta = pm.design * beta;
        ll = ll_new;
        if (rel_change < opts.coef_tol) {
            for (Eigen::Index i = 0; i < n; ++i) e[i] = expit(eta[i]);
            for (Eigen::Index i = 0; i < n; ++i) {
                resid[i] = z[static_cast<std::size_t>(i)] - e[i];
            }
            pm.max_score = (pm.design.transpose() * resid).lpNorm<Eigen::Infinity>();
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw model_error("fit_logistic: no convergence in " +
                          std::to_string(opts.max_iter) + " iterations");
    }

    for (Eigen::Index i = 0; i < n; ++i) e[i] = expit(eta[i]);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (e[i] < opts.boundary_tol || e[i] > 1.0 - opts.boundary_tol) {
            throw model_error(
                "fit_logistic: separation detected, a fitted propensity is at the "
                "boundary");
        }
    }

    pm.beta = beta;
    pm.fitted = e;
    for (Eigen::Index i = 0; i < n; ++i) {
        resid[i] = z[static_cast<std::size_t>(i)] - e[i];
    }
    pm.residual = resid;
    pm.iterations = it;
    const Eigen::VectorXd w = e.array() * (1.0 - e.array());
    pm.fisher = pm.design.transpose() * w.asDiagonal() * pm.design /
                static_cast<double>(n);
    return pm;
}

Eigen::MatrixXd influence_beta(const PropensityModel& pm) {
    const Eigen::MatrixXd score_rows =
        pm.design.array().colwise() * pm.residual.array();
    return pm.fisher.ldlt().solve(score_rows.transpose()).transpose();
}

}  // namespace winstat
