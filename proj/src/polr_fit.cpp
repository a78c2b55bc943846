#include "winstat/polr_fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

namespace winstat {

namespace {

bool is_binary_column(const Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i) {
        if (v(i) != 0.0 && v(i) != 1.0) return false;
    }
    return true;
}

// Slope design: expanded covariates, then the treatment column when present.
Eigen::MatrixXd slope_design(const Eigen::MatrixXd& feats, const std::vector<int>& z,
                             bool include_treatment) {
    const int n = static_cast<int>(feats.rows());
    Eigen::MatrixXd w(n, feats.cols() + (include_treatment ? 1 : 0));
    w.leftCols(feats.cols()) = feats;
    if (include_treatment) {
        for (int i = 0; i < n; ++i) w(i, feats.cols()) = static_cast<double>(z[i]);
    }
    return w;
}

struct PackResult {
    double loglik;
    Eigen::VectorXd grad;     // natural scale
    Eigen::MatrixXd hess;     // natural scale
    bool valid;
};

// Log-likelihood, gradient and Hessian in the natural parameters
// (a_1..a_{L-1}, xi).  Each subject touches at most two cutpoints, so the
// Hessian is assembled from sparse intercept terms plus two weighted Gram
// matrices over the slope design.
PackResult pack_natural(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& w,
                        const std::vector<int>& y, int n_levels, bool want_derivs,
                        Eigen::MatrixXd* scores_out = nullptr) {
    const int n = static_cast<int>(w.rows());
    const int d = static_cast<int>(w.cols());
    const int nc = n_levels - 1;
    const int dim = nc + d;

    PackResult r;
    r.loglik = 0.0;
    r.valid = true;
    if (want_derivs) {
        r.grad = Eigen::VectorXd::Zero(dim);
        r.hess = Eigen::MatrixXd::Zero(dim, dim);
    }
    if (scores_out) scores_out->setZero(n, dim);

    const Eigen::VectorXd s = d > 0 ? Eigen::VectorXd(w * alpha.tail(d))
                                    : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd gram_w = Eigen::VectorXd::Zero(n);   // slope-slope weights

    for (int i = 0; i < n; ++i) {
        const int l = y[i];
        double c_hi = 1.0, dc_hi = 0.0, d2c_hi = 0.0;
        if (l <= nc) {
            c_hi = expit(alpha(l - 1) - s(i));
            dc_hi = c_hi * (1.0 - c_hi);
            d2c_hi = dc_hi * (1.0 - 2.0 * c_hi);
        }
        double c_lo = 0.0, dc_lo = 0.0, d2c_lo = 0.0;
        if (l >= 2) {
            c_lo = expit(alpha(l - 2) - s(i));
            dc_lo = c_lo * (1.0 - c_lo);
            d2c_lo = dc_lo * (1.0 - 2.0 * c_lo);
        }
        const double p = c_hi - c_lo;
        if (!(p > 0.0) || !std::isfinite(p)) {
            r.valid = false;
            r.loglik = -std::numeric_limits<double>::infinity();
            return r;
        }
        r.loglik += std::log(p);
        if (!want_derivs && !scores_out) continue;

        const double s_hi = dc_hi / p;        // score entry at a_l
        const double s_lo = -dc_lo / p;       // score entry at a_{l-1}
        const double t = -(dc_hi - dc_lo) / p;  // slope score factor on w_i

        if (scores_out) {
            if (l <= nc) (*scores_out)(i, l - 1) = s_hi;
            if (l >= 2) (*scores_out)(i, l - 2) = s_lo;
            if (d > 0) scores_out->row(i).tail(d) = t * w.row(i);
        }
        if (!want_derivs) continue;

        if (l <= nc) r.grad(l - 1) += s_hi;
        if (l >= 2) r.grad(l - 2) += s_lo;
        if (d > 0) r.grad.tail(d) += t * w.row(i).transpose();

        const double cA = d2c_hi / p;   // curvature coefficient, upper cut
        const double cB = d2c_lo / p;   // curvature coefficient, lower cut
        if (l <= nc) {
            r.hess(l - 1, l - 1) += cA - s_hi * s_hi;
            if (d > 0) {
                r.hess.row(l - 1).tail(d) -= (cA + s_hi * t) * w.row(i);
            }
        }
        if (l >= 2) {
            r.hess(l - 2, l - 2) += -cB - s_lo * s_lo;
            if (d > 0) {
                r.hess.row(l - 2).tail(d) += (cB - s_lo * t) * w.row(i);
            }
        }
        if (l <= nc && l >= 2) {
            r.hess(l - 1, l - 2) -= s_hi * s_lo;
            r.hess(l - 2, l - 1) -= s_hi * s_lo;
        }
        gram_w(i) = cA - cB - t * t;
    }

    if (want_derivs && d > 0) {
        r.hess.bottomRightCorner(d, d).noalias() +=
            w.transpose() * gram_w.asDiagonal() * w;
        // Hessian is symmetric; the intercept-slope rows above filled only
        // the upper blocks.
        r.hess.bottomLeftCorner(d, nc) = r.hess.topRightCorner(nc, d).transpose();
    }
    return r;
}

// Map the unconstrained vector u = (a_1, phi_1..phi_{L-2}, xi) to natural
// parameters with a_l = a_1 + sum_{k<l} exp(phi_k).
Eigen::VectorXd natural_from_u(const Eigen::VectorXd& u, int n_levels) {
    const int nc = n_levels - 1;
    Eigen::VectorXd alpha(u.size());
    alpha(0) = u(0);
    for (int k = 1; k < nc; ++k) alpha(k) = alpha(k - 1) + std::exp(u(k));
    alpha.tail(u.size() - nc) = u.tail(u.size() - nc);
    return alpha;
}

}  // namespace

Eigen::MatrixXd FeatureMap::apply(const Eigen::MatrixXd& x) const {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (expansion == FeatureExpansion::linear) return x;
    if (expansion == FeatureExpansion::quadratic) {
        std::vector<int> sq;
        for (int j = 0; j < p; ++j) {
            if (!is_binary_column(x.col(j))) sq.push_back(j);
        }
        Eigen::MatrixXd out(n, p + static_cast<int>(sq.size()));
        out.leftCols(p) = x;
        for (std::size_t k = 0; k < sq.size(); ++k) {
            out.col(p + static_cast<int>(k)) = x.col(sq[k]).array().square();
        }
        return out;
    }
    const int n_pairs = p * (p - 1) / 2;
    Eigen::MatrixXd out(n, p + n_pairs);
    out.leftCols(p) = x;
    int c = p;
    for (int j = 0; j < p; ++j) {
        for (int k = j + 1; k < p; ++k) {
            out.col(c++) = x.col(j).array() * x.col(k).array();
        }
    }
    return out;
}

OrdinalModel fit_proportional_odds(const Eigen::MatrixXd& x, const std::vector<int>& z,
                                   const std::vector<int>& y, int n_levels,
                                   const FeatureMap& fm, const PolrOptions& opts) {
    const int n = static_cast<int>(y.size());
    if (n_levels < 2) throw model_error("ordinal fit needs at least two outcome levels");
    std::vector<int> counts(n_levels, 0);
    for (int i = 0; i < n; ++i) {
        if (y[i] < 1 || y[i] > n_levels) {
            throw data_error("outcome value out of range at row " + std::to_string(i + 1));
        }
        ++counts[y[i] - 1];
    }
    for (int l = 0; l < n_levels; ++l) {
        if (counts[l] == 0) {
            throw model_error("outcome level " + std::to_string(l + 1) +
                              " has no observations; cannot fit ordinal model");
        }
    }

    const Eigen::MatrixXd feats = fm.apply(x);
    const Eigen::MatrixXd w = slope_design(feats, z, fm.include_treatment);
    const int d = static_cast<int>(w.cols());
    const int nc = n_levels - 1;
    const int dim = nc + d;

    {
        Eigen::MatrixXd design(n, d + 1);
        design.col(0).setOnes();
        design.rightCols(d) = w;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < d + 1) {
            throw model_error("outcome design matrix is rank deficient");
        }
    }

    // Start at the marginal cumulative logits with zero slopes.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(dim);
    {
        double cum = 0.0;
        Eigen::VectorXd a0(nc);
        for (int l = 0; l < nc; ++l) {
            cum += counts[l];
            a0(l) = logit(cum / static_cast<double>(n));
        }
        u(0) = a0(0);
        for (int k = 1; k < nc; ++k) u(k) = std::log(a0(k) - a0(k - 1));
    }

    Eigen::VectorXd alpha = natural_from_u(u, n_levels);
    PackResult cur = pack_natural(alpha, w, y, n_levels, true);
    if (!cur.valid) throw model_error("ordinal fit failed at starting values");

    OrdinalModel om;
    om.n_levels = n_levels;
    om.n_features = static_cast<int>(feats.cols());
    om.has_treatment = fm.include_treatment;
    om.iterations = 0;

    bool converged = cur.grad.lpNorm<Eigen::Infinity>() < opts.score_tol;
    while (!converged && om.iterations < opts.max_iter) {
        ++om.iterations;
        // Chain rule to the unconstrained scale.
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
        for (int l = 0; l < nc; ++l) {
            jac(l, 0) = 1.0;
            for (int k = 1; k <= l; ++k) jac(l, k) = std::exp(u(k));
        }
        jac.bottomRightCorner(d, d).setIdentity();
        Eigen::VectorXd g_u = jac.transpose() * cur.grad;
        Eigen::MatrixXd h_u = jac.transpose() * cur.hess * jac;
        for (int k = 1; k < nc; ++k) {
            double gsum = 0.0;
            for (int l = k; l < nc; ++l) gsum += cur.grad(l);
            h_u(k, k) += gsum * std::exp(u(k));
        }

        Eigen::VectorXd step = (-h_u).ldlt().solve(g_u);
        if (!step.allFinite() || step.dot(g_u) <= 0.0) step = g_u;

        double scale = 1.0;
        bool improved = false;
        for (int half = 0; half < 40; ++half) {
            Eigen::VectorXd u_try = u + scale * step;
            Eigen::VectorXd a_try = natural_from_u(u_try, n_levels);
            PackResult res = pack_natural(a_try, w, y, n_levels, true);
            if (res.valid && res.loglik > cur.loglik - 1e-12 * std::abs(cur.loglik)) {
                u = u_try;
                alpha = a_try;
                cur = std::move(res);
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            throw model_error("ordinal model failed to converge: no ascent step found");
        }
        converged = cur.grad.lpNorm<Eigen::Infinity>() < opts.score_tol;
    }
    if (!converged) {
        throw model_error("ordinal model failed to converge after " +
                          std::to_string(opts.max_iter) + " iterations");
    }

    Eigen::MatrixXd scores;
    PackResult fin = pack_natural(alpha, w, y, n_levels, true, &scores);
    om.alpha = alpha;
    om.fisher = -fin.hess / static_cast<double>(n);
    om.scores = std::move(scores);
    om.loglik = fin.loglik;
    om.max_score = fin.grad.lpNorm<Eigen::Infinity>();
    return om;
}

namespace {

Eigen::MatrixXd arm_probs(const Eigen::VectorXd& alpha, int n_levels,
                          const Eigen::MatrixXd& feats, bool has_treatment, int arm) {
    const int n = static_cast<int>(feats.rows());
    const int nc = n_levels - 1;
    const int d_f = static_cast<int>(feats.cols());
    Eigen::VectorXd s = d_f > 0 ? Eigen::VectorXd(feats * alpha.segment(nc, d_f))
                                : Eigen::VectorXd::Zero(n);
    if (has_treatment && arm == 1) s.array() += alpha(nc + d_f);
    Eigen::MatrixXd probs(n, n_levels);
    for (int i = 0; i < n; ++i) {
        double prev = 0.0;
        for (int l = 0; l < nc; ++l) {
            const double c = expit(alpha(l) - s(i));
            probs(i, l) = c - prev;
            prev = c;
        }
        probs(i, nc) = 1.0 - prev;
    }
    return probs;
}

}  // namespace

CategoryProbs category_probs(const OrdinalModel& om, const Eigen::MatrixXd& x,
                             const FeatureMap& fm) {
    return category_probs_at(om, x, fm, om.alpha);
}

CategoryProbs category_probs_at(const OrdinalModel& om, const Eigen::MatrixXd& x,
                                const FeatureMap& fm, const Eigen::VectorXd& alpha_alt) {
    const Eigen::MatrixXd feats = fm.apply(x);
    if (static_cast<int>(feats.cols()) != om.n_features) {
        throw model_error("feature map does not match the fitted ordinal model");
    }
    CategoryProbs cp;
    cp.p1 = arm_probs(alpha_alt, om.n_levels, feats, om.has_treatment, 1);
    cp.p0 = om.has_treatment ? arm_probs(alpha_alt, om.n_levels, feats, om.has_treatment, 0)
                             : cp.p1;
    return cp;
}

Eigen::MatrixXd influence_alpha(const OrdinalModel& om) {
    return om.fisher.ldlt().solve(om.scores.transpose()).transpose();
}

MuTables mu_pair_tables(const CategoryProbs& cp, const Eigen::VectorXd& w_row,
                        const Eigen::VectorXd& w_col) {
    const int n = static_cast<int>(cp.p1.rows());
    const int L = static_cast<int>(cp.p1.cols());
    MuTables mt;
    mt.col1 = cp.p1.transpose() * w_row;
    mt.col0 = cp.p0.transpose() * w_col;
    mt.diag_win.resize(n);
    mt.diag_loss.resize(n);
    for (int i = 0; i < n; ++i) {
        double below = 0.0;  // P0 mass strictly below the current level
        double win = 0.0, loss = 0.0;
        for (int l = 0; l < L; ++l) {
            win += cp.p1(i, l) * below;
            below += cp.p0(i, l);
            loss += cp.p1(i, l) * (1.0 - below);
        }
        mt.diag_win(i) = win;
        mt.diag_loss(i) = loss;
    }
    return mt;
}

}  // namespace winstat
