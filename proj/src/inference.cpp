#include "winstat/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "winstat/common.hpp"

namespace winstat {

VarianceComponents variance_if(Method m, const std::vector<int>& z,
                               const std::vector<int>& y, int n_levels,
                               const ModelContext& ctx) {
    const int n = static_cast<int>(z.size());
    const bool prop = uses_propensity(m);
    const bool aug = is_augmented(m);
    if (prop && ctx.propensity == nullptr) {
        throw model_error(method_name(m) + " variance requires a fitted propensity model");
    }
    if (aug && (ctx.outcome == nullptr || ctx.outcome_x == nullptr)) {
        throw model_error(method_name(m) + " variance requires a fitted outcome model");
    }

    const Eigen::VectorXd e_hat = prop ? ctx.propensity->fitted : Eigen::VectorXd();
    CategoryProbs cp;
    if (aug) cp = category_probs(*ctx.outcome, *ctx.outcome_x, ctx.feature_map);

    const WinEstimate est = estimate(m, z, y, n_levels, e_hat, aug ? &cp : nullptr);
    const SchemeWeights sw = scheme_weights(m, e_hat, n);
    const Projections pr =
        aug ? projections_qhat(z, y, n_levels, sw.w1, sw.w0, sw.a, sw.b, cp)
            : projections_qhat(z, y, n_levels, sw.w1, sw.w0);

    Eigen::VectorXd phi_win = 2.0 * (pr.q_win.array() - est.tau_win);
    Eigen::VectorXd phi_loss = 2.0 * (pr.q_loss.array() - est.tau_loss);

    if (prop) {
        // Sensitivity of the whole estimator to the propensity coefficients:
        // weights (and the augmented pair weights) are rebuilt at each
        // perturbed beta while the outcome model stays fixed.
        const PropensityModel& pm = *ctx.propensity;
        auto functional = [&](const Eigen::VectorXd& beta) {
            const Eigen::VectorXd e_alt = pm.fitted_at(beta);
            const WinEstimate w = estimate(m, z, y, n_levels, e_alt, aug ? &cp : nullptr);
            return Eigen::Vector2d(w.tau_win, w.tau_loss);
        };
        const Eigen::MatrixXd grad = derivative_aggregate(functional, pm.beta);
        const Eigen::MatrixXd lb = influence_beta(pm);
        phi_win += lb * grad.row(0).transpose();
        phi_loss += lb * grad.row(1).transpose();
    }
    if (aug) {
        // Sensitivity to the outcome-model parameters: category probabilities
        // are rebuilt at each perturbed alpha while weights stay fixed.
        const OrdinalModel& om = *ctx.outcome;
        auto functional = [&](const Eigen::VectorXd& alpha) {
            const CategoryProbs cp_alt =
                category_probs_at(om, *ctx.outcome_x, ctx.feature_map, alpha);
            const WinEstimate w = estimate(m, z, y, n_levels, e_hat, &cp_alt);
            return Eigen::Vector2d(w.tau_win, w.tau_loss);
        };
        const Eigen::MatrixXd grad = derivative_aggregate(functional, om.alpha);
        const Eigen::MatrixXd la = influence_alpha(om);
        phi_win += la * grad.row(0).transpose();
        phi_loss += la * grad.row(1).transpose();
    }

    if (!phi_win.allFinite() || !phi_loss.allFinite()) {
        throw model_error("non-finite influence contributions for " + method_name(m));
    }
    VarianceComponents vc;
    vc.method = m;
    vc.route = VarianceRoute::influence_function;
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    vc.var_win = phi_win.squaredNorm() / n2;
    vc.var_loss = phi_loss.squaredNorm() / n2;
    vc.cov = phi_win.dot(phi_loss) / n2;
    vc.phi_win = std::move(phi_win);
    vc.phi_loss = std::move(phi_loss);
    return vc;
}

VarianceComponents variance_pairwise(const std::vector<int>& z, const std::vector<int>& y,
                                 int n_levels) {
    const int n = static_cast<int>(z.size());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const ArmWeightTables tb = arm_weight_tables(z, y, n_levels, ones, ones);
    const double n1 = tb.t_total, n0 = tb.c_total;
    if (n1 < 2.0 || n0 < 2.0) {
        throw data_error("pairwise-moment variance needs at least two subjects per arm");
    }
    const double denom = n1 * n0;
    double win = 0.0, loss = 0.0;
    for (int l = 1; l <= n_levels; ++l) {
        win += tb.t(l - 1) * tb.c_below(l);
        loss += tb.t(l - 1) * tb.c_above(l);
    }
    const double tau_win = win / denom, tau_loss = loss / denom;

    // Concordance-count moments: for treated i, c/g count controls strictly
    // below/above; for controls, d/f count treated strictly above/below.
    double cc = 0.0, gg = 0.0, cg = 0.0;  // sum c(c-1), g(g-1), c*g over treated
    double dd = 0.0, ff = 0.0, df = 0.0;  // mirrored sums over controls
    for (int i = 0; i < n; ++i) {
        const int l = y[static_cast<std::size_t>(i)];
        if (z[static_cast<std::size_t>(i)] == 1) {
            const double c = tb.c_below(l), g = tb.c_above(l);
            cc += c * (c - 1.0);
            gg += g * (g - 1.0);
            cg += c * g;
        } else {
            const double d = tb.t_above(l), f = tb.t_below(l);
            dd += d * (d - 1.0);
            ff += f * (f - 1.0);
            df += d * f;
        }
    }
    const double pairs_t = denom * (n0 - 1.0);  // treated shared, two controls
    const double pairs_c = denom * (n1 - 1.0);  // control shared, two treated

    const double xi10_win = std::max(0.0, cc / pairs_t - tau_win * tau_win);
    const double xi01_win = std::max(0.0, dd / pairs_c - tau_win * tau_win);
    const double xi10_loss = std::max(0.0, gg / pairs_t - tau_loss * tau_loss);
    const double xi01_loss = std::max(0.0, ff / pairs_c - tau_loss * tau_loss);
    const double xi10_cross = cg / pairs_t - tau_win * tau_loss;
    const double xi01_cross = df / pairs_c - tau_win * tau_loss;

    VarianceComponents vc;
    vc.method = Method::unadj;
    vc.route = VarianceRoute::pairwise_moments;
    vc.var_win = xi10_win / n1 + xi01_win / n0;
    vc.var_loss = xi10_loss / n1 + xi01_loss / n0;
    vc.cov = xi10_cross / n1 + xi01_cross / n0;
    return vc;
}

WinEstimate delta_wr_wd(const VarianceComponents& vc, WinEstimate est,
                        double conf_level, bool log_scale_wr) {
    if (!(conf_level > 0.0 && conf_level < 1.0)) {
        throw data_error("confidence level must be in (0,1)");
    }
    est.var_win = vc.var_win;
    est.var_loss = vc.var_loss;
    est.cov = vc.cov;
    est.conf_level = conf_level;
    const double zq = normal_quantile(1.0 - (1.0 - conf_level) / 2.0);

    double var_wd = vc.var_win + vc.var_loss - 2.0 * vc.cov;
    if (var_wd < 0.0) {
        if (var_wd < -1e-12) {
            throw model_error("negative delta-method win difference variance");
        }
        var_wd = 0.0;
    }
    est.var_wd = var_wd;
    const double se_wd = std::sqrt(var_wd);
    est.wd_lower = est.wd - zq * se_wd;
    est.wd_upper = est.wd + zq * se_wd;

    if (est.wr_defined) {
        // Expanded form of wr^2 (v_w/tau_w^2 - 2 cov/(tau_w tau_l) + v_l/tau_l^2);
        // stays finite when tau_win is exactly zero.
        const double tw = est.tau_win, tl = est.tau_loss;
        double var_wr = vc.var_win / (tl * tl) - 2.0 * vc.cov * tw / (tl * tl * tl) +
                        vc.var_loss * tw * tw / (tl * tl * tl * tl);
        if (var_wr < 0.0) {
            if (var_wr < -1e-12) {
                throw model_error(
                    "negative delta-method win ratio variance (estimate near boundary)");
            }
            var_wr = 0.0;
        }
        est.var_wr = var_wr;
        const double se_wr = std::sqrt(var_wr);
        if (log_scale_wr && est.wr > 0.0) {
            const double se_log = se_wr / est.wr;
            est.wr_lower = est.wr * std::exp(-zq * se_log);
            est.wr_upper = est.wr * std::exp(zq * se_log);
        } else {
            est.wr_lower = est.wr - zq * se_wr;
            est.wr_upper = est.wr + zq * se_wr;
        }
    }
    return est;
}

double pvr(double se_unadj, double se_method) {
    if (!(se_unadj > 0.0)) {
        throw std::invalid_argument("pvr requires a positive unadjusted standard error");
    }
    return (se_unadj * se_unadj - se_method * se_method) / (se_unadj * se_unadj) * 100.0;
}

}  // namespace winstat
