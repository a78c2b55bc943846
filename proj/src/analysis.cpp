#include "winstat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <json.hpp>

#include "winstat/logit_fit.hpp"

namespace winstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd select_columns(const TrialDataset& ds,
                               const std::vector<std::string>& names) {
    if (names.empty()) return ds.x;
    Eigen::MatrixXd sub(ds.x.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto it = std::find(ds.covariate_names.begin(),
                                  ds.covariate_names.end(), names[k]);
        if (it == ds.covariate_names.end()) {
            throw data_error("unknown covariate '" + names[k] + "'");
        }
        sub.col(static_cast<Eigen::Index>(k)) =
            ds.x.col(it - ds.covariate_names.begin());
    }
    return sub;
}

nlohmann::ordered_json interval_json(double est, double var, double lower,
                                     double upper) {
    nlohmann::ordered_json j;
    j["estimate"] = est;
    j["se"] = std::sqrt(var);
    j["lower"] = lower;
    j["upper"] = upper;
    return j;
}

std::string fmt_or(double v, const char* fmt, const char* placeholder) {
    return std::isfinite(v) ? strf(fmt, v) : std::string(placeholder);
}

}  // namespace

AnalysisResult run_analysis(const TrialDataset& ds, const AnalysisOptions& opts) {
    const ValidationReport vr = validate(ds);
    if (!vr.ok()) {
        std::string msg = "invalid dataset:";
        for (const std::string& e : vr.errors) msg += " " + e + ";";
        msg.pop_back();
        throw data_error(msg);
    }
    if (!(opts.confidence > 0.0 && opts.confidence < 1.0)) {
        throw data_error("confidence level must lie in (0,1)");
    }
    if (opts.methods.empty()) throw data_error("no methods requested");

    std::vector<Method> methods;
    for (const std::string& name : opts.methods) {
        const Method m = method_from_name(name);
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
            methods.push_back(m);
        }
    }

    bool need_prop = false, need_out = false;
    for (Method m : methods) {
        need_prop = need_prop || uses_propensity(m);
        need_out = need_out || is_augmented(m);
    }

    std::optional<PropensityModel> pm;
    if (need_prop) {
        const Eigen::MatrixXd xp = select_columns(ds, opts.propensity_covariates);
        try {
            pm = fit_logistic(xp, ds.z);
        } catch (const model_error& e) {
            throw model_error(std::string("propensity model: ") + e.what());
        }
    }
    Eigen::MatrixXd xo;
    std::optional<OrdinalModel> om;
    std::optional<CategoryProbs> cp;
    const FeatureMap fm{opts.outcome_features, true};
    if (need_out) {
        xo = select_columns(ds, opts.outcome_covariates);
        try {
            om = fit_proportional_odds(xo, ds.z, ds.y, ds.n_levels, fm);
        } catch (const model_error& e) {
            throw model_error(std::string("outcome model: ") + e.what());
        }
        cp = category_probs(*om, xo, fm);
    }

    AnalysisResult res;
    res.n = ds.n();
    res.n_treated = ds.n_treated();
    res.n_control = ds.n_control();
    res.n_levels = ds.n_levels;
    res.direction = ds.reoriented ? "lower_better" : "higher_better";
    res.confidence = opts.confidence;

    for (Method m : methods) {
        ModelContext ctx;
        if (uses_propensity(m)) ctx.propensity = &*pm;
        if (is_augmented(m)) {
            ctx.outcome = &*om;
            ctx.outcome_x = &xo;
            ctx.feature_map = fm;
        }
        WinEstimate est = estimate(m, ds.z, ds.y, ds.n_levels,
                                   pm ? pm->fitted : Eigen::VectorXd(),
                                   cp ? &*cp : nullptr);
        const bool pairwise = m == Method::unadj && opts.pairwise_for_unadj;
        const VarianceComponents vc =
            pairwise ? variance_pairwise(ds.z, ds.y, ds.n_levels)
                     : variance_if(m, ds.z, ds.y, ds.n_levels, ctx);
        est = delta_wr_wd(vc, est, opts.confidence, opts.log_scale_wr);
        MethodResult mr;
        mr.method = method_name(m);
        mr.estimate = est;
        mr.pvr_wr = kNaN;
        mr.pvr_wd = kNaN;
        mr.variance_route =
            pairwise ? "pairwise_moments" : "influence_function";
        res.methods.push_back(std::move(mr));
    }

    const MethodResult* base = nullptr;
    for (const MethodResult& mr : res.methods) {
        if (mr.method == "unadj") base = &mr;
    }
    if (base != nullptr) {
        const double se_wr_u = std::sqrt(base->estimate.var_wr);
        const double se_wd_u = std::sqrt(base->estimate.var_wd);
        for (MethodResult& mr : res.methods) {
            if (std::isfinite(se_wr_u) && se_wr_u > 0.0 &&
                std::isfinite(mr.estimate.var_wr)) {
                mr.pvr_wr = pvr(se_wr_u, std::sqrt(mr.estimate.var_wr));
            }
            if (std::isfinite(se_wd_u) && se_wd_u > 0.0 &&
                std::isfinite(mr.estimate.var_wd)) {
                mr.pvr_wd = pvr(se_wd_u, std::sqrt(mr.estimate.var_wd));
            }
        }
    }
    return res;
}

std::string AnalysisResult::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["n"] = n;
    j["n_treated"] = n_treated;
    j["n_control"] = n_control;
    j["n_levels"] = n_levels;
    j["direction"] = direction;
    j["confidence"] = confidence;
    j["methods"] = nlohmann::ordered_json::array();
    for (const MethodResult& mr : methods) {
        const WinEstimate& e = mr.estimate;
        nlohmann::ordered_json mj;
        mj["method"] = mr.method;
        mj["tau_win"] = e.tau_win;
        mj["tau_loss"] = e.tau_loss;
        nlohmann::ordered_json wr =
            interval_json(e.wr, e.var_wr, e.wr_lower, e.wr_upper);
        wr["defined"] = e.wr_defined;
        wr["pvr_pct"] = mr.pvr_wr;
        mj["win_ratio"] = std::move(wr);
        nlohmann::ordered_json wd =
            interval_json(e.wd, e.var_wd, e.wd_lower, e.wd_upper);
        wd["pvr_pct"] = mr.pvr_wd;
        mj["win_difference"] = std::move(wd);
        mj["variance_route"] = mr.variance_route;
        j["methods"].push_back(std::move(mj));
    }
    return j.dump(2) + "\n";
}

std::string AnalysisResult::to_text() const {
    std::string out = strf(
        "n=%d (treated %d, control %d), levels=%d, direction=%s, confidence=%.0f%%\n",
        n, n_treated, n_control, n_levels, direction.c_str(), confidence * 100.0);
    out += strf("%-8s %8s %8s | %8s %8s %8s %8s %7s | %8s %8s %8s %8s %7s\n",
                "method", "tau_win", "tau_loss", "WR", "SE", "LCL", "UCL", "PVR%",
                "WD", "SE", "LCL", "UCL", "PVR%");
    for (const MethodResult& mr : methods) {
        const WinEstimate& e = mr.estimate;
        std::string row = strf("%-8s %8.4f %8.4f | ", mr.method.c_str(), e.tau_win,
                               e.tau_loss);
        if (e.wr_defined) {
            row += strf("%8.4f %8.4f %8.4f %8.4f %7s | ", e.wr,
                        std::sqrt(e.var_wr), e.wr_lower, e.wr_upper,
                        fmt_or(mr.pvr_wr, "%.2f", "--").c_str());
        } else {
            row += strf("%8s %8s %8s %8s %7s | ", "undef", "--", "--", "--", "--");
        }
        row += strf("%8.4f %8.4f %8.4f %8.4f %7s\n", e.wd, std::sqrt(e.var_wd),
                    e.wd_lower, e.wd_upper, fmt_or(mr.pvr_wd, "%.2f", "--").c_str());
        out += row;
    }
    return out;
}

}  // namespace winstat
