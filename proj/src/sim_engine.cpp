#include "winstat/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "winstat/estimators.hpp"
#include "winstat/inference.hpp"
#include "winstat/logit_fit.hpp"
#include "winstat/polr_fit.hpp"

namespace winstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = splitmix(seed);
    x = splitmix(x ^ a);
    x = splitmix(x ^ b);
    return x;
}

DgpModel dgp_model_from_name(const std::string& name) {
    if (name == "quadratic") return DgpModel::quadratic;
    if (name == "interaction") return DgpModel::interaction;
    throw data_error("unknown model '" + name + "' (expected quadratic or interaction)");
}

std::string dgp_model_name(DgpModel m) {
    return m == DgpModel::quadratic ? "quadratic" : "interaction";
}

DgpSpec DgpSpec::quadratic_default() {
    DgpSpec s;
    s.model = DgpModel::quadratic;
    s.delta = 1.0;
    return s;
}

DgpSpec DgpSpec::interaction_default() {
    DgpSpec s;
    s.model = DgpModel::interaction;
    s.delta = 2.0;
    return s;
}

Eigen::MatrixXd gen_covariates(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g1(1.0, 0.3), g2(0.9, 0.4), g3(0.8, 0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(n, 6);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = g1(rng);
        x(i, 1) = g2(rng);
        x(i, 2) = g3(rng);
        x(i, 3) = u(rng) < 0.75 ? 1.0 : 0.0;
        x(i, 4) = u(rng) < 0.5 ? 1.0 : 0.0;
        x(i, 5) = u(rng) < 0.25 ? 1.0 : 0.0;
    }
    return x;
}

namespace {

Eigen::VectorXd dgp_linear_predictor(const DgpSpec& spec, const Eigen::MatrixXd& x,
                                     int arm) {
    static const double base[6] = {1.0, -1.0, 1.0, -1.0, 1.0, -1.0};
    const double scale = spec.heterogeneous_slopes ? 0.5 + 0.5 * arm : 0.5;
    Eigen::VectorXd gam(6);
    for (int j = 0; j < 6; ++j) gam(j) = base[j] * scale;

    Eigen::VectorXd lin = x * gam;
    if (spec.model == DgpModel::quadratic) {
        lin += x.array().square().matrix() * (2.0 * gam);
    } else {
        for (int j = 0; j < 6; ++j) {
            for (int k = j + 1; k < 6; ++k) {
                const double prod = gam(j) * gam(k);
                const double coef =
                    prod > 0.0 ? gam(j) + gam(k) : (prod < 0.0 ? 0.25 * prod : 0.0);
                lin += coef * (x.col(j).array() * x.col(k).array()).matrix();
            }
        }
    }
    lin.array() += spec.delta * arm;
    return lin;
}

}  // namespace

Eigen::MatrixXd dgp_category_probs(const DgpSpec& spec, const Eigen::MatrixXd& x,
                                   int arm) {
    const Eigen::VectorXd lin = dgp_linear_predictor(spec, x, arm);
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd probs(n, 3);
    for (int i = 0; i < n; ++i) {
        const double e1 = expit(spec.a1 + lin(i));  // P(Y >= 2 | X)
        const double e2 = expit(spec.a2 + lin(i));  // P(Y >= 3 | X)
        probs(i, 0) = 1.0 - e1;
        probs(i, 1) = e1 - e2;
        probs(i, 2) = e2;
    }
    return probs;
}

void gen_potential_outcomes(const DgpSpec& spec, const Eigen::MatrixXd& x,
                            std::mt19937_64& rng, std::vector<int>& y0,
                            std::vector<int>& y1) {
    const int n = static_cast<int>(x.rows());
    y0.resize(static_cast<std::size_t>(n));
    y1.resize(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int arm = 0; arm <= 1; ++arm) {
        const Eigen::MatrixXd p = dgp_category_probs(spec, x, arm);
        std::vector<int>& y = arm == 1 ? y1 : y0;
        for (int i = 0; i < n; ++i) {
            const double u = unif(rng);
            const double e2 = p(i, 2);
            const double e1 = e2 + p(i, 1);
            y[static_cast<std::size_t>(i)] = u < e2 ? 3 : (u < e1 ? 2 : 1);
        }
    }
}

TruthValues mc_truth(const DgpSpec& spec, long draws, std::uint64_t seed) {
    if (draws < 100000) {
        throw data_error("truth computation needs at least 100000 draws");
    }
    std::mt19937_64 rng(mix_seed(seed, 0x74727574ULL, 0));
    constexpr int chunk = 16384;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(6);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(6, 6);
    long done = 0;
    while (done < draws) {
        const int m = static_cast<int>(std::min<long>(chunk, draws - done));
        const Eigen::MatrixXd x = gen_covariates(m, rng);
        Eigen::MatrixXd v(m, 6);
        v.leftCols(3) = dgp_category_probs(spec, x, 1);
        v.rightCols(3) = dgp_category_probs(spec, x, 0);
        sum += v.colwise().sum().transpose();
        sumsq.noalias() += v.transpose() * v;
        done += m;
    }
    const double m = static_cast<double>(draws);
    const Eigen::VectorXd mean = sum / m;
    const Eigen::MatrixXd cov =
        (sumsq - m * mean * mean.transpose()) / (m - 1.0);

    // tau_win = sum_{l > l'} nu1_l nu0_l'; gradients drive the delta method.
    const Eigen::VectorXd nu1 = mean.head(3), nu0 = mean.tail(3);
    double tau_win = 0.0, tau_loss = 0.0;
    Eigen::VectorXd gw = Eigen::VectorXd::Zero(6), gl = Eigen::VectorXd::Zero(6);
    for (int l = 0; l < 3; ++l) {
        for (int lp = 0; lp < 3; ++lp) {
            if (l > lp) {
                tau_win += nu1(l) * nu0(lp);
                gw(l) += nu0(lp);
                gw(3 + lp) += nu1(l);
            } else if (l < lp) {
                tau_loss += nu1(l) * nu0(lp);
                gl(l) += nu0(lp);
                gl(3 + lp) += nu1(l);
            }
        }
    }
    const double var_w = gw.dot(cov * gw) / m;
    const double var_l = gl.dot(cov * gl) / m;
    const double cov_wl = gw.dot(cov * gl) / m;

    TruthValues tv;
    tv.tau_win = tau_win;
    tv.tau_loss = tau_loss;
    tv.wd = tau_win - tau_loss;
    tv.wr = tau_win / tau_loss;
    tv.se_wd = std::sqrt(std::max(0.0, var_w + var_l - 2.0 * cov_wl));
    const double t2 = tau_loss * tau_loss;
    tv.se_wr = std::sqrt(std::max(
        0.0, var_w / t2 - 2.0 * cov_wl * tau_win / (t2 * tau_loss) +
                 var_l * tau_win * tau_win / (t2 * t2)));
    tv.draws = draws;
    return tv;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    using json = nlohmann::json;
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw data_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw data_error("config must be a JSON object");

    static const char* allowed[] = {"model",      "pi",           "delta",
                                    "heterogeneous_slopes",       "n",
                                    "replications", "seed",       "methods",
                                    "outcome_model", "confidence", "threads",
                                    "truth"};
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || item.key() == k;
        if (!ok) throw data_error("unknown config key '" + item.key() + "'");
    }

    ExperimentConfig cfg;
    try {
        const DgpModel model =
            dgp_model_from_name(j.value("model", std::string("quadratic")));
        cfg.dgp = model == DgpModel::quadratic ? DgpSpec::quadratic_default()
                                               : DgpSpec::interaction_default();
        if (j.contains("pi")) cfg.dgp.pi = j.at("pi").get<double>();
        if (j.contains("delta")) cfg.dgp.delta = j.at("delta").get<double>();
        if (j.contains("heterogeneous_slopes")) {
            cfg.dgp.heterogeneous_slopes = j.at("heterogeneous_slopes").get<bool>();
        }
        if (j.contains("n")) {
            cfg.sample_sizes.clear();
            if (j.at("n").is_array()) {
                for (const auto& v : j.at("n")) cfg.sample_sizes.push_back(v.get<int>());
            } else {
                cfg.sample_sizes.push_back(j.at("n").get<int>());
            }
        }
        if (j.contains("replications")) cfg.replications = j.at("replications").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& v : j.at("methods")) {
                const std::string canon = method_name(method_from_name(v.get<std::string>()));
                if (std::find(cfg.methods.begin(), cfg.methods.end(), canon) ==
                    cfg.methods.end()) {
                    cfg.methods.push_back(canon);
                }
            }
        }
        if (j.contains("outcome_model")) {
            cfg.outcome_model = j.at("outcome_model").get<std::string>();
        }
        if (j.contains("confidence")) cfg.confidence = j.at("confidence").get<double>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
        if (j.contains("truth")) {
            const json& t = j.at("truth");
            if (!t.is_object()) throw data_error("config 'truth' must be an object");
            if (t.contains("tau_win") || t.contains("tau_loss")) {
                cfg.truth_taus = {t.at("tau_win").get<double>(),
                                  t.at("tau_loss").get<double>()};
            } else if (t.contains("draws")) {
                cfg.truth_draws = t.at("draws").get<long>();
            } else {
                throw data_error("config 'truth' needs draws or tau_win/tau_loss");
            }
        }
    } catch (const json::exception& e) {
        throw data_error(std::string("config field error: ") + e.what());
    }

    if (!(cfg.dgp.pi > 0.0 && cfg.dgp.pi < 1.0)) {
        throw data_error("config pi must lie in (0,1)");
    }
    if (cfg.sample_sizes.empty()) throw data_error("config needs at least one sample size");
    for (int n : cfg.sample_sizes) {
        if (n < 4) throw data_error("config sample sizes must be at least 4");
    }
    if (cfg.replications < 1) throw data_error("config replications must be positive");
    if (cfg.methods.empty()) throw data_error("config needs at least one method");
    if (cfg.outcome_model != "correct" && cfg.outcome_model != "mis" &&
        cfg.outcome_model != "both") {
        throw data_error("config outcome_model must be correct, mis, or both");
    }
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
        throw data_error("config confidence must lie in (0,1)");
    }
    if (cfg.threads < 1) throw data_error("config threads must be positive");
    if (cfg.truth_taus) {
        if (!(cfg.truth_taus->second > 0.0)) {
            throw data_error("config truth tau_loss must be positive");
        }
    } else if (cfg.truth_draws < 100000) {
        throw data_error("config truth draws must be at least 100000");
    }
    return cfg;
}

namespace {

struct Variant {
    std::string label;
    Method m;
    bool mis = false;   // linear-only outcome model for augmented schemes
    bool pairwise = false;  // pairwise-moment variance route (unadj only)
};

std::vector<Variant> expand_variants(const ExperimentConfig& cfg) {
    std::vector<Variant> vs;
    for (const std::string& name : cfg.methods) {
        const Method m = method_from_name(name);
        if (m == Method::unadj) {
            vs.push_back({"unadj", m, false, false});
            vs.push_back({"unadj_pm", m, false, true});
        } else if (!is_augmented(m)) {
            vs.push_back({method_name(m), m, false, false});
        } else {
            if (cfg.outcome_model != "mis") vs.push_back({method_name(m), m, false, false});
            if (cfg.outcome_model != "correct") {
                vs.push_back({method_name(m) + "_mis", m, true, false});
            }
        }
    }
    return vs;
}

struct VariantDraw {
    double wr = kNaN, wd = kNaN, var_wr = kNaN, var_wd = kNaN;
    bool wr_defined = false;
};

struct RepOutcome {
    bool ok = false;
    std::string error;
    std::vector<VariantDraw> draws;
};

RepOutcome run_one(const ExperimentConfig& cfg, const std::vector<Variant>& variants,
                   int cell_index, int rep_index, int n) {
    RepOutcome out;
    out.draws.resize(variants.size());
    try {
        std::mt19937_64 rng(
            mix_seed(cfg.seed, static_cast<std::uint64_t>(cell_index) + 1,
                     static_cast<std::uint64_t>(rep_index)));
        const Eigen::MatrixXd x = gen_covariates(n, rng);
        std::vector<int> y0, y1;
        gen_potential_outcomes(cfg.dgp, x, rng, y0, y1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<int> z(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            z[ui] = unif(rng) < cfg.dgp.pi ? 1 : 0;
            y[ui] = z[ui] == 1 ? y1[ui] : y0[ui];
        }

        bool need_prop = false, need_cor = false, need_mis = false;
        for (const Variant& v : variants) {
            need_prop = need_prop || uses_propensity(v.m);
            if (is_augmented(v.m)) (v.mis ? need_mis : need_cor) = true;
        }
        std::optional<PropensityModel> pm;
        if (need_prop) pm = fit_logistic(x, z);
        FeatureMap fm_cor{cfg.dgp.model == DgpModel::quadratic
                              ? FeatureExpansion::quadratic
                              : FeatureExpansion::interactions,
                          true};
        FeatureMap fm_mis{FeatureExpansion::linear, true};
        std::optional<OrdinalModel> om_cor, om_mis;
        const int n_levels = cfg.dgp.n_levels();
        if (need_cor) om_cor = fit_proportional_odds(x, z, y, n_levels, fm_cor);
        if (need_mis) om_mis = fit_proportional_odds(x, z, y, n_levels, fm_mis);

        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            const Variant& v = variants[vi];
            ModelContext ctx;
            if (uses_propensity(v.m)) ctx.propensity = &*pm;
            CategoryProbs cp;
            const CategoryProbs* cpp = nullptr;
            if (is_augmented(v.m)) {
                const OrdinalModel& om = v.mis ? *om_mis : *om_cor;
                ctx.outcome = &om;
                ctx.outcome_x = &x;
                ctx.feature_map = v.mis ? fm_mis : fm_cor;
                cp = category_probs(om, x, ctx.feature_map);
                cpp = &cp;
            }
            WinEstimate est = estimate(v.m, z, y, n_levels,
                                       pm ? pm->fitted : Eigen::VectorXd(), cpp);
            const VarianceComponents vc =
                v.pairwise ? variance_pairwise(z, y, n_levels)
                       : variance_if(v.m, z, y, n_levels, ctx);
            est = delta_wr_wd(vc, est, cfg.confidence);
            out.draws[vi] = {est.wr, est.wd, est.var_wr, est.var_wd, est.wr_defined};
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

EstimandSummary summarize(const std::vector<double>& est, const std::vector<double>& var,
                          double truth, double zq) {
    EstimandSummary s;
    s.truth = truth;
    const auto k = static_cast<double>(est.size());
    if (est.empty()) {
        s.mean_estimate = s.relative_bias_pct = s.mc_variance = kNaN;
        s.mean_estimated_variance = s.variance_ratio = s.coverage = kNaN;
        s.mcsd = s.aese = s.relative_efficiency = s.pvr_pct = kNaN;
        return s;
    }
    double sum = 0.0;
    for (double v : est) sum += v;
    s.mean_estimate = sum / k;
    s.relative_bias_pct = std::abs(truth) > 1e-12
                              ? (s.mean_estimate - truth) / truth * 100.0
                              : kNaN;
    double ss = 0.0;
    for (double v : est) ss += (v - s.mean_estimate) * (v - s.mean_estimate);
    s.mc_variance = est.size() > 1 ? ss / (k - 1.0) : kNaN;
    double vsum = 0.0, sesum = 0.0, cover = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        vsum += var[i];
        const double se = std::sqrt(var[i]);
        sesum += se;
        if (std::abs(est[i] - truth) <= zq * se) cover += 1.0;
    }
    s.mean_estimated_variance = vsum / k;
    s.variance_ratio = s.mean_estimated_variance / s.mc_variance;
    s.coverage = cover / k;
    s.mcsd = std::sqrt(s.mc_variance);
    s.aese = sesum / k;
    s.relative_efficiency = kNaN;  // filled against the unadj baseline
    s.pvr_pct = kNaN;
    return s;
}

}  // namespace

SimulationReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.sample_sizes.empty()) throw data_error("experiment needs sample sizes");
    const std::vector<Variant> variants = expand_variants(cfg);

    SimulationReport report;
    report.config = cfg;
    if (cfg.truth_taus) {
        report.truth.tau_win = cfg.truth_taus->first;
        report.truth.tau_loss = cfg.truth_taus->second;
        report.truth.wr = report.truth.tau_win / report.truth.tau_loss;
        report.truth.wd = report.truth.tau_win - report.truth.tau_loss;
    } else {
        report.truth = mc_truth(cfg.dgp, cfg.truth_draws, mix_seed(cfg.seed, 0, 0));
    }
    const double zq = normal_quantile(1.0 - (1.0 - cfg.confidence) / 2.0);

    for (std::size_t cell = 0; cell < cfg.sample_sizes.size(); ++cell) {
        const int n = cfg.sample_sizes[cell];
        const int reps = cfg.replications;
        std::vector<RepOutcome> results(static_cast<std::size_t>(reps));
        const int nthreads = std::max(1, std::min(cfg.threads, reps));
        if (nthreads == 1) {
            for (int r = 0; r < reps; ++r) {
                results[static_cast<std::size_t>(r)] =
                    run_one(cfg, variants, static_cast<int>(cell), r, n);
            }
        } else {
            std::atomic<int> next{0};
            auto work = [&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= reps) break;
                    results[static_cast<std::size_t>(r)] =
                        run_one(cfg, variants, static_cast<int>(cell), r, n);
                }
            };
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(nthreads));
            for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
            for (std::thread& t : pool) t.join();
        }

        CellReport cr;
        cr.n = n;
        cr.replications = reps;
        std::string first_error;
        for (const RepOutcome& ro : results) {
            if (!ro.ok) {
                ++cr.failures;
                if (first_error.empty()) first_error = ro.error;
            }
        }
        if (cr.failures > 0.05 * reps) {
            throw simulation_error(strf(
                "%d of %d replicates failed at n=%d (first error: %s)", cr.failures,
                reps, n, first_error.c_str()));
        }

        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            std::vector<double> wr, wr_var, wd, wd_var;
            for (const RepOutcome& ro : results) {
                if (!ro.ok) continue;
                const VariantDraw& d = ro.draws[vi];
                wd.push_back(d.wd);
                wd_var.push_back(d.var_wd);
                if (d.wr_defined) {
                    wr.push_back(d.wr);
                    wr_var.push_back(d.var_wr);
                }
            }
            MethodSummary ms;
            ms.method = variants[vi].label;
            ms.wr = summarize(wr, wr_var, report.truth.wr, zq);
            ms.wd = summarize(wd, wd_var, report.truth.wd, zq);
            cr.methods.push_back(std::move(ms));
        }

        // Efficiency and variance-reduction columns against the unadj row.
        const MethodSummary* base = nullptr;
        for (const MethodSummary& ms : cr.methods) {
            if (ms.method == "unadj") base = &ms;
        }
        if (base != nullptr) {
            const double base_wr_mc = base->wr.mc_variance;
            const double base_wd_mc = base->wd.mc_variance;
            const double base_wr_ev = base->wr.mean_estimated_variance;
            const double base_wd_ev = base->wd.mean_estimated_variance;
            for (MethodSummary& ms : cr.methods) {
                ms.wr.relative_efficiency = base_wr_mc / ms.wr.mc_variance;
                ms.wd.relative_efficiency = base_wd_mc / ms.wd.mc_variance;
                ms.wr.pvr_pct = (base_wr_ev - ms.wr.mean_estimated_variance) /
                                base_wr_ev * 100.0;
                ms.wd.pvr_pct = (base_wd_ev - ms.wd.mean_estimated_variance) /
                                base_wd_ev * 100.0;
            }
        }
        report.cells.push_back(std::move(cr));
    }
    return report;
}

namespace {

void csv_row(std::string& out, const SimulationReport& rep, const CellReport& cell,
             const MethodSummary& ms, const char* estimand,
             const EstimandSummary& es) {
    out += strf("%s,%.10g,%d,%d,%d,%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                "%.10g,%.10g,%.10g,%.10g\n",
                dgp_model_name(rep.config.dgp.model).c_str(), rep.config.dgp.pi,
                cell.n, cell.replications, cell.failures, ms.method.c_str(), estimand,
                es.truth, es.mean_estimate, es.relative_bias_pct, es.mc_variance,
                es.mean_estimated_variance, es.variance_ratio, es.coverage, es.mcsd,
                es.aese, es.relative_efficiency, es.pvr_pct);
}

nlohmann::ordered_json estimand_json(const EstimandSummary& es) {
    nlohmann::ordered_json j;
    j["truth"] = es.truth;
    j["mean_estimate"] = es.mean_estimate;
    j["relative_bias_pct"] = es.relative_bias_pct;
    j["mc_variance"] = es.mc_variance;
    j["mean_estimated_variance"] = es.mean_estimated_variance;
    j["variance_ratio"] = es.variance_ratio;
    j["coverage"] = es.coverage;
    j["mcsd"] = es.mcsd;
    j["aese"] = es.aese;
    j["relative_efficiency"] = es.relative_efficiency;
    j["pvr_pct"] = es.pvr_pct;
    return j;
}

}  // namespace

std::string SimulationReport::to_csv() const {
    std::string out =
        "model,pi,n,replications,failures,method,estimand,truth,mean_estimate,"
        "relative_bias_pct,mc_variance,mean_estimated_variance,variance_ratio,"
        "coverage,mcsd,aese,relative_efficiency,pvr_pct\n";
    for (const CellReport& cell : cells) {
        for (const MethodSummary& ms : cell.methods) {
            csv_row(out, *this, cell, ms, "wr", ms.wr);
            csv_row(out, *this, cell, ms, "wd", ms.wd);
        }
    }
    return out;
}

std::string SimulationReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["model"] = dgp_model_name(config.dgp.model);
    j["pi"] = config.dgp.pi;
    j["delta"] = config.dgp.delta;
    j["heterogeneous_slopes"] = config.dgp.heterogeneous_slopes;
    j["replications"] = config.replications;
    j["seed"] = config.seed;
    j["methods"] = config.methods;
    j["outcome_model"] = config.outcome_model;
    j["confidence"] = config.confidence;
    j["truth"] = {{"tau_win", truth.tau_win}, {"tau_loss", truth.tau_loss},
                  {"wr", truth.wr},           {"wd", truth.wd},
                  {"se_wr", truth.se_wr},     {"se_wd", truth.se_wd},
                  {"draws", truth.draws}};
    j["cells"] = nlohmann::ordered_json::array();
    for (const CellReport& cell : cells) {
        nlohmann::ordered_json cj;
        cj["n"] = cell.n;
        cj["replications"] = cell.replications;
        cj["failures"] = cell.failures;
        cj["methods"] = nlohmann::ordered_json::array();
        for (const MethodSummary& ms : cell.methods) {
            nlohmann::ordered_json mj;
            mj["method"] = ms.method;
            mj["wr"] = estimand_json(ms.wr);
            mj["wd"] = estimand_json(ms.wd);
            cj["methods"].push_back(std::move(mj));
        }
        j["cells"].push_back(std::move(cj));
    }
    return j.dump(2) + "\n";
}

std::string SimulationReport::to_text() const {
    std::string out =
        strf("model=%s pi=%.3g delta=%.3g reps=%d seed=%llu\n",
             dgp_model_name(config.dgp.model).c_str(), config.dgp.pi, config.dgp.delta,
             config.replications,
             static_cast<unsigned long long>(config.seed));
    out += strf("truth: WR=%.4f WD=%.4f (tau_win=%.4f tau_loss=%.4f)\n", truth.wr,
                truth.wd, truth.tau_win, truth.tau_loss);
    for (const CellReport& cell : cells) {
        out += strf("\nn=%d replications=%d failures=%d\n", cell.n, cell.replications,
                    cell.failures);
        out += strf("%-10s %28s   %28s\n", "", "---------- WR ----------",
                    "---------- WD ----------");
        out += strf("%-10s %9s %7s %6s %4s   %9s %7s %6s %4s\n", "method", "bias%",
                    "Est/MC", "cover", "RE", "bias%", "Est/MC", "cover", "RE");
        for (const MethodSummary& ms : cell.methods) {
            out += strf("%-10s %9.2f %7.3f %6.3f %4.2f   %9.2f %7.3f %6.3f %4.2f\n",
                        ms.method.c_str(), ms.wr.relative_bias_pct,
                        ms.wr.variance_ratio, ms.wr.coverage,
                        ms.wr.relative_efficiency, ms.wd.relative_bias_pct,
                        ms.wd.variance_ratio, ms.wd.coverage,
                        ms.wd.relative_efficiency);
        }
    }
    return out;
}

}  // namespace winstat
