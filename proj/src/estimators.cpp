#include "winstat/estimators.hpp"

#include <cmath>

namespace winstat {

std::string method_name(Method m) {
    switch (m) {
        case Method::unadj: return "unadj";
        case Method::ipw: return "ipw";
        case Method::ow: return "ow";
        case Method::aipw: return "aipw";
        case Method::aow: return "aow";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "unadj" || name == "unadjusted") return Method::unadj;
    if (name == "ipw") return Method::ipw;
    if (name == "ow") return Method::ow;
    if (name == "aipw") return Method::aipw;
    if (name == "aow") return Method::aow;
    throw data_error("unknown method '" + name + "' (expected unadj, ipw, ow, aipw, aow)");
}

bool uses_propensity(Method m) { return m != Method::unadj; }

bool is_augmented(Method m) { return m == Method::aipw || m == Method::aow; }

SchemeWeights scheme_weights(Method m, const Eigen::VectorXd& e_hat, int n) {
    SchemeWeights sw;
    if (m == Method::unadj) {
        sw.w1 = Eigen::VectorXd::Ones(n);
        sw.w0 = Eigen::VectorXd::Ones(n);
        return sw;
    }
    if (e_hat.size() != n) {
        throw model_error("propensity scores required for " + method_name(m));
    }
    if (m == Method::ipw || m == Method::aipw) {
        sw.w1 = e_hat.cwiseInverse();
        sw.w0 = (1.0 - e_hat.array()).inverse().matrix();
    } else {
        sw.w1 = (1.0 - e_hat.array()).matrix();
        sw.w0 = e_hat;
    }
    if (m == Method::aipw) {
        sw.a = Eigen::VectorXd::Ones(n);
        sw.b = Eigen::VectorXd::Ones(n);
    } else if (m == Method::aow) {
        sw.a = (e_hat.array() * (1.0 - e_hat.array())).matrix();
        sw.b = sw.a;
    }
    return sw;
}

namespace {

WinEstimate assemble(Method m, double tau_win, double tau_loss) {
    WinEstimate est;
    est.method = m;
    est.tau_win = tau_win;
    est.tau_loss = tau_loss;
    est.wd = tau_win - tau_loss;
    est.wr_defined = tau_loss > 0.0;
    if (est.wr_defined) est.wr = tau_win / tau_loss;
    return est;
}

}  // namespace

WinEstimate estimate(Method m, const std::vector<int>& z, const std::vector<int>& y,
                     int n_levels, const Eigen::VectorXd& e_hat,
                     const CategoryProbs* cp) {
    const int n = static_cast<int>(z.size());
    const SchemeWeights sw = scheme_weights(m, e_hat, n);
    const bool aug = is_augmented(m);
    if (aug && cp == nullptr) {
        throw model_error("outcome category probabilities required for " + method_name(m));
    }
    const KernelSums ks =
        factorized_sums(z, y, n_levels, sw.w1, sw.w0, sw.a, sw.b, aug ? cp : nullptr);
    if (!(ks.denom > 0.0)) throw data_error("no treated-control pairs with positive weight");
    if (!aug) return assemble(m, ks.win / ks.denom, ks.loss / ks.denom);
    if (!(ks.h_denom > 0.0)) throw data_error("augmentation pair-weight total is not positive");
    const double tau_win =
        (ks.win - ks.aug_cross_win) / ks.denom + ks.aug_all_win / ks.h_denom;
    const double tau_loss =
        (ks.loss - ks.aug_cross_loss) / ks.denom + ks.aug_all_loss / ks.h_denom;
    return assemble(m, tau_win, tau_loss);
}

WinEstimate estimate_unadj(const std::vector<int>& z, const std::vector<int>& y,
                           int n_levels) {
    return estimate(Method::unadj, z, y, n_levels, Eigen::VectorXd(), nullptr);
}

WinEstimate estimate_weighted(const std::vector<int>& z, const std::vector<int>& y,
                              int n_levels, const Eigen::VectorXd& e_hat, Method m) {
    if (m != Method::ipw && m != Method::ow) {
        throw model_error("estimate_weighted expects ipw or ow");
    }
    return estimate(m, z, y, n_levels, e_hat, nullptr);
}

WinEstimate estimate_augmented(const std::vector<int>& z, const std::vector<int>& y,
                               int n_levels, const Eigen::VectorXd& e_hat,
                               const CategoryProbs& cp, Method m) {
    if (!is_augmented(m)) throw model_error("estimate_augmented expects aipw or aow");
    return estimate(m, z, y, n_levels, e_hat, &cp);
}

}  // namespace winstat
