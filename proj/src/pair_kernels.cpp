#include "winstat/pair_kernels.hpp"

#include <cmath>
#include <string>

namespace winstat {

namespace {

void check_sizes(const std::vector<int>& z, const std::vector<int>& y,
                 const Eigen::VectorXd& w1, const Eigen::VectorXd& w0) {
    const auto n = static_cast<Eigen::Index>(z.size());
    if (static_cast<Eigen::Index>(y.size()) != n || w1.size() != n || w0.size() != n) {
        throw data_error("pair kernel inputs have mismatched lengths");
    }
}

// Inclusive prefix sums of an L-vector, with prefix(0) = 0.
Eigen::VectorXd prefix_of(const Eigen::VectorXd& v) {
    Eigen::VectorXd p(v.size() + 1);
    p(0) = 0.0;
    for (int l = 0; l < v.size(); ++l) p(l + 1) = p(l) + v(l);
    return p;
}

// sum_{l > l'} row(l) col(l') via the prefix sums of col.
double cross_win(const Eigen::VectorXd& row, const Eigen::VectorXd& col) {
    const Eigen::VectorXd cp = prefix_of(col);
    double s = 0.0;
    for (int l = 0; l < row.size(); ++l) s += row(l) * cp(l);
    return s;
}

// sum_{l < l'} row(l) col(l').
double cross_loss(const Eigen::VectorXd& row, const Eigen::VectorXd& col) {
    const Eigen::VectorXd cp = prefix_of(col);
    const double total = cp(col.size());
    double s = 0.0;
    for (int l = 0; l < row.size(); ++l) s += row(l) * (total - cp(l + 1));
    return s;
}

}  // namespace

ArmWeightTables arm_weight_tables(const std::vector<int>& z, const std::vector<int>& y,
                                  int n_levels, const Eigen::VectorXd& w1,
                                  const Eigen::VectorXd& w0) {
    check_sizes(z, y, w1, w0);
    ArmWeightTables tb;
    tb.t = Eigen::VectorXd::Zero(n_levels);
    tb.c = Eigen::VectorXd::Zero(n_levels);
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (y[i] < 1 || y[i] > n_levels) {
            throw data_error("outcome level out of range in pair kernel input");
        }
        if (z[i] == 1) {
            tb.t(y[i] - 1) += w1(static_cast<Eigen::Index>(i));
        } else {
            tb.c(y[i] - 1) += w0(static_cast<Eigen::Index>(i));
        }
    }
    tb.t_prefix = prefix_of(tb.t);
    tb.c_prefix = prefix_of(tb.c);
    tb.t_total = tb.t_prefix(n_levels);
    tb.c_total = tb.c_prefix(n_levels);
    return tb;
}

KernelSums factorized_sums(const std::vector<int>& z, const std::vector<int>& y,
                           int n_levels, const Eigen::VectorXd& w1,
                           const Eigen::VectorXd& w0, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b, const CategoryProbs* cp) {
    const ArmWeightTables tb = arm_weight_tables(z, y, n_levels, w1, w0);
    KernelSums ks;
    for (int l = 1; l <= n_levels; ++l) {
        ks.win += tb.t(l - 1) * tb.c_below(l);
        ks.loss += tb.t(l - 1) * tb.c_above(l);
    }
    ks.denom = tb.t_total * tb.c_total;
    if (cp == nullptr) return ks;

    const auto n = static_cast<Eigen::Index>(z.size());
    if (cp->p1.rows() != n || a.size() != n || b.size() != n) {
        throw data_error("pair kernel inputs have mismatched lengths");
    }
    Eigen::VectorXd w1_treated = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w0_control = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (z[static_cast<std::size_t>(i)] == 1) w1_treated(i) = w1(i);
        else w0_control(i) = w0(i);
    }
    const MuTables cross = mu_pair_tables(*cp, w1_treated, w0_control);
    ks.aug_cross_win = cross_win(cross.col1, cross.col0);
    ks.aug_cross_loss = cross_loss(cross.col1, cross.col0);

    const MuTables all = mu_pair_tables(*cp, a, b);
    const double ab_diag = a.dot(b);
    ks.aug_all_win = cross_win(all.col1, all.col0) - all.diag_win.dot(a.cwiseProduct(b));
    ks.aug_all_loss = cross_loss(all.col1, all.col0) - all.diag_loss.dot(a.cwiseProduct(b));
    ks.h_denom = a.sum() * b.sum() - ab_diag;
    return ks;
}

KernelSums brute_force_sums(const std::vector<int>& z, const std::vector<int>& y,
                            int n_levels, const Eigen::VectorXd& w1,
                            const Eigen::VectorXd& w0, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b, const CategoryProbs* cp,
                            int n_cap) {
    check_sizes(z, y, w1, w0);
    const int n = static_cast<int>(z.size());
    if (n > n_cap) {
        throw data_error("brute-force pair sums capped at n = " + std::to_string(n_cap));
    }
    KernelSums ks;
    auto mu_win = [&](int i, int j) {
        double s = 0.0;
        for (int l = 1; l < n_levels; ++l) {
            for (int lp = 0; lp < l; ++lp) s += cp->p1(i, l) * cp->p0(j, lp);
        }
        return s;
    };
    auto mu_loss = [&](int i, int j) {
        double s = 0.0;
        for (int l = 0; l < n_levels; ++l) {
            for (int lp = l + 1; lp < n_levels; ++lp) s += cp->p1(i, l) * cp->p0(j, lp);
        }
        return s;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (cp != nullptr) {
                ks.aug_all_win += a(i) * b(j) * mu_win(i, j);
                ks.aug_all_loss += a(i) * b(j) * mu_loss(i, j);
                ks.h_denom += a(i) * b(j);
            }
            if (z[static_cast<std::size_t>(i)] != 1 || z[static_cast<std::size_t>(j)] != 0) {
                continue;
            }
            const double wp = w1(i) * w0(j);
            ks.denom += wp;
            if (y[static_cast<std::size_t>(i)] > y[static_cast<std::size_t>(j)]) ks.win += wp;
            if (y[static_cast<std::size_t>(i)] < y[static_cast<std::size_t>(j)]) ks.loss += wp;
            if (cp != nullptr) {
                ks.aug_cross_win += wp * mu_win(i, j);
                ks.aug_cross_loss += wp * mu_loss(i, j);
            }
        }
    }
    return ks;
}

Projections projections_qhat(const std::vector<int>& z, const std::vector<int>& y,
                             int n_levels, const Eigen::VectorXd& w1,
                             const Eigen::VectorXd& w0) {
    const ArmWeightTables tb = arm_weight_tables(z, y, n_levels, w1, w0);
    const double d = tb.t_total * tb.c_total;
    if (!(d > 0.0)) throw data_error("no treated-control pairs with positive weight");
    const int n = static_cast<int>(z.size());
    const double scale = static_cast<double>(n) / (2.0 * d);
    Projections pr;
    pr.q_win.resize(n);
    pr.q_loss.resize(n);
    for (int i = 0; i < n; ++i) {
        const int l = y[static_cast<std::size_t>(i)];
        if (z[static_cast<std::size_t>(i)] == 1) {
            pr.q_win(i) = scale * w1(i) * tb.c_below(l);
            pr.q_loss(i) = scale * w1(i) * tb.c_above(l);
        } else {
            pr.q_win(i) = scale * w0(i) * tb.t_above(l);
            pr.q_loss(i) = scale * w0(i) * tb.t_below(l);
        }
    }
    return pr;
}

Projections projections_qhat(const std::vector<int>& z, const std::vector<int>& y,
                             int n_levels, const Eigen::VectorXd& w1,
                             const Eigen::VectorXd& w0, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, const CategoryProbs& cp) {
    const ArmWeightTables tb = arm_weight_tables(z, y, n_levels, w1, w0);
    const double d = tb.t_total * tb.c_total;
    if (!(d > 0.0)) throw data_error("no treated-control pairs with positive weight");
    const int n = static_cast<int>(z.size());

    Eigen::VectorXd w1_treated = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w0_control = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (z[static_cast<std::size_t>(i)] == 1) w1_treated(i) = w1(i);
        else w0_control(i) = w0(i);
    }
    const MuTables cross = mu_pair_tables(cp, w1_treated, w0_control);
    const MuTables all = mu_pair_tables(cp, a, b);
    const double h = a.sum() * b.sum() - a.dot(b);
    if (!(h > 0.0)) throw data_error("augmentation pair-weight total is not positive");

    // Prefix sums over the weighted probability columns: P/Q for the
    // treated-control cross term, Pa/Qb for the all-pairs term.
    const Eigen::VectorXd pref_p = prefix_of(cross.col1);
    const Eigen::VectorXd pref_q = prefix_of(cross.col0);
    const Eigen::VectorXd pref_pa = prefix_of(all.col1);
    const Eigen::VectorXd pref_qb = prefix_of(all.col0);
    const double tot_p = pref_p(n_levels), tot_q = pref_q(n_levels);
    const double tot_pa = pref_pa(n_levels), tot_qb = pref_qb(n_levels);

    const double cross_scale = static_cast<double>(n) / (2.0 * d);
    const double h_scale = static_cast<double>(n) / (2.0 * h);
    Projections pr;
    pr.q_win.resize(n);
    pr.q_loss.resize(n);
    for (int i = 0; i < n; ++i) {
        const int l = y[static_cast<std::size_t>(i)];
        // Residual treated-control part: indicator sums minus mu sums.
        double res_win, res_loss;
        if (z[static_cast<std::size_t>(i)] == 1) {
            double mu_w = 0.0, mu_l = 0.0;
            for (int m = 0; m < n_levels; ++m) {
                mu_w += cp.p1(i, m) * pref_q(m);
                mu_l += cp.p1(i, m) * (tot_q - pref_q(m + 1));
            }
            res_win = w1(i) * (tb.c_below(l) - mu_w);
            res_loss = w1(i) * (tb.c_above(l) - mu_l);
        } else {
            double mu_w = 0.0, mu_l = 0.0;
            for (int m = 0; m < n_levels; ++m) {
                mu_w += cp.p0(i, m) * (tot_p - pref_p(m + 1));
                mu_l += cp.p0(i, m) * pref_p(m);
            }
            res_win = w0(i) * (tb.t_above(l) - mu_w);
            res_loss = w0(i) * (tb.t_below(l) - mu_l);
        }
        // All-pairs model part, both roles, excluding the self pair.
        double row_w = 0.0, row_l = 0.0, col_w = 0.0, col_l = 0.0;
        for (int m = 0; m < n_levels; ++m) {
            row_w += cp.p1(i, m) * pref_qb(m);
            row_l += cp.p1(i, m) * (tot_qb - pref_qb(m + 1));
            col_w += cp.p0(i, m) * (tot_pa - pref_pa(m + 1));
            col_l += cp.p0(i, m) * pref_pa(m);
        }
        const double hw = a(i) * (row_w - b(i) * all.diag_win(i)) +
                          b(i) * (col_w - a(i) * all.diag_win(i));
        const double hl = a(i) * (row_l - b(i) * all.diag_loss(i)) +
                          b(i) * (col_l - a(i) * all.diag_loss(i));
        pr.q_win(i) = cross_scale * res_win + h_scale * hw;
        pr.q_loss(i) = cross_scale * res_loss + h_scale * hl;
    }
    return pr;
}

Eigen::MatrixXd derivative_aggregate(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& functional,
    const Eigen::VectorXd& theta0) {
    const Eigen::VectorXd f0 = functional(theta0);
    Eigen::MatrixXd jac(f0.size(), theta0.size());
    for (int k = 0; k < theta0.size(); ++k) {
        const double h = 1e-5 * (1.0 + std::abs(theta0(k)));
        Eigen::VectorXd up = theta0, down = theta0;
        up(k) += h;
        down(k) -= h;
        const Eigen::VectorXd fu = functional(up);
        const Eigen::VectorXd fd = functional(down);
        if (!fu.allFinite() || !fd.allFinite()) {
            throw model_error("non-finite value while differentiating estimator");
        }
        jac.col(k) = (fu - fd) / (2.0 * h);
    }
    return jac;
}

}  // namespace winstat
