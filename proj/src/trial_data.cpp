#include "winstat/trial_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace winstat {

int TrialDataset::n_treated() const {
    int c = 0;
    for (int zi : z) c += zi;
    return c;
}

int TrialDataset::n_control() const { return n() - n_treated(); }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

double parse_double(const std::string& s, const std::string& col, std::size_t row) {
    if (is_missing(s)) {
        throw data_error("missing value in column '" + col + "' at data row " +
                         std::to_string(row));
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || !std::isfinite(v)) {
        throw data_error("cannot parse '" + s + "' in column '" + col +
                         "' at data row " + std::to_string(row));
    }
    return v;
}

long parse_int(const std::string& s, const std::string& col, std::size_t row) {
    const double v = parse_double(s, col, row);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9) {
        throw data_error("column '" + col + "' must be integer-valued, got '" + s +
                         "' at data row " + std::to_string(row));
    }
    return static_cast<long>(r);
}

}  // namespace

TrialDataset load_csv(const std::string& path, const CsvSpec& spec) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    if (!spec.level_order.empty() && spec.declared_levels &&
        *spec.declared_levels != static_cast<int>(spec.level_order.size())) {
        throw data_error("declared level count disagrees with the level order list");
    }

    std::string line;
    if (!std::getline(in, line)) throw data_error("'" + path + "' is empty");
    const std::vector<std::string> header = split_line(line);

    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw data_error("column '" + name + "' not found in '" + path + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t yc = column(spec.outcome);
    const std::size_t zc = column(spec.treatment);
    std::vector<std::size_t> xc;
    for (const auto& name : spec.covariates) xc.push_back(column(name));

    std::vector<long> y_raw;
    std::vector<std::string> y_label;
    std::vector<int> z;
    std::vector<std::vector<double>> x_rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_line(line);
        if (f.size() != header.size()) {
            throw data_error("data row " + std::to_string(row) + " has " +
                             std::to_string(f.size()) + " fields, expected " +
                             std::to_string(header.size()));
        }
        const long zv = parse_int(f[zc], spec.treatment, row);
        if (zv != 0 && zv != 1) {
            throw data_error("treatment column '" + spec.treatment +
                             "' must contain 0/1, got '" + f[zc] + "' at data row " +
                             std::to_string(row));
        }
        z.push_back(static_cast<int>(zv));
        if (!spec.level_order.empty()) {
            if (is_missing(f[yc])) {
                throw data_error("missing value in column '" + spec.outcome +
                                 "' at data row " + std::to_string(row));
            }
            y_label.push_back(f[yc]);
        } else {
            y_raw.push_back(parse_int(f[yc], spec.outcome, row));
        }
        std::vector<double> xr(xc.size());
        for (std::size_t k = 0; k < xc.size(); ++k) {
            xr[k] = parse_double(f[xc[k]], spec.covariates[k], row);
        }
        x_rows.push_back(std::move(xr));
    }
    if (z.empty()) throw data_error("'" + path + "' contains a header but no data rows");

    TrialDataset ds;
    ds.z = std::move(z);
    ds.outcome_name = spec.outcome;
    ds.treatment_name = spec.treatment;
    ds.covariate_names = spec.covariates;
    ds.x.resize(static_cast<Eigen::Index>(x_rows.size()),
                static_cast<Eigen::Index>(xc.size()));
    for (std::size_t i = 0; i < x_rows.size(); ++i) {
        for (std::size_t k = 0; k < xc.size(); ++k) {
            ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x_rows[i][k];
        }
    }

    if (!spec.level_order.empty()) {
        std::map<std::string, int> lev;
        for (std::size_t l = 0; l < spec.level_order.size(); ++l) {
            lev[spec.level_order[l]] = static_cast<int>(l) + 1;
        }
        ds.y.reserve(y_label.size());
        for (std::size_t i = 0; i < y_label.size(); ++i) {
            const auto it = lev.find(y_label[i]);
            if (it == lev.end()) {
                throw data_error("outcome label '" + y_label[i] +
                                 "' is not in the declared level order (data row " +
                                 std::to_string(i + 1) + ")");
            }
            ds.y.push_back(it->second);
        }
        ds.n_levels = static_cast<int>(spec.level_order.size());
        ds.level_labels = spec.level_order;
    } else if (spec.declared_levels) {
        const int L = *spec.declared_levels;
        if (L < 2) throw data_error("the outcome needs at least 2 levels");
        ds.y.reserve(y_raw.size());
        for (std::size_t i = 0; i < y_raw.size(); ++i) {
            if (y_raw[i] < 1 || y_raw[i] > L) {
                throw data_error("outcome value " + std::to_string(y_raw[i]) +
                                 " outside declared range 1.." + std::to_string(L) +
                                 " (data row " + std::to_string(i + 1) + ")");
            }
            ds.y.push_back(static_cast<int>(y_raw[i]));
        }
        ds.n_levels = L;
        for (int l = 1; l <= L; ++l) ds.level_labels.push_back(std::to_string(l));
    } else {
        std::vector<long> distinct(y_raw);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 2) throw data_error("the outcome needs at least 2 levels");
        std::map<long, int> lev;
        for (std::size_t l = 0; l < distinct.size(); ++l) {
            lev[distinct[l]] = static_cast<int>(l) + 1;
            ds.level_labels.push_back(std::to_string(distinct[l]));
        }
        ds.y.reserve(y_raw.size());
        for (long v : y_raw) ds.y.push_back(lev[v]);
        ds.n_levels = static_cast<int>(distinct.size());
    }
    return ds;
}

void write_csv(const TrialDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << ds.outcome_name << ',' << ds.treatment_name;
    for (const auto& name : ds.covariate_names) out << ',' << name;
    out << '\n';
    char buf[32];
    for (int i = 0; i < ds.n(); ++i) {
        out << ds.y[i] << ',' << ds.z[i];
        for (Eigen::Index k = 0; k < ds.x.cols(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.x(i, k));
            out << ',' << buf;
        }
        out << '\n';
    }
}

TrialDataset recode_direction(TrialDataset ds, Direction direction) {
    if (direction == Direction::higher_better) return ds;
    for (int& yi : ds.y) yi = ds.n_levels + 1 - yi;
    std::reverse(ds.level_labels.begin(), ds.level_labels.end());
    ds.reoriented = !ds.reoriented;
    return ds;
}

ValidationReport validate(const TrialDataset& ds) {
    ValidationReport rep;
    rep.n_treated = ds.n_treated();
    rep.n_control = ds.n_control();
    if (ds.n_levels < 2) rep.errors.push_back("the outcome needs at least 2 levels");
    rep.level_counts.assign(static_cast<std::size_t>(std::max(ds.n_levels, 0)), {0, 0});
    for (int i = 0; i < ds.n(); ++i) {
        if (ds.y[i] < 1 || ds.y[i] > ds.n_levels) {
            rep.errors.push_back("outcome value " + std::to_string(ds.y[i]) +
                                 " outside 1.." + std::to_string(ds.n_levels));
            return rep;
        }
        ++rep.level_counts[static_cast<std::size_t>(ds.y[i] - 1)][ds.z[i]];
    }
    if (rep.n_treated == 0) rep.errors.push_back("no treated subjects");
    if (rep.n_control == 0) rep.errors.push_back("no control subjects");
    for (int l = 0; l < ds.n_levels; ++l) {
        const auto& c = rep.level_counts[static_cast<std::size_t>(l)];
        for (int arm = 0; arm < 2; ++arm) {
            if (c[arm] == 0) {
                rep.warnings.push_back("level " + std::to_string(l + 1) +
                                       " unobserved in arm " + std::to_string(arm));
            }
        }
    }
    return rep;
}

}  // namespace winstat
