#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "winstat/common.hpp"

namespace winstat {

enum class Direction { higher_better, lower_better };

// A two-arm trial with an ordinal outcome.  Outcome levels are 1..n_levels
// with larger levels more favorable; treatment indicators are 0/1.
struct TrialDataset {
    Eigen::MatrixXd x;                        // n x p covariate matrix
    std::vector<int> z;                       // treatment arm per subject
    std::vector<int> y;                       // outcome level per subject
    int n_levels = 0;
    std::vector<std::string> covariate_names;
    std::string outcome_name;
    std::string treatment_name;
    std::vector<std::string> level_labels;    // original labels, worst to best
    bool reoriented = false;                  // outcome scale has been flipped

    int n() const { return static_cast<int>(y.size()); }
    int n_treated() const;
    int n_control() const;
};

// Column selection and outcome coding for CSV ingestion.
struct CsvSpec {
    std::string outcome;
    std::string treatment;
    std::vector<std::string> covariates;
    std::optional<int> declared_levels;     // overrides the inferred level count
    std::vector<std::string> level_order;   // string-coded outcomes, worst to best
};

// Reads a comma-separated file with a header row.  Treatment values must be
// 0 or 1; outcome values must be integers (mapped order-preserving onto
// 1..L when no level count is declared) or labels from spec.level_order.
// Missing or malformed cells raise data_error with the offending location.
TrialDataset load_csv(const std::string& path, const CsvSpec& spec);

// Writes a dataset back out in the same format load_csv accepts.
void write_csv(const TrialDataset& ds, const std::string& path);

// Reorients the outcome so that larger levels are favorable.  With
// lower_better the levels map y -> L+1-y (an involution); with
// higher_better the dataset is returned unchanged.
TrialDataset recode_direction(TrialDataset ds, Direction direction);

struct ValidationReport {
    int n_treated = 0;
    int n_control = 0;
    std::vector<std::array<int, 2>> level_counts;  // per level: {control, treated}
    std::vector<std::string> warnings;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
};

// Structural checks that never throw: arm sizes, per-arm level occupancy.
ValidationReport validate(const TrialDataset& ds);

}  // namespace winstat
