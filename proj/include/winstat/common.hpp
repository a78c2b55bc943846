#pragma once

#include <stdexcept>
#include <string>

namespace winstat {

// Malformed input data, failed validation, or bad configuration.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A working model could not be fit or a variance is ill-defined.
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too many replicates failed during a simulation experiment.
struct simulation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Overflow-safe inverse logit.
double expit(double t);

// Log odds; requires p in (0,1).
double logit(double p);

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF; requires p in (0,1).  Accurate to machine
// precision (rational initial guess refined by two Newton steps).
double normal_quantile(double p);

// printf-style formatting into a std::string.
std::string strf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace winstat
