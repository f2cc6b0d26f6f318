#pragma once
// Statistics used by the analyses: correlation, Welch's t-test, quantile
// binning, word-prevalence ratios and OLS with year fixed effects.
//
// Sample (n - 1) variances throughout; z-scores use the sample sd.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace feg::stats {

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

// Throws UndefinedError("degenerate series") when either side has zero
// variance; UsageError on length mismatch or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
};

WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// Bin index per element. Elements are ordered by (value, position) so ties
// follow input order; the element at rank r lands in bin floor(r * q / n).
std::vector<int> quantile_bins(std::span<const double> values, int q);

struct TwoWayPrevalence {
    std::size_t n_lower = 0;
    std::size_t n_upper = 0;
    double prevalence_lower = 0.0;
    double prevalence_upper = 0.0;
    std::optional<double> ratio;  // undefined when the lower prevalence is 0
};

// Splits elements into two equal halves by `index` and compares how often
// `flags` holds in the upper half versus the lower half.
TwoWayPrevalence prevalence_ratio(std::span<const bool> flags, std::span<const double> index);

// Same, for an explicit group split (true = upper group).
TwoWayPrevalence prevalence_ratio_groups(std::span<const bool> flags, std::span<const bool> upper);

struct BinPrevalence {
    int bin = 0;
    std::size_t n = 0;
    std::size_t hits = 0;
    double prevalence = 0.0;
    double ci_low = 0.0;   // normal-approximation 95% interval
    double ci_high = 0.0;
};

std::vector<BinPrevalence> prevalence_by_bin(std::span<const bool> flags, std::span<const double> index, int q = 10);

using Columns = std::map<std::string, std::vector<double>>;

struct OlsSpec {
    std::string response;
    std::vector<std::string> predictors;
    std::vector<std::string> log_transform;  // natural log, applied first
    std::vector<std::string> standardize;    // z-score, applied after logs
    // Indicator columns for every distinct value of this column except the
    // earliest (the reference level).
    std::optional<std::string> year_fixed_effects;
};

struct OlsCoefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t = 0.0;
    double p_value = 1.0;

    // "*", "**", "***" at p < 0.05 / 0.01 / 0.001.
    std::string stars() const;
};

struct OlsResult {
    std::vector<OlsCoefficient> coefficients;  // "(intercept)" first
    std::size_t n_observations = 0;
    double r2 = 0.0;
    double adjusted_r2 = 0.0;
    std::vector<double> residuals;
    std::vector<std::string> design_columns;
    std::vector<std::vector<double>> design;  // column-major copy of the regressors (excl. intercept)

    const OlsCoefficient& coefficient(const std::string& name) const;
};

// Householder QR with column pivoting. Throws DataError naming the
// collinear columns when the design is rank deficient, and on invalid specs.
OlsResult ols_fit(const Columns& data, const OlsSpec& spec);

}  // namespace feg::stats
