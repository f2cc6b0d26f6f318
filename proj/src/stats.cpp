#include "feg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "feg/error.hpp"

namespace feg::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw UsageError("mean of an empty series");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw UsageError("sample variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("pearson: series lengths differ");
    if (x.size() < 2) throw UsageError("pearson: need at least two observations");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedError("degenerate series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw UsageError("welch_t: each sample needs at least two values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    if (va == 0.0 && vb == 0.0) throw UndefinedError("degenerate variance");
    WelchResult r;
    r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    return r;
}

std::vector<int> quantile_bins(std::span<const double> values, int q) {
    if (q < 2) throw UsageError("quantile_bins: q must be >= 2");
    if (values.size() < static_cast<std::size_t>(q)) throw UsageError("quantile_bins: fewer values than bins");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> bins(values.size());
    const std::size_t n = values.size();
    for (std::size_t rank = 0; rank < n; ++rank)
        bins[order[rank]] = static_cast<int>(rank * static_cast<std::size_t>(q) / n);
    return bins;
}

TwoWayPrevalence prevalence_ratio_groups(std::span<const bool> flags, std::span<const bool> upper) {
    if (flags.size() != upper.size()) throw UsageError("prevalence: series lengths differ");
    TwoWayPrevalence r;
    std::size_t hits_lower = 0, hits_upper = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (upper[i]) {
            ++r.n_upper;
            hits_upper += flags[i];
        } else {
            ++r.n_lower;
            hits_lower += flags[i];
        }
    }
    if (r.n_lower == 0 || r.n_upper == 0) throw UsageError("prevalence: both groups must be nonempty");
    r.prevalence_lower = static_cast<double>(hits_lower) / static_cast<double>(r.n_lower);
    r.prevalence_upper = static_cast<double>(hits_upper) / static_cast<double>(r.n_upper);
    if (r.prevalence_lower > 0.0) r.ratio = r.prevalence_upper / r.prevalence_lower;
    return r;
}

TwoWayPrevalence prevalence_ratio(std::span<const bool> flags, std::span<const double> index) {
    if (flags.size() != index.size()) throw UsageError("prevalence: series lengths differ");
    const auto bins = quantile_bins(index, 2);
    // std::vector<bool> is not contiguous, so spans need a plain array.
    std::unique_ptr<bool[]> upper(new bool[bins.size()]);
    for (std::size_t i = 0; i < bins.size(); ++i) upper[i] = bins[i] == 1;
    return prevalence_ratio_groups(flags, std::span<const bool>(upper.get(), bins.size()));
}

std::vector<BinPrevalence> prevalence_by_bin(std::span<const bool> flags, std::span<const double> index, int q) {
    if (flags.size() != index.size()) throw UsageError("prevalence: series lengths differ");
    const auto bins = quantile_bins(index, q);
    std::vector<BinPrevalence> out(static_cast<std::size_t>(q));
    for (int b = 0; b < q; ++b) out[static_cast<std::size_t>(b)].bin = b;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        auto& slot = out[static_cast<std::size_t>(bins[i])];
        ++slot.n;
        slot.hits += flags[i];
    }
    for (auto& slot : out) {
        const double n = static_cast<double>(slot.n);
        slot.prevalence = static_cast<double>(slot.hits) / n;
        const double half = 1.959963984540054 * std::sqrt(slot.prevalence * (1.0 - slot.prevalence) / n);
        slot.ci_low = std::max(0.0, slot.prevalence - half);
        slot.ci_high = std::min(1.0, slot.prevalence + half);
    }
    return out;
}

std::string OlsCoefficient::stars() const {
    if (p_value < 0.001) return "***";
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    return "";
}

const OlsCoefficient& OlsResult::coefficient(const std::string& name) const {
    for (const auto& c : coefficients)
        if (c.name == name) return c;
    throw NotFoundError("no coefficient named '" + name + "'");
}

namespace {

bool listed(const std::vector<std::string>& names, const std::string& name) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<double> transformed(const Columns& data, const std::string& name, const OlsSpec& spec) {
    auto it = data.find(name);
    if (it == data.end()) throw DataError("ols: unknown column '" + name + "'");
    std::vector<double> col = it->second;
    for (double v : col)
        if (!std::isfinite(v)) throw DataError("ols: column '" + name + "' has non-finite values");
    if (listed(spec.log_transform, name)) {
        for (double& v : col) {
            if (!(v > 0.0)) throw DataError("ols: log-transformed column '" + name + "' must be strictly positive");
            v = std::log(v);
        }
    }
    if (listed(spec.standardize, name)) {
        const double m = mean(col);
        const double sd = std::sqrt(sample_variance(col));
        if (sd == 0.0) throw DataError("ols: cannot standardize constant column '" + name + "'");
        for (double& v : col) v = (v - m) / sd;
    }
    return col;
}

}  // namespace

OlsResult ols_fit(const Columns& data, const OlsSpec& spec) {
    if (listed(spec.predictors, spec.response)) throw UsageError("ols: response listed among predictors");
    const std::vector<double> y = transformed(data, spec.response, spec);
    const std::size_t n = y.size();

    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    for (const auto& p : spec.predictors) {
        names.push_back(p);
        cols.push_back(transformed(data, p, spec));
        if (cols.back().size() != n) throw DataError("ols: column '" + p + "' has a different length");
    }
    if (spec.year_fixed_effects) {
        auto it = data.find(*spec.year_fixed_effects);
        if (it == data.end()) throw DataError("ols: unknown fixed-effect column '" + *spec.year_fixed_effects + "'");
        const auto& years = it->second;
        if (years.size() != n) throw DataError("ols: fixed-effect column has a different length");
        std::set<long long> levels;
        for (double v : years) levels.insert(std::llround(v));
        bool first = true;
        for (long long level : levels) {
            if (first) {
                first = false;
                continue;
            }
            std::vector<double> dummy(n);
            for (std::size_t i = 0; i < n; ++i) dummy[i] = std::llround(years[i]) == level ? 1.0 : 0.0;
            names.push_back(*spec.year_fixed_effects + "=" + std::to_string(level));
            cols.push_back(std::move(dummy));
        }
    }

    const std::size_t p = cols.size() + 1;
    if (n <= p) throw DataError("ols: need more observations (" + std::to_string(n) + ") than parameters (" +
                                std::to_string(p) + ")");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        X(r, 0) = 1.0;
        for (std::size_t c = 0; c < cols.size(); ++c) X(r, static_cast<Eigen::Index>(c + 1)) = cols[c][i];
        Y(r) = y[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < p) {
        std::string which;
        const auto& perm = qr.colsPermutation().indices();
        const auto name_of = [&](Eigen::Index k) {
            const auto col = static_cast<std::size_t>(perm(k));
            return col == 0 ? std::string("(intercept)") : names[col - 1];
        };
        // Each dropped pivot column is a combination of the kept ones; name
        // every column that takes part.
        const auto r = static_cast<Eigen::Index>(rank);
        const Eigen::MatrixXd R = qr.matrixQR().topRows(static_cast<Eigen::Index>(p)).triangularView<Eigen::Upper>();
        std::vector<std::string> bad;
        for (auto k = r; k < static_cast<Eigen::Index>(p); ++k) {
            bad.push_back(name_of(k));
            if (r == 0) continue;
            const Eigen::VectorXd c =
                R.topLeftCorner(r, r).triangularView<Eigen::Upper>().solve(R.block(0, k, r, 1));
            const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
            for (Eigen::Index j = 0; j < r; ++j)
                if (std::abs(c(j)) > 1e-8 * scale) bad.push_back(name_of(j));
        }
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        for (const auto& b : bad) which += (which.empty() ? "" : ", ") + b;
        throw DataError("ols: design matrix is rank deficient; collinear columns: " + which);
    }

    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd resid = Y - X * beta;
    const double rss = resid.squaredNorm();
    const double ybar = Y.mean();
    const double tss = (Y.array() - ybar).square().sum();

    OlsResult out;
    out.n_observations = n;
    out.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    const double regressors = static_cast<double>(p - 1);
    out.adjusted_r2 = 1.0 - (1.0 - out.r2) * (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - regressors - 1.0);

    // cov(beta) = sigma^2 (X'X)^-1 = sigma^2 P R^-1 R^-T P'
    const double dof = static_cast<double>(n - p);
    const double sigma2 = rss / dof;
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))
                                  .triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    const Eigen::VectorXd diag_perm = (Rinv * Rinv.transpose()).diagonal();
    Eigen::VectorXd diag(static_cast<Eigen::Index>(p));
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(p); ++k) diag(perm(k)) = diag_perm(k);

    boost::math::students_t dist(dof);
    for (std::size_t c = 0; c < p; ++c) {
        OlsCoefficient coef;
        coef.name = c == 0 ? "(intercept)" : names[c - 1];
        coef.estimate = beta(static_cast<Eigen::Index>(c));
        coef.std_error = std::sqrt(std::max(0.0, sigma2 * diag(static_cast<Eigen::Index>(c))));
        if (coef.std_error > 0.0) {
            coef.t = coef.estimate / coef.std_error;
            coef.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(coef.t)));
        } else {
            coef.t = coef.estimate == 0.0 ? 0.0 : std::copysign(INFINITY, coef.estimate);
            coef.p_value = coef.estimate == 0.0 ? 1.0 : 0.0;
        }
        out.coefficients.push_back(std::move(coef));
    }
    out.residuals.assign(resid.data(), resid.data() + resid.size());
    out.design_columns = names;
    out.design = std::move(cols);
    return out;
}

}  // namespace feg::stats
