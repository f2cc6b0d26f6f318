#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"

#include "feg/error.hpp"
#include "feg/stats.hpp"

using namespace feg;
using namespace feg::stats;

namespace {

using D = std::vector<double>;

// Normal-equation least squares in long double with Gauss-Jordan
// elimination. Returns coefficients and conventional standard errors.
struct RefFit {
    std::vector<long double> beta;
    std::vector<long double> se;
};

RefFit ref_ols(const std::vector<D>& cols, const D& y) {
    const std::size_t n = y.size(), p = cols.size() + 1;
    auto x = [&](std::size_t i, std::size_t c) -> long double { return c == 0 ? 1.0L : cols[c - 1][i]; };
    std::vector<std::vector<long double>> a(p, std::vector<long double>(2 * p, 0));
    std::vector<long double> xty(p, 0);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c)
            for (std::size_t i = 0; i < n; ++i) a[r][c] += x(i, r) * x(i, c);
        a[r][p + r] = 1;
        for (std::size_t i = 0; i < n; ++i) xty[r] += x(i, r) * y[i];
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c; r < p; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        const long double d = a[c][c];
        for (auto& v : a[c]) v /= d;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const long double f = a[r][c];
            for (std::size_t k = 0; k < 2 * p; ++k) a[r][k] -= f * a[c][k];
        }
    }
    RefFit out;
    out.beta.assign(p, 0);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) out.beta[r] += a[r][p + c] * xty[c];
    long double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        long double f = 0;
        for (std::size_t c = 0; c < p; ++c) f += x(i, c) * out.beta[c];
        rss += (y[i] - f) * (y[i] - f);
    }
    const long double s2 = rss / static_cast<long double>(n - p);
    for (std::size_t c = 0; c < p; ++c) out.se.push_back(std::sqrt(s2 * a[c][p + c]));
    return out;
}

}  // namespace

TEST_CASE("pearson") {
    const D x{1, 2, 3, 4, 5};
    D neg;
    for (double v : x) neg.push_back(-v);
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(pearson(D{1, 2, 3}, D{1, 2, 4}) - 0.9819805060619657) < 1e-12);
    CHECK_THROWS_AS(pearson(D{1, 1, 1}, D{1, 2, 3}), UndefinedError);
    CHECK_THROWS_AS(pearson(D{1, 2}, D{1, 2, 3}), UsageError);
    CHECK_THROWS_AS(pearson(D{1}, D{1}), UsageError);
}

TEST_CASE("pearson is invariant under positive affine maps and matches the reference") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n01(0, 1);
    for (int round = 0; round < 200; ++round) {
        D x(3 + round % 40), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = n01(rng);
            y[i] = 0.3 * x[i] + n01(rng);
        }
        const double r = pearson(x, y);
        CHECK(std::abs(r - oracle::ref_pearson(x, y)) < 1e-10);
        D ax = x, by = y;
        for (auto& v : ax) v = 3.0 * v + 11.0;
        for (auto& v : by) v = 0.25 * v - 2.0;
        CHECK(std::abs(pearson(ax, by) - r) < 1e-12);
    }
}

TEST_CASE("welch_t") {
    const auto r = welch_t(D{1, 2, 3, 4}, D{2, 4, 6, 8});
    CHECK(std::abs(r.t - -1.7320508075688772) < 1e-12);
    CHECK(std::abs(r.df - 4.411764705882353) < 1e-12);
    const auto same = welch_t(D{1, 5, 2}, D{1, 5, 2});
    CHECK(same.t == 0.0);
    const auto swapped = welch_t(D{2, 4, 6, 8}, D{1, 2, 3, 4});
    CHECK(swapped.t == -r.t);
    CHECK(swapped.df == r.df);
    CHECK_THROWS_AS(welch_t(D{1, 1}, D{2, 2}), UndefinedError);
    CHECK_THROWS_AS(welch_t(D{1}, D{2, 3}), UsageError);
    CHECK_NOTHROW(welch_t(D{1, 1}, D{2, 3}));
}

TEST_CASE("welch_t matches the reference on random samples") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> n01(0, 1);
    for (int round = 0; round < 200; ++round) {
        D a(2 + round % 17), b(2 + (round * 7) % 23);
        for (auto& v : a) v = n01(rng);
        for (auto& v : b) v = 0.5 + 2 * n01(rng);
        const auto got = welch_t(a, b);
        const auto [t, df] = oracle::ref_welch(a, b);
        CHECK(std::abs(got.t - t) < 1e-10 * std::max(1.0, std::abs(t)));
        CHECK(std::abs(got.df - df) < 1e-10 * std::max(1.0, df));
        const auto back = welch_t(b, a);
        CHECK(back.t == -got.t);
        CHECK(back.df == got.df);
    }
}

TEST_CASE("quantile_bins") {
    SUBCASE("distinct values") {
        const D v{9, 3, 7, 1, 0, 5, 8, 2, 6, 4};
        const auto b = quantile_bins(v, 10);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(b[i] == static_cast<int>(v[i]));
    }
    SUBCASE("ties follow input order") {
        const D v(100, 1.0);
        const auto b = quantile_bins(v, 10);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(b[i] == static_cast<int>(i / 10));
    }
    SUBCASE("uneven sizes") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n01(0, 1);
        for (std::size_t n : {23u, 11u, 10u, 99u, 101u}) {
            D v(n);
            for (auto& x : v) x = n01(rng);
            const auto b = quantile_bins(v, 10);
            std::vector<std::size_t> size(10, 0);
            for (int x : b) ++size[static_cast<std::size_t>(x)];
            const auto [lo, hi] = std::minmax_element(size.begin(), size.end());
            CHECK(*hi - *lo <= 1);
            if (n == 23) {
                for (auto s : size) CHECK((s == 2 || s == 3));
            }
            // Rank formula check: element at rank r lands in floor(r * q / n).
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return v[x] < v[y]; });
            for (std::size_t r = 0; r < n; ++r) CHECK(b[order[r]] == static_cast<int>(r * 10 / n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (v[i] < v[j]) CHECK(b[i] <= b[j]);
        }
    }
    CHECK_THROWS_AS(quantile_bins(D{1, 2, 3}, 10), UsageError);
    CHECK_THROWS_AS(quantile_bins(D{1, 2, 3}, 1), UsageError);
}

TEST_CASE("prevalence ratios") {
    SUBCASE("no signal") {
        std::unique_ptr<bool[]> flags(new bool[100]);
        D index;
        for (int i = 0; i < 100; ++i) {
            index.push_back(i);
            flags[i] = i % 10 == 0;
        }
        const auto r = prevalence_ratio(std::span<const bool>(flags.get(), 100), index);
        CHECK(r.ratio == std::optional<double>(1.0));
    }
    SUBCASE("planted word, 20% in the upper half and 5% in the lower half") {
        const std::size_t n = 2000;
        std::unique_ptr<bool[]> flags(new bool[n]);
        D index(n);
        for (std::size_t i = 0; i < n; ++i) {
            index[i] = static_cast<double>(i) / n;
            const bool upper = i >= n / 2;
            flags[i] = upper ? (i % 5 == 0) : (i % 20 == 0);
        }
        // Construct-and-count: 200 hits among 1000 upper, 50 among 1000 lower.
        const auto r = prevalence_ratio(std::span<const bool>(flags.get(), n), index);
        CHECK(r.n_lower == 1000);
        CHECK(r.n_upper == 1000);
        CHECK(r.prevalence_upper == 0.2);
        CHECK(r.prevalence_lower == 0.05);
        CHECK(*r.ratio == doctest::Approx(4.0).epsilon(1e-12));

        const auto bins = prevalence_by_bin(std::span<const bool>(flags.get(), n), index, 10);
        REQUIRE(bins.size() == 10);
        CHECK(bins[0].prevalence == 0.05);
        CHECK(bins[9].prevalence == 0.2);
        CHECK(bins[9].ci_low < 0.2);
        CHECK(bins[9].ci_high > 0.2);
        const double half = 1.959963984540054 * std::sqrt(0.2 * 0.8 / 200);
        CHECK(bins[9].ci_high - 0.2 == doctest::Approx(half));
    }
    SUBCASE("zero lower prevalence") {
        bool flags[4] = {false, false, true, true};
        const auto r = prevalence_ratio(std::span<const bool>(flags, 4), D{1, 2, 3, 4});
        CHECK_FALSE(r.ratio.has_value());
        CHECK(r.prevalence_upper == 1.0);
    }
}

TEST_CASE("ols exact fit") {
    Columns data{{"x", {0, 1, 2, 3, 4, 5}}, {"y", {1, 3, 5, 7, 9, 11}}};
    const auto r = ols_fit(data, {"y", {"x"}, {}, {}, std::nullopt});
    CHECK(std::abs(r.coefficient("x").estimate - 2.0) < 1e-8);
    CHECK(std::abs(r.coefficient("(intercept)").estimate - 1.0) < 1e-8);
    CHECK(std::abs(r.r2 - 1.0) < 1e-8);
    CHECK(r.coefficients.front().name == "(intercept)");
}

TEST_CASE("ols recovers a planted model") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0, 0.01);
    std::uniform_real_distribution<double> u(1, 200);
    Columns data;
    auto& refs = data["refs"];
    auto& cites = data["cites"];
    auto& y = data["y"];
    for (int i = 0; i < 10000; ++i) {
        refs.push_back(std::round(u(rng)));
        cites.push_back(std::round(u(rng)));
        y.push_back(0.5 * std::log(refs.back()) - 0.2 * std::log(cites.back()) + noise(rng));
    }
    const auto r = ols_fit(data, {"y", {"refs", "cites"}, {"refs", "cites"}, {}, std::nullopt});
    CHECK(std::abs(r.coefficient("refs").estimate - 0.5) < 0.01);
    CHECK(std::abs(r.coefficient("cites").estimate + 0.2) < 0.01);
    CHECK(r.adjusted_r2 <= r.r2);
    CHECK(r.coefficient("refs").stars() == "***");

    // Residuals orthogonal to every regressor.
    for (const auto& col : r.design) {
        double dot = 0, norm = 0;
        for (std::size_t i = 0; i < col.size(); ++i) {
            dot += col[i] * r.residuals[i];
            norm += col[i] * col[i];
        }
        CHECK(std::abs(dot) < 1e-6 * std::sqrt(norm));
    }
}

TEST_CASE("standardized simple regression slope equals pearson") {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> n01(0, 1);
    Columns data;
    for (int i = 0; i < 500; ++i) {
        data["x"].push_back(n01(rng));
        data["y"].push_back(0.4 * data["x"].back() + n01(rng));
    }
    const auto r = ols_fit(data, {"y", {"x"}, {}, {"x", "y"}, std::nullopt});
    CHECK(std::abs(r.coefficient("x").estimate - pearson(data["x"], data["y"])) < 1e-10);
    CHECK(std::abs(r.coefficient("(intercept)").estimate) < 1e-10);
}

TEST_CASE("ols estimates and standard errors match normal equations") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> n01(0, 1);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 30 + round * 5;
        Columns data;
        std::vector<D> cols(3, D(n));
        D y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& c : cols) c[i] = n01(rng);
            y[i] = 1 + cols[0][i] - 2 * cols[1][i] + 0.5 * cols[2][i] + n01(rng);
        }
        data["a"] = cols[0];
        data["b"] = cols[1];
        data["c"] = cols[2];
        data["y"] = y;
        const auto r = ols_fit(data, {"y", {"a", "b", "c"}, {}, {}, std::nullopt});
        const auto ref = ref_ols(cols, y);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(std::abs(r.coefficients[c].estimate - static_cast<double>(ref.beta[c])) < 1e-10);
            CHECK(std::abs(r.coefficients[c].std_error - static_cast<double>(ref.se[c])) < 1e-10);
            CHECK(r.coefficients[c].std_error >= 0.0);
        }
    }
}

TEST_CASE("year fixed effects") {
    Columns data;
    std::mt19937_64 rng(34);
    std::normal_distribution<double> n01(0, 0.001);
    const double effect[3] = {0.0, 1.5, -0.7};
    for (int i = 0; i < 300; ++i) {
        const int year = 2000 + i % 3;
        const double x = (i * 37 % 101) / 10.0;
        data["year"].push_back(year);
        data["x"].push_back(x);
        data["y"].push_back(2 + 0.3 * x + effect[i % 3] + n01(rng));
    }
    const auto r = ols_fit(data, {"y", {"x"}, {}, {}, std::string("year")});
    CHECK(r.coefficients.size() == 4);
    CHECK_THROWS_AS(r.coefficient("year=2000"), NotFoundError);
    CHECK(r.coefficient("year=2001").estimate == doctest::Approx(1.5).epsilon(1e-3));
    CHECK(r.coefficient("year=2002").estimate == doctest::Approx(-0.7).epsilon(1e-3));
    CHECK(r.coefficient("x").estimate == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("ols errors") {
    Columns data{{"x", {1, 2, 3, 4}}, {"x2", {2, 4, 6, 8}}, {"y", {1, 2, 2, 5}}, {"z", {0, 1, 2, 3}}};
    try {
        ols_fit(data, {"y", {"x", "x2"}, {}, {}, std::nullopt});
        FAIL("expected rank deficiency");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("collinear") != std::string::npos);
        CHECK((what.find("x2") != std::string::npos || what.find("x,") != std::string::npos));
    }
    CHECK_THROWS_AS(ols_fit(data, {"y", {"y"}, {}, {}, std::nullopt}), UsageError);
    CHECK_THROWS_AS(ols_fit(data, {"y", {"nope"}, {}, {}, std::nullopt}), DataError);
    CHECK_THROWS_AS(ols_fit(data, {"y", {"z"}, {"z"}, {}, std::nullopt}), DataError);
    CHECK_THROWS_AS(ols_fit(data, {"y", {"x", "x2", "z"}, {}, {}, std::nullopt}), DataError);
}

TEST_CASE("mean and variance") {
    CHECK(mean(D{1, 2, 3, 4}) == 2.5);
    CHECK(sample_variance(D{1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0));
}
