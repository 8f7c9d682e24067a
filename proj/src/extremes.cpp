#include "ethq/extremes.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ethq {

double standard_normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double expected_max_quantile(double d) {
    if (!(d >= 2.0) || !std::isfinite(d)) throw std::invalid_argument("expected_max_quantile: need finite d >= 2");
    if (d == 2.0) return 0.0;
    const double target = 1.0 / d;
    // The tail is tiny near the root for large d; compare logarithms.
    auto f = [&](double x) { return std::log(standard_normal_tail(x)) - std::log(target); };
    double hi = std::max(1.0, std::sqrt(2.0 * std::log(d)));
    while (f(hi) > 0.0) hi *= 2.0;
    std::uintmax_t max_iter = 200;
    const auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); };
    const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, tol, max_iter);
    return 0.5 * (a + b);
}

double quantile_asymptote_log(double d) { return std::sqrt(std::log(d)); }
double quantile_asymptote_2log(double d) { return std::sqrt(2.0 * std::log(d)); }

MaxSampleEstimate monte_carlo_expected_max(std::size_t d, std::size_t repetitions, RngStream& rng) {
    if (d < 2 || repetitions < 2) throw std::invalid_argument("monte_carlo_expected_max: need d >= 2 and >= 2 repetitions");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
        RngStream sub = rng.substream(r);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d; ++i) m = std::max(m, sub.normal());
        sum += m;
        sum_sq += m * m;
    }
    const double n = static_cast<double>(repetitions);
    MaxSampleEstimate est;
    est.mean = sum / n;
    est.std_error = std::sqrt(std::max(sum_sq / n - est.mean * est.mean, 0.0) / (n - 1.0));
    est.quantile = expected_max_quantile(static_cast<double>(d));
    est.centered = est.quantile + std::numbers::egamma / est.quantile;
    return est;
}

ExponentBracket exponent_bracket(const std::vector<std::pair<double, double>>& points) {
    if (points.empty()) throw std::invalid_argument("exponent_bracket: no points");
    double delta = 0.0;
    for (const auto& [S, D] : points) {
        if (!(S > 0.0) || !(D > 0.0)) throw std::invalid_argument("exponent_bracket: need S > 0 and D > 0");
        delta = std::max(delta, std::abs(-std::log(D) / S - 0.5));
    }
    return {0.5 + delta, 0.5 - delta};
}

SuppressionForecast forecast_suppression(double S, double f, std::size_t n_pairs) {
    if (!(S > 0.0)) throw std::invalid_argument("forecast_suppression: need S > 0");
    if (!(f >= 0.0)) throw std::invalid_argument("forecast_suppression: need f >= 0");
    SuppressionForecast fc;
    fc.S = S;
    fc.envelope = f;
    fc.draws = n_pairs > 0 ? static_cast<double>(n_pairs) : std::exp(S);
    fc.x_d = fc.draws >= 2.0 ? expected_max_quantile(fc.draws) : 0.0;
    const double suppression = std::exp(-0.5 * S);
    // R_ii - R_jj is normal with variance 2.
    fc.predicted_D = 0.5 * f * suppression * std::numbers::sqrt2 * fc.x_d;
    fc.leading_form = f * std::sqrt(S) * suppression;
    if (fc.predicted_D > 0.0) fc.bracket = exponent_bracket({{S, fc.predicted_D}});
    return fc;
}

SuppressionFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 paired values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 1e-24 * n * std::max(1.0, mx * mx)) throw std::invalid_argument("linear_fit: degenerate abscissae");
    SuppressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

SuppressionFit fit_suppression_curve(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_suppression_curve: need >= 3 points");
    std::vector<double> x, y;
    for (const auto& [S, D] : points) {
        if (!(S > 0.0) || !(D > 0.0)) throw std::invalid_argument("fit_suppression_curve: need S > 0 and D > 0");
        x.push_back(S);
        y.push_back(std::log(D) - 0.5 * std::log(S));
    }
    return linear_fit(x, y);
}

}  // namespace ethq
