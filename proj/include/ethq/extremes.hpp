// extremes.hpp: expected maxima of Gaussian draws and the resulting
// forecast for how fast reduced eigenstates become indistinguishable.

#pragma once

#include "ethq/qcore.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace ethq {

// 1 - Φ(x) for the standard normal cdf Φ.
double standard_normal_tail(double x);

// x_d with 1 - Φ(x_d) = 1/d, accurate to 1e-12. Requires d >= 2.
double expected_max_quantile(double d);

// The two asymptotic normalizations of x_d: √(log d) and the sharp √(2 log d).
double quantile_asymptote_log(double d);
double quantile_asymptote_2log(double d);

struct MaxSampleEstimate {
    double mean = 0.0;        // Monte Carlo mean of the maximum
    double std_error = 0.0;
    double quantile = 0.0;    // x_d
    double centered = 0.0;    // x_d + γ / x_d, the Gumbel-corrected location
};

MaxSampleEstimate monte_carlo_expected_max(std::size_t d, std::size_t repetitions, RngStream& rng);

// Exponents with e^{-lower S} <= D <= e^{-upper S}; lower >= upper.
struct ExponentBracket {
    double lower = 0.0;  // k
    double upper = 0.0;  // k'
};

// Symmetric bracket about ½ that contains every point: δ = max_s |κ_s - ½|
// with κ_s = -log D_s / S_s, giving (½ + δ, ½ - δ).
ExponentBracket exponent_bracket(const std::vector<std::pair<double, double>>& points);

struct SuppressionForecast {
    double S = 0.0;
    double draws = 0.0;          // number of differences the maximum runs over
    double x_d = 0.0;
    double envelope = 0.0;
    double predicted_D = 0.0;    // ½ f e^{-S/2} √2 x_draws
    double leading_form = 0.0;   // f √S e^{-S/2}
    std::optional<ExponentBracket> bracket;  // absent when predicted_D = 0
};

// n_pairs = 0 uses d = e^S draws.
SuppressionForecast forecast_suppression(double S, double f, std::size_t n_pairs = 0);

struct SuppressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Least squares of log D - ½ log S against S. Needs >= 3 points with
// positive S and D and at least two distinct S.
SuppressionFit fit_suppression_curve(const std::vector<std::pair<double, double>>& points);

// Ordinary least squares y = a + b x; returns (b, a, r²).
SuppressionFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ethq
