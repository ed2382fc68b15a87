#pragma once

#include <cmath>
#include <functional>

namespace waistlab {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal density.
inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

/// Inverse of normal_cdf, accurate to full double precision.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Gaussian measure of the centered radius-r ball in dimension ell.
inline double gaussian_ball_measure(int ell, double r) {
    if (r <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * ell, 0.5 * r * r);
}

/// Volume of the Euclidean unit ball in dimension n.
double unit_ball_volume(int n);

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b].
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10);

/// Upper cutoff for integrating g over [0, inf): smallest radius beyond which
/// g stays below tail_rel times its running peak. Expects g to eventually
/// decay (log-concave tails do). A jump of g to exactly zero (compact
/// support) is located by bisection so the integrand stays smooth on the
/// returned interval.
double ray_cutoff(const std::function<double(double)>& g, double scale_hint = 1.0,
                  double tail_rel = 1e-16);

}  // namespace waistlab
