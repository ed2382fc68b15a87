#include "waistlab/specfun.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "waistlab/errors.hpp"

namespace waistlab {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("normal_quantile: p must be in (0,1)");
    return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

double regularized_gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(a, x);
}

double unit_ball_volume(int n) {
    if (n == 0) return 1.0;
    return std::pow(M_PI, 0.5 * n) / boost::math::tgamma(0.5 * n + 1.0);
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol) {
    QuadResult r;
    if (a == b) return r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 14, rel_tol, &r.error_estimate);
    return r;
}

double ray_cutoff(const std::function<double(double)>& g, double scale_hint,
                  double tail_rel) {
    double peak = std::abs(g(0.0));
    double r = std::max(scale_hint, 1e-8);
    double last_positive = 0.0;
    // Walk outward on a geometric grid, tracking the running peak.
    for (int i = 0; i < 400; ++i) {
        double v = std::abs(g(r));
        peak = std::max(peak, v);
        if (v > 0.0) last_positive = r;
        if (peak > 0.0 && v < tail_rel * peak) {
            if (v == 0.0 && last_positive > 0.0) {
                // Compact support: locate the edge so the quadrature interval
                // ends where the integrand does.
                double lo = last_positive, hi = r;
                for (int k = 0; k < 100 && (hi - lo) > 1e-15 * hi; ++k) {
                    double mid = 0.5 * (lo + hi);
                    if (std::abs(g(mid)) > 0.0) lo = mid; else hi = mid;
                }
                return lo;
            }
            return r;
        }
        r *= (i < 60) ? 1.25 : 2.0;
    }
    throw NumericError("ray_cutoff: integrand does not decay along the ray");
}

}  // namespace waistlab
