// Test-side oracles, independent of the library's numeric paths. Expected
// values in the suites are either computed here (brute force, quadrature,
// closed forms) or frozen from these routines.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Adaptive Simpson quadrature (independent of the core Gauss-Kronrod path).
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

inline double normal_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// gamma_1([-r, r])
inline double gauss_interval(double r) { return std::erf(r / std::sqrt(2.0)); }

// gamma_2 of the centered radius-r disk
inline double gauss_disk(double r) { return 1.0 - std::exp(-0.5 * r * r); }

// Incircle of a triangle: radius = area / semiperimeter, center on the
// angle bisectors; specialized to the right triangle (0,0),(1,0),(0,1).
inline double right_triangle_inradius() {
    double area = 0.5;
    double semi = (1.0 + 1.0 + std::sqrt(2.0)) / 2.0;
    return area / semi;  // = (2 - sqrt 2)/2
}

// Maximal-volume inscribed ellipse of a triangle: the Steiner inellipse
// (center = centroid, foci = roots of p' for p = prod (z - z_k), Marden).
// Returns {semi_major, semi_minor} and writes the centroid.
inline std::pair<double, double> steiner_inellipse_axes(const std::complex<double>& z1,
                                                        const std::complex<double>& z2,
                                                        const std::complex<double>& z3,
                                                        std::complex<double>* center) {
    std::complex<double> g = (z1 + z2 + z3) / 3.0;
    if (center) *center = g;
    // p'(z) = 3z^2 - 2(z1+z2+z3) z + (z1 z2 + z1 z3 + z2 z3)
    std::complex<double> s1 = z1 + z2 + z3;
    std::complex<double> s2 = z1 * z2 + z1 * z3 + z2 * z3;
    std::complex<double> disc = std::sqrt(s1 * s1 - 3.0 * s2);
    std::complex<double> f1 = (s1 + disc) / 3.0;
    double c = std::abs(f1 - g);  // focal half-distance
    double tri_area =
        0.5 * std::abs((z2 - z1).real() * (z3 - z1).imag() - (z2 - z1).imag() * (z3 - z1).real());
    double ab = tri_area / (3.0 * std::sqrt(3.0));  // ellipse area / pi
    // a^2 - b^2 = c^2 and a b = ab
    double a2 = 0.5 * (c * c + std::sqrt(c * c * c * c + 4.0 * ab * ab));
    return {std::sqrt(a2), ab / std::sqrt(a2)};
}

// Brute-force: min over lines in the plane of the max distance from the
// square [-1,1]^2 (its corners realize the max for any line).
inline double square_line_fit_minmax() {
    double best = 1e9;
    std::vector<Eigen::Vector2d> corners = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int ai = 0; ai < 720; ++ai) {
        double ang = M_PI * ai / 720.0;
        Eigen::Vector2d n(std::cos(ang), std::sin(ang));
        for (int oi = -200; oi <= 200; ++oi) {
            double c = oi / 100.0;
            double worst = 0.0;
            for (const auto& p : corners) worst = std::max(worst, std::abs(n.dot(p) - c));
            best = std::min(best, worst);
        }
    }
    return best;
}

// Exact absolute moment of the uniform measure on [-1,1]: E|x|^p = 1/(p+1).
inline double uniform_abs_moment(double p) { return 1.0 / (p + 1.0); }

// Exact absolute moment of the standard normal: E|Z|^p = 2^{p/2} G((p+1)/2)/sqrt(pi).
inline double gaussian_abs_moment(double p) {
    return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(M_PI);
}

// Area of {|x_1| <= a} inside the unit disk.
inline double disk_slab_area(double a) {
    if (a >= 1.0) return M_PI;
    return 2.0 * (a * std::sqrt(1.0 - a * a) + std::asin(a));
}

// Convex polygon clipping by the half-plane n.x <= c (Sutherland-Hodgman).
inline std::vector<Eigen::Vector2d> clip_halfplane(const std::vector<Eigen::Vector2d>& poly,
                                                   const Eigen::Vector2d& n, double c) {
    std::vector<Eigen::Vector2d> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % m];
        double dp = n.dot(p) - c, dq = n.dot(q) - c;
        if (dp <= 0) out.push_back(p);
        if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
            double t = dp / (dp - dq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

inline double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(a);
}

// Exact covariance entries of the uniform measure on conv{0, e1, e2}.
inline Eigen::Matrix2d triangle_covariance() {
    // second moments about the barycenter (1/3, 1/3)
    Eigen::Matrix2d c;
    c << 1.0 / 18.0, -1.0 / 36.0, -1.0 / 36.0, 1.0 / 18.0;
    return c;
}

}  // namespace oracle
