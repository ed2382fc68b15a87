#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "waistlab/body.hpp"
#include "waistlab/measure.hpp"
#include "waistlab/report.hpp"

namespace waistlab {

using DensityFn = std::function<double(const Eigen::VectorXd&)>;

/// Radial moment r_p(theta) = ((n+p)/phi(0) * int_0^inf phi(r theta) r^{n+p-1} dr)^{1/(n+p)}
/// by adaptive quadrature with tail truncation at 1e-16 of the running peak.
double radial_moment(const DensityFn& density, int dim, const Eigen::VectorXd& theta, double p,
                     double quad_tol = 1e-10);

/// Star body with radial function r_2 of an even log-concave density;
/// membership queries off the direction table run the quadrature on demand
/// (cached, single-writer).
class RadialBody {
public:
    int dim() const;
    double radial(const Eigen::VectorXd& theta) const;
    bool contains(const Eigen::VectorXd& x) const;
    double max_table_radius() const;
    const Eigen::MatrixXd& directions() const;
    const Eigen::VectorXd& radii() const;

    /// Exportable table form (body description kind radial_table).
    ConvexBody table_body() const;

    /// beta_n * mean_theta radial^n over fresh sampled directions
    /// (exact two-point formula at dim 1).
    MCEstimate volume(std::int64_t direction_budget, std::uint64_t seed) const;

    struct Impl;
    explicit RadialBody(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<Impl> impl_;
};

/// Quasi-uniform direction table: the two endpoints at dim 1, equal angles at
/// dim 2, a Fibonacci lattice at dim 3, seeded uniform directions above.
Eigen::MatrixXd sphere_table(int dim, int count);

/// Ball-type body of an even log-concave probability density (both probed).
RadialBody ball_body(const DensityFn& density, int dim, const Eigen::MatrixXd& direction_table,
                     double quad_tol = 1e-10);

/// Verifies, for the constructed body: (a) the two-sided normalized volume
/// bound 1 <= phi(0) Vol <= ((n+2)!)^{n/(n+2)}/n!, (b) inclusion of the body
/// in the closed support of the density, (c) scalar covariance when the
/// source measure is isotropic.
VerificationReport ball_body_invariants(const RadialBody& body, const DensityFn& density,
                                        bool source_isotropic, std::int64_t budget,
                                        std::uint64_t seed);

}  // namespace waistlab
