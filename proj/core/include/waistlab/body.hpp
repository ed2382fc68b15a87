#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "waistlab/errors.hpp"

namespace waistlab {

enum class BodyKind {
    Ball,          // centered at the origin, one radius
    Box,           // origin-centered, per-axis half-widths
    HPolytope,     // rows a_i, offsets b_i: a_i . x <= b_i
    Ellipsoid,     // (x-c)' M^{-1} (x-c) <= 1, M SPD
    Intersection,  // finite intersection of bodies
    LinearImage,   // A(K), A invertible
    Translate,     // K + v
    RadialTable,   // star body from a tabulated radial function (reload form)
};

/// Convex body described through exact geometric oracles. All downstream
/// estimators consume only contains / gauge / support, so representations can
/// be composed freely. Values are cheap to copy (shared immutable state).
class ConvexBody {
public:
    static ConvexBody ball(int dim, double radius);
    static ConvexBody box(const Eigen::VectorXd& half_widths);
    static ConvexBody h_polytope(const Eigen::MatrixXd& normals, const Eigen::VectorXd& offsets,
                                 std::optional<double> bounding_radius = std::nullopt);
    static ConvexBody ellipsoid(const Eigen::MatrixXd& shape, const Eigen::VectorXd& center);
    static ConvexBody intersection(std::vector<ConvexBody> parts);
    static ConvexBody linear_image(ConvexBody base, const Eigen::MatrixXd& map);
    static ConvexBody translate(ConvexBody base, const Eigen::VectorXd& shift);
    static ConvexBody radial_table(const Eigen::MatrixXd& directions, const Eigen::VectorXd& radii,
                                   bool symmetric, std::optional<double> bounding_radius = std::nullopt);

    int dim() const;
    BodyKind kind() const;

    /// Valid enclosing radius: K is contained in the centered ball of this radius.
    double bounding_radius() const;

    bool contains(const Eigen::VectorXd& x) const;

    /// Minkowski functional inf{ l > 0 : x/l in K }. Requires the origin in
    /// the interior. Closed form for ball/box/centered ellipsoid/h-polytope,
    /// exact composition for intersection and linear images, bisection to
    /// relative 1e-12 otherwise.
    double gauge(const Eigen::VectorXd& x) const;

    /// Support function sup_{x in K} <x, u>. Exact for all kinds except
    /// Intersection (certified numeric lower estimate) and RadialTable
    /// (table hull).
    double support(const Eigen::VectorXd& u) const;

    /// Cheap certified upper bound on the support function (for proposal
    /// regions); coincides with support() for exact kinds.
    double support_upper_bound(const Eigen::VectorXd& u) const;

    /// Axis-aligned bounding interval [lo_i, hi_i] per coordinate (certified).
    void bounding_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;

    /// True when the kind is structurally origin-symmetric.
    bool centrally_symmetric() const;

    /// Membership of 0 and of +-delta e_i.
    bool origin_interior(double delta = 1e-9) const;

    /// Some interior point (structural; throws if none can be derived).
    Eigen::VectorXd interior_point() const;

    std::optional<double> exact_volume() const;
    std::optional<Eigen::VectorXd> structural_barycenter() const;

    // Kind-specific accessors (throw on kind mismatch).
    double ball_radius() const;
    const Eigen::VectorXd& half_widths() const;
    const Eigen::MatrixXd& normals() const;
    const Eigen::VectorXd& offsets() const;
    const Eigen::MatrixXd& ellipsoid_shape() const;
    const Eigen::VectorXd& ellipsoid_center() const;
    const std::vector<ConvexBody>& parts() const;
    const ConvexBody& base() const;
    const Eigen::MatrixXd& map_matrix() const;
    const Eigen::VectorXd& shift() const;
    const Eigen::MatrixXd& table_directions() const;
    const Eigen::VectorXd& table_radii() const;

    /// Vertices of an h-polytope (dim <= 6), enumerated once and cached.
    const std::vector<Eigen::VectorXd>& vertices() const;

    const std::string& name() const;
    ConvexBody named(std::string name) const;

    struct Impl;  // opaque shared state

private:
    explicit ConvexBody(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Unit cube (0,1)^n as a body (translated origin-centered box).
ConvexBody unit_cube(int dim);

/// Axis box (0, extents_1) x ... x (0, extents_n).
ConvexBody corner_box(const Eigen::VectorXd& extents);

/// Standard simplex conv{0, e_1, ..., e_n} as an h-polytope.
ConvexBody standard_simplex(int dim);

}  // namespace waistlab
