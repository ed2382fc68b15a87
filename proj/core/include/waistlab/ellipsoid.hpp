#pragma once

#include <cstdint>
#include <optional>

#include "waistlab/body.hpp"
#include "waistlab/linalg.hpp"

namespace waistlab {

/// Maximal-volume inscribed ellipsoid E = { center + B u : |u| <= 1 }.
struct EllipsoidResult {
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;                 // B^2, SPD
    Eigen::VectorXd semi_axis_lengths;     // eigenvalue square roots of shape, descending
    Eigen::MatrixXd axes;                  // unit axis directions, matching columns
    int iterations = 0;
    bool containment_verified = false;     // P inside center + n (E - center), at vertices
};

/// Rewrites a body as a single h-polytope when its kind allows it
/// (h_polytope, box, and translate/linear_image/intersection thereof).
std::optional<ConvexBody> to_h_polytope(const ConvexBody& body);

/// John ellipsoid of a bounded h-polytope with nonempty interior, dim <= 6.
/// Log-det barrier maximization; throws NumericError on non-convergence.
EllipsoidResult john_ellipsoid(const ConvexBody& poly, double tol = 1e-9);

enum class PancakeState { Pancake, NotPancake, Indeterminate };

struct PancakeResult {
    PancakeState state = PancakeState::Indeterminate;
    std::optional<AffineFlat> witness;  // spanned by the top ell semi-axes
    double thin_axis_length = 0.0;      // lambda_{ell+1} from the John ellipsoid, if available
    double rms_distance = 0.0;          // sampled RMS distance to the best-fit ell-flat
    double farthest_distance = 0.0;     // sampled max distance to that flat (diagnostic)
};

/// Three-valued (ell, delta)-pancake test. Sufficient certificate via the
/// John ellipsoid (lambda_{ell+1} <= delta/n); refutation via the sampled RMS
/// distance to the best-fit flat, which is a sound necessary bound.
PancakeResult pancake_check(const ConvexBody& body, int ell, double delta,
                            std::int64_t budget = 20000, std::uint64_t seed = 1);

}  // namespace waistlab
