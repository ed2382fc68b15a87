#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "waistlab/body.hpp"
#include "waistlab/linalg.hpp"
#include "waistlab/measure.hpp"
#include "waistlab/report.hpp"

namespace waistlab {

/// Closed halfspace {x : normal.x + offset >= 0}.
struct Halfspace {
    Eigen::VectorXd normal;
    double offset = 0.0;
    bool contains(const Eigen::VectorXd& x) const { return normal.dot(x) + offset >= 0.0; }
};

/// One-parameter circle of halfspace cuts u(phi) = a cos phi + b sin phi in
/// R^{n+1}; antipodal parameters give complementary halfspaces, so any
/// continuous finite measure admits a bisecting angle.
struct CutCircle {
    Eigen::VectorXd a, b;  // orthonormal in R^{n+1}

    int ambient_dim() const { return static_cast<int>(a.size()) - 1; }
    Halfspace at(double phi) const;

    /// Family of parallel cuts with a fixed normal direction.
    static CutCircle normal_direction(const Eigen::VectorXd& dir);
    /// Cuts whose boundary hyperplane contains the given (n-2)-flat.
    static CutCircle through_flat(const AffineFlat& axis);
    static CutCircle random(int dim, std::uint64_t seed);
};

/// Halfspace on the family equalizing the weighted sample masses of the two
/// sides (sign-change bracketing on 720 initial angles, then bisection).
Halfspace bisect_points(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights,
                        const CutCircle& family, double angle_tol);

/// Measure-level wrapper: weight(x) integrated over each side (default 1).
Halfspace bisect_equal(const MeasureModel& mu,
                       const std::function<double(const Eigen::VectorXd&)>& weight,
                       const std::optional<CutCircle>& family, double angle_tol,
                       std::int64_t budget, std::uint64_t seed);

/// Dyadic tree of halfspace cuts; leaves are the convex cells.
struct PartitionTree {
    struct Node {
        int depth = 0;
        Halfspace cut;       // meaningful for internal nodes
        int left = -1, right = -1;
    };
    int dim = 0;
    int depth = 0;
    std::vector<Node> nodes;            // nodes[0] is the root
    std::vector<double> leaf_weights;   // build-sample mass fractions, leaf order

    int leaf_count() const { return 1 << depth; }
    int leaf_index(const Eigen::VectorXd& x) const;
    /// Root-to-leaf halfspace list per leaf (each cell is their intersection).
    std::vector<std::vector<Halfspace>> leaf_constraints() const;
    /// Leaf cell as an h-polytope (optionally with a bounding radius tag).
    ConvexBody leaf_cell(int leaf, std::optional<double> bounding_radius = std::nullopt) const;

    std::string to_json_string() const;
    static PartitionTree from_json_string(const std::string& text);
};

/// Recursive equal-mass bisection of the measure into 2^depth convex cells.
/// constraints[d], when present, fixes the cut family at tree depth d.
PartitionTree dyadic_equipartition(const MeasureModel& mu, int depth,
                                   const std::vector<std::optional<CutCircle>>& constraints,
                                   double tol, std::int64_t budget, std::uint64_t seed);

/// Per-leaf masses re-estimated with an independent sample stream.
std::vector<double> partition_recount(const PartitionTree& tree, const MeasureModel& mu,
                                      std::int64_t budget, std::uint64_t seed);

/// Density proportional to exp(-|x|^2/2 + log_factor(x)) with log_factor
/// concave (declared by construction).
struct OneLogConcave {
    int dim = 0;
    std::function<double(const Eigen::VectorXd&)> log_factor;
};

struct PeakCertificate {
    Eigen::VectorXd center;
    std::vector<double> r_grid;
    std::vector<double> achieved;
    std::vector<double> bounds;
    CheckStatus status = CheckStatus::Indeterminate;
    std::string note;

    CheckRecord as_check(const std::string& name, const std::string& tag) const;
};

/// Locates the density mode and certifies nu(x0 + r B) >= gamma_ell(r B^ell)
/// on the grid (quadrature; dim <= 2).
PeakCertificate peak_point(const OneLogConcave& nu, const std::vector<double>& r_grid,
                           std::uint64_t seed, double quad_tol = 1e-9);

/// Peak-property verification of a density against profile I over the given
/// flats and log-concave multipliers (quadrature in flat coordinates, flat
/// dimension <= 2). Flats whose restricted density integrates to zero are
/// skipped with a note.
std::vector<PeakCertificate> peak_property_check(
    const std::function<double(const Eigen::VectorXd&)>& density, const ConvexBody& dilation_body,
    const std::function<double(double)>& profile, const std::vector<AffineFlat>& flats,
    const std::vector<std::function<double(const Eigen::VectorXd&)>>& multipliers,
    const std::vector<double>& r_grid, std::uint64_t seed, double quad_tol = 1e-8);

/// Vol(K + r W) for the closed-form kind pairs (segments, boxes, balls, and
/// 2-D convex polygons / polygon+disk); throws otherwise.
double minkowski_sum_volume(const ConvexBody& k, const ConvexBody& w, double r);

/// Convolution lower bound: for mu with log-concave density on K and V with
/// barycenter 0, mu(x0 + rV) / (r^n Vol V) >= 1 / Vol(K - rV) at the
/// barycenter x0, over the r grid.
CheckRecord spingarn_check(const MeasureModel& mu, const ConvexBody& v,
                           const std::vector<double>& r_grid, std::int64_t budget,
                           std::uint64_t seed);

}  // namespace waistlab
