#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "waistlab/body.hpp"
#include "waistlab/measure.hpp"
#include "waistlab/report.hpp"

namespace waistlab {

/// Symmetric positive-definite matrix with unit determinant, parametrized by
/// the exponential of a trace-free symmetric matrix (both constraints hold by
/// construction).
class UnimodularSPD {
public:
    static UnimodularSPD identity(int n);
    static UnimodularSPD from_tracefree(const Eigen::MatrixXd& s);
    /// SPD polar factor of an invertible matrix, rescaled to determinant one.
    static UnimodularSPD project(const Eigen::MatrixXd& m);

    const Eigen::MatrixXd& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double det_error() const;

private:
    explicit UnimodularSPD(Eigen::MatrixXd m) : m_(std::move(m)) {}
    Eigen::MatrixXd m_;
};

/// x -> linear * (x - center)
struct AffineNormalization {
    Eigen::MatrixXd linear;
    Eigen::VectorXd center;
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return linear * (x - center); }
};

struct PositionReport {
    double objective_value = 0.0;  // Gaussian measure of the transformed body
    double objective_std_error = 0.0;
    UnimodularSPD transform = UnimodularSPD::identity(1);
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
    std::uint64_t seed = 0;
};

struct MPositionOptions {
    std::int64_t budget = 400000;  // directions per objective evaluation (refinement phase)
    std::uint64_t seed = 1;
    int max_iters = 120;
    double fd_step = 0.05;        // central-difference step in the trace-free parameter
    double step0 = 1.5;           // initial ascent step
    double grad_noise_mult = 3.0; // stop when |grad| <= mult * se(grad)
};

/// Gaussian measure of transform(body) for a body with the origin interior:
/// directional conditional estimate E_theta P(chi_n <= radial(theta)), smooth
/// in the transform (used with common random directions by the optimizer).
MCEstimate gaussian_body_measure(const ConvexBody& body, const Eigen::MatrixXd& transform,
                                 std::int64_t budget, std::uint64_t seed);

/// Affine normalization to isotropic position: barycenter to the origin,
/// scalar covariance, image volume one.
std::pair<AffineNormalization, ConvexBody> isotropic_transform(const ConvexBody& body,
                                                               std::int64_t budget,
                                                               std::uint64_t seed);

/// Maximizes T -> gamma_n(T(K1)) over unit-determinant SPD maps, where K1 is
/// the volume-one symmetrization (K - b) cap (b - K) of the input scaled to
/// volume one. Projected ascent in the trace-free symmetric parameter with
/// common-random-number central differences.
PositionReport gaussian_m_position(const ConvexBody& body, const MPositionOptions& opts);

/// Max commutator norm |T M - M T| over the supplied isometries of the body.
CheckRecord verify_symmetry_commutation(const ConvexBody& body,
                                        const std::vector<Eigen::MatrixXd>& isometries,
                                        const UnimodularSPD& transform, double tol = 1e-6,
                                        std::int64_t budget = 20000, std::uint64_t seed = 1);

/// Isotropic constant (sup density)^{1/n} (det Cov)^{1/2n} for measures whose
/// density supremum is structurally known.
MCEstimate isotropic_constant(const MeasureModel& mu, std::int64_t budget, std::uint64_t seed);

}  // namespace waistlab
