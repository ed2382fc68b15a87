#pragma once

#include <cstdint>
#include <vector>

#include "waistlab/body.hpp"
#include "waistlab/linalg.hpp"
#include "waistlab/measure.hpp"
#include "waistlab/report.hpp"

namespace waistlab {

/// Finite-probe estimate of the psi_alpha constant: max over sampled
/// directions and the p grid of moment_p / (p^{1/alpha} moment_1). A lower
/// bound on the true constant by construction.
struct PsiEstimate {
    double alpha = 2.0;
    double value = 0.0;
    std::vector<double> p_grid;
    int direction_count = 0;
    Eigen::VectorXd argmax_direction;
    double argmax_p = 0.0;
    std::uint64_t seed = 0;
    std::string note;
};

PsiEstimate psi_alpha_constant(const MeasureModel& mu, double alpha, int directions,
                               const std::vector<double>& p_grid, std::int64_t budget,
                               std::uint64_t seed);

/// Spherical average of the Minkowski functional over uniform directions.
MCEstimate mean_width_parameter(const ConvexBody& body, int directions, std::uint64_t seed);

/// Volume of the section body cap flat, by rejection in flat coordinates.
MCEstimate section_volume(const ConvexBody& body, const AffineFlat& flat, std::int64_t budget,
                          std::uint64_t seed);

/// Checks Vol_ell(K cap E) <= (C_desk * A)^{n-ell} Vol_n(K)^{ell/n} over the
/// supplied flats, for a body in isotropic position.
CheckRecord slice_bound_check(const ConvexBody& body, const std::vector<AffineFlat>& flats,
                              const PsiEstimate& psi, double c_desk, std::int64_t budget,
                              std::uint64_t seed);

}  // namespace waistlab
