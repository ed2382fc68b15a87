#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "waistlab/body.hpp"
#include "waistlab/maps.hpp"
#include "waistlab/measure.hpp"
#include "waistlab/report.hpp"

namespace waistlab {

/// Level set f^{-1}(level), realized numerically as {|f - level| <= tol}.
struct FiberSpec {
    MapSpec map;
    Eigen::VectorXd level;
    double level_tolerance = 1e-9;
};

/// Tube-volume estimates Vol(fiber + eps B) / (beta_ell eps^ell) over the
/// epsilon schedule, with the inverse-square-weighted linear extrapolation to
/// eps -> 0 as the reported value.
struct ContentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::vector<double> eps_schedule;
    std::vector<double> per_eps_values;
    std::vector<double> per_eps_std_errors;
    std::string extrapolation_note;
};

struct WaistCertificate {
    std::string subject;
    std::string map_id;
    std::string tag;
    int ell = 0;
    Eigen::VectorXd best_level;
    double bound_value = 0.0;
    double achieved = 0.0;
    bool witness_found = false;
    CheckStatus status = CheckStatus::Indeterminate;
    double tolerance = 0.0;
    std::map<std::string, double> quantities;
    std::map<std::string, std::vector<double>> series;
    std::string note;

    CheckRecord as_check(const std::string& name) const;
};

inline std::vector<double> default_eps_schedule() { return {0.2, 0.1, 0.05}; }

/// Lower Minkowski content of a fiber inside (a neighborhood of) the ambient
/// body: one distance-to-fiber evaluation per sample point, thresholded over
/// the (descending) epsilon schedule with paired counts. codim is the fiber
/// codimension, i.e. the map's range dimension.
ContentEstimate minkowski_content(const FiberSpec& fiber, const ConvexBody& ambient, int codim,
                                  const std::vector<double>& eps_schedule, std::int64_t budget,
                                  std::uint64_t seed);

/// Gaussian tube lower bound: searches candidate levels for one t with
/// gamma_n(fiber + r B^n) >= gamma_ell(r B^ell) at every grid r within the
/// noise band. A failed search is reported as "witness not found", never as
/// a refutation.
WaistCertificate gaussian_waist_check(const MapSpec& f, int ell,
                                      const std::vector<Eigen::VectorXd>& user_levels,
                                      const std::vector<double>& r_grid, std::int64_t budget,
                                      std::uint64_t seed);

/// Unit-cube waist: max fiber content over the level grid against the bound
/// 1, plus the transported conjugate map f o G under the Gaussian check
/// (attached informationally).
WaistCertificate cube_waist_check(const MapSpec& f, int ell,
                                  const std::vector<Eigen::VectorXd>& level_grid,
                                  std::int64_t budget, std::uint64_t seed, double tol = 0.05,
                                  bool run_conjugate = true);

/// Box waist with bound prod_{j <= n-ell} lambda_j (extents ascending).
WaistCertificate box_waist_check(const Eigen::VectorXd& extents, const MapSpec& f, int ell,
                                 const std::vector<Eigen::VectorXd>& level_grid,
                                 std::int64_t budget, std::uint64_t seed, double tol = 0.05);

/// Product inequality: sup_t content(fiber) * sup_E Vol_ell(K cap E) >= Vol(K),
/// with the section sup taken over a randomized finite flat search (a lower
/// bound, so passes are conservative).
WaistCertificate section_theorem_check(const ConvexBody& body, const MapSpec& f, int ell,
                                       const std::vector<Eigen::VectorXd>& level_grid,
                                       int flat_search, std::int64_t budget, std::uint64_t seed,
                                       double tol = 0.0);

/// Body-gauge tube bound for symmetric bodies: mu(fiber + r K) >= (r/(2+r))^ell
/// at every grid r for some level.
WaistCertificate symmetric_body_waist_check(const ConvexBody& body, const MeasureModel& mu,
                                            const MapSpec& f, int ell,
                                            const std::vector<Eigen::VectorXd>& level_grid,
                                            const std::vector<double>& r_grid,
                                            std::int64_t budget, std::uint64_t seed);

/// Candidate-restricted upper bound on the ell-waist:
/// min over candidates (maps to R^{n-ell}) of (sup_t content)^{1/ell}.
double waist_upper_bound(const ConvexBody& body, int ell, const std::vector<MapSpec>& candidates,
                         std::int64_t budget, std::uint64_t seed,
                         std::vector<double>* per_candidate = nullptr);

/// Matched-candidate monotonicity harness for orthogonal projections onto a
/// coordinate subspace: per candidate f on the projection, the lifted map
/// g(x) = (x_{E^perp}, f(x_E)) on the body cannot have larger best-fiber
/// content.
CheckRecord projection_candidate_check(const ConvexBody& body, const std::vector<int>& axes,
                                       const ConvexBody& projected_body, const MapSpec& f,
                                       int ell, std::int64_t budget, std::uint64_t seed);

/// Same harness for central sections of unconditional symmetric bodies, with
/// the halved-difference lift and the factor-2 bound.
CheckRecord section_candidate_check(const ConvexBody& body, const std::vector<int>& axes,
                                    const ConvexBody& section_body, const MapSpec& f, int ell,
                                    std::int64_t budget, std::uint64_t seed);

/// Realized candidate levels: map values at quantile-ranked sample points.
std::vector<Eigen::VectorXd> sampled_levels(const MapSpec& f, const MeasureModel& mu, int count,
                                            std::uint64_t seed);

}  // namespace waistlab
