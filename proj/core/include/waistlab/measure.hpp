#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "waistlab/body.hpp"

namespace waistlab {

/// One Monte-Carlo scalar with its provenance.
struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    std::string note;
};

enum class MeasureKind { GaussianStd, UniformOnBody, GaussianRestricted, Custom };

/// Fallback random-walk sampler knobs (used when rejection acceptance is poor).
struct WalkParams {
    int burn_in = 256;
    int thinning = 8;
    double step_scale = 0.25;
};

/// Log-concave probability measure with deterministic seeded sampling.
/// Sampling is organized in fixed substream blocks (rng.hpp), so identical
/// (measure, budget, seed) triples reproduce bit-identical estimates and
/// region estimates with a shared seed are paired sample-by-sample.
class MeasureModel {
public:
    static MeasureModel gaussian(int dim);
    static MeasureModel uniform_on(ConvexBody body);
    static MeasureModel gaussian_restricted(ConvexBody body);
    static MeasureModel custom(int dim, std::function<double(const Eigen::VectorXd&)> log_density,
                               ConvexBody support);

    int dim() const;
    MeasureKind kind() const;
    const std::optional<ConvexBody>& body() const;
    bool is_symmetric() const;

    /// Un-normalized log-density (-inf outside the support).
    double log_density(const Eigen::VectorXd& x) const;

    /// Normalized density where the normalization is known or cheaply cached
    /// (all kinds except Custom, which is returned un-normalized).
    double density(const Eigen::VectorXd& x) const;

    std::vector<Eigen::VectorXd> sample(std::int64_t count, std::uint64_t seed) const;

    /// Samples as columns of a dim x count matrix.
    Eigen::MatrixXd sample_matrix(std::int64_t count, std::uint64_t seed) const;

    MCEstimate region_measure(const std::function<bool(const Eigen::VectorXd&)>& region,
                              std::int64_t budget, std::uint64_t seed) const;

    /// Deterministic tensor-grid evaluation (dim <= 3). std_error reports the
    /// observed resolution-halving difference as a discretization bound.
    MCEstimate region_measure_grid(const std::function<bool(const Eigen::VectorXd&)>& region,
                                   int resolution = 160) const;

    std::pair<Eigen::VectorXd, Eigen::MatrixXd> barycenter_covariance(std::int64_t budget,
                                                                      std::uint64_t seed) const;

    /// (E |<x - bary, direction>|^p)^{1/p}; one stream per seed shared across
    /// all p. Moments are about the origin for structurally symmetric kinds.
    MCEstimate moment(const Eigen::VectorXd& direction, double p, std::int64_t budget,
                      std::uint64_t seed) const;

    MeasureModel with_walk_params(const WalkParams& params) const;

    struct Impl;  // opaque shared state

private:
    explicit MeasureModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Monte-Carlo volume from bounding-box rejection; exact closed forms are
/// used (std_error 0) when available and allowed.
MCEstimate estimate_volume(const ConvexBody& body, std::int64_t budget, std::uint64_t seed,
                           bool use_exact_when_available = true);

/// Barycenter: structural when the kind determines it, otherwise sampled.
Eigen::VectorXd barycenter(const ConvexBody& body, std::int64_t budget, std::uint64_t seed);

}  // namespace waistlab
