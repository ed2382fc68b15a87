#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "waistlab/body.hpp"

namespace waistlab {

struct PolyTerm {
    double coef = 0.0;
    std::vector<int> exponents;  // one exponent per input coordinate
};

/// Continuous map R^n -> R^ell from the registry. Builtins expose an exact
/// Euclidean distance-to-fiber where the level sets admit one (affine maps,
/// spheres, coordinate pairs of hyperplanes); estimators fall back to fiber
/// probe clouds otherwise.
class MapSpec {
public:
    static MapSpec coordinate(int dim_in, int k);
    static MapSpec linear(const Eigen::MatrixXd& matrix);
    static MapSpec radial(int dim_in);
    static MapSpec radial(int dim_in, const Eigen::VectorXd& center);
    static MapSpec quadratic(const Eigen::MatrixXd& q);
    static MapSpec polynomial(int dim_in, std::vector<std::vector<PolyTerm>> components);
    static MapSpec constant(int dim_in, const Eigen::VectorXd& value);
    static MapSpec callable(int dim_in, int dim_out,
                            std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
                            std::string id);

    /// this composed with the coordinatewise Gaussian CDF: x -> f(G(x)).
    MapSpec transported() const;

    /// this composed with a diagonal scaling: x -> f(diag(s) x).
    MapSpec precomposed_diag(const Eigen::VectorXd& scales) const;

    int dim_in() const;
    int dim_out() const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

    bool has_exact_distance() const;
    /// Euclidean distance to f^{-1}(t); +inf when the fiber is empty.
    double fiber_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& t) const;

    /// Axis indices when the map is a 0/1 coordinate selector (one 1 per
    /// row); lets estimators clamp affine fibers to box ambients exactly.
    std::optional<std::vector<int>> selector_axes() const;

    /// Distance to the fiber in the gauge of `unit` (exact for scalar affine
    /// maps: |a.x - t| / h_unit(a)); nullopt when no closed form exists.
    std::optional<double> fiber_gauge_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                                               const ConvexBody& unit) const;

    const std::string& id() const;

    /// Registry syntax: coord:k | linear:<json|file> | radial[:c1,c2,...] |
    /// quad:axis:k | quad:<json|file> | poly:<file> | const:v1,v2,...
    /// with optional suffix "|transport".
    static MapSpec parse(const std::string& spec, int ambient_dim);

    struct Impl;

private:
    explicit MapSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Coordinatewise standard normal CDF G: R^n -> (0,1)^n (the measure
/// transport used by the cube reduction) and its inverse.
Eigen::VectorXd gaussian_transport(const Eigen::VectorXd& x);
Eigen::VectorXd gaussian_transport_inverse(const Eigen::VectorXd& u);

}  // namespace waistlab
