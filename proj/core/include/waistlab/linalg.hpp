#pragma once

#include <Eigen/Dense>

#include "waistlab/errors.hpp"

namespace waistlab {

/// Affine flat of dimension k in R^n: point + orthonormal basis (n x k).
struct AffineFlat {
    Eigen::VectorXd point;
    Eigen::MatrixXd basis;

    int ambient_dim() const { return static_cast<int>(basis.rows()); }
    int dim() const { return static_cast<int>(basis.cols()); }

    Eigen::VectorXd embed(const Eigen::VectorXd& y) const { return point + basis * y; }

    Eigen::VectorXd coords(const Eigen::VectorXd& x) const {
        return basis.transpose() * (x - point);
    }

    /// Euclidean distance from x to the flat.
    double distance(const Eigen::VectorXd& x) const {
        Eigen::VectorXd d = x - point;
        return (d - basis * (basis.transpose() * d)).norm();
    }

    /// Flat spanned by coordinate axes `axes`, passing through `through`.
    static AffineFlat coordinate(int n, const std::vector<int>& axes,
                                 const Eigen::VectorXd& through) {
        AffineFlat f;
        f.point = through;
        f.basis = Eigen::MatrixXd::Zero(n, static_cast<int>(axes.size()));
        for (int j = 0; j < static_cast<int>(axes.size()); ++j) f.basis(axes[j], j) = 1.0;
        return f;
    }

    /// Flat through `point` spanned by the columns of `dirs` (orthonormalized).
    static AffineFlat spanning(const Eigen::VectorXd& point, const Eigen::MatrixXd& dirs) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(dirs);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
            dirs.rows(), dirs.cols());
        return AffineFlat{point, q};
    }
};

/// Orthonormal basis of the null space of A (rows are constraints).
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double tol = 1e-12) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    int rank = 0;
    const auto& sv = svd.singularValues();
    double thresh = tol * (sv.size() > 0 ? sv[0] : 0.0) + 1e-300;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > thresh) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

inline double operator_norm(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

/// Matrix exponential of a symmetric matrix via its eigendecomposition.
inline Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s));
    return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

/// Symmetric positive-definite square root.
inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("sym_sqrt: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().array().sqrt().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace waistlab
