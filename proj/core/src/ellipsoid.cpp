#include "waistlab/ellipsoid.hpp"

#include <cmath>
#include <functional>

#include "waistlab/measure.hpp"

namespace waistlab {

namespace {

// Damped Newton ascent for a smooth concave barrier objective with analytic
// derivatives; value() returns -inf outside the open feasible region.
struct BarrierProblem {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

bool newton_ascend(const BarrierProblem& prob, Eigen::VectorXd& theta, double grad_tol,
                   int max_iters, int* iter_count) {
    const int m = static_cast<int>(theta.size());
    double f = prob.value(theta);
    if (!std::isfinite(f)) throw NumericError("barrier ascent started infeasible");
    for (int it = 0; it < max_iters; ++it) {
        if (iter_count) ++*iter_count;
        Eigen::VectorXd g = prob.gradient(theta);
        if (g.norm() <= grad_tol) return true;
        Eigen::MatrixXd h = prob.hessian(theta);
        double lev = 0.0;
        Eigen::VectorXd dir = g;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::MatrixXd a = -h + lev * Eigen::MatrixXd::Identity(m, m);
            Eigen::LLT<Eigen::MatrixXd> llt(a);
            if (llt.info() == Eigen::Success) {
                dir = llt.solve(g);
                if (dir.dot(g) > 0.0) break;
            }
            lev = lev == 0.0 ? 1e-10 * (1.0 + h.cwiseAbs().maxCoeff()) : 10.0 * lev;
        }
        double slope = dir.dot(g);
        // Newton decrement: affine-invariant optimality measure, robust where
        // the raw gradient norm is dominated by slack round-off.
        if (lev == 0.0 && 0.5 * slope <= 1e-12 * (1.0 + std::abs(f))) return true;
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 70; ++ls) {
            Eigen::VectorXd cand = theta + t * dir;
            double fc = prob.value(cand);
            if (std::isfinite(fc) && fc >= f + 1e-4 * t * slope) {
                theta = cand;
                f = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) return g.norm() <= 1e3 * grad_tol;  // line search exhausted
    }
    return prob.gradient(theta).norm() <= grad_tol;
}

// Chebyshev center of {a_i . x <= b_i}: maximize r s.t. a_i.d + r|a_i| <= b_i.
// Constraints are linear in theta = (d, r).
std::pair<Eigen::VectorXd, double> chebyshev_center(const Eigen::MatrixXd& a,
                                                    const Eigen::VectorXd& b) {
    const int n = static_cast<int>(a.cols());
    const int m = static_cast<int>(a.rows());
    Eigen::MatrixXd rows(m, n + 1);
    rows.leftCols(n) = a;
    for (int i = 0; i < m; ++i) rows(i, n) = a.row(i).norm();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n + 1);
    double r0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (rows(i, n) > 0.0) r0 = std::min(r0, b[i] / rows(i, n));
    theta[n] = r0 - 1.0;  // feasible by construction (possibly negative)

    double scale = 1.0 + b.cwiseAbs().maxCoeff();
    Eigen::VectorXd e_r = Eigen::VectorXd::Zero(n + 1);
    e_r[n] = 1.0;
    for (double mu = scale; mu > 1e-8 * scale; mu *= 0.1) {
        BarrierProblem prob;
        prob.value = [&, mu](const Eigen::VectorXd& th) {
            Eigen::VectorXd s = b - rows * th;
            if (s.minCoeff() <= 0.0) return -std::numeric_limits<double>::infinity();
            return th[n] + mu * s.array().log().sum();
        };
        prob.gradient = [&, mu](const Eigen::VectorXd& th) {
            Eigen::VectorXd s = b - rows * th;
            Eigen::VectorXd g = e_r;
            for (int i = 0; i < m; ++i) g -= (mu / s[i]) * rows.row(i).transpose();
            return g;
        };
        prob.hessian = [&, mu](const Eigen::VectorXd& th) {
            Eigen::VectorXd s = b - rows * th;
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
            for (int i = 0; i < m; ++i)
                h -= (mu / (s[i] * s[i])) * rows.row(i).transpose() * rows.row(i);
            return h;
        };
        newton_ascend(prob, theta, std::max(1e-9 * scale, 1e-3 * mu), 120, nullptr);
    }
    return {theta.head(n), theta[n]};
}

// Packed symmetric parametrization for the ellipsoid matrix.
struct VechIndex {
    std::vector<std::pair<int, int>> pq;
    explicit VechIndex(int n) {
        for (int p = 0; p < n; ++p)
            for (int q = p; q < n; ++q) pq.emplace_back(p, q);
    }
    int size() const { return static_cast<int>(pq.size()); }
    Eigen::MatrixXd unpack(const Eigen::VectorXd& v, int n) const {
        Eigen::MatrixXd b(n, n);
        for (int k = 0; k < size(); ++k) {
            b(pq[k].first, pq[k].second) = v[k];
            b(pq[k].second, pq[k].first) = v[k];
        }
        return b;
    }
    // dB_k * a for the k-th symmetric basis direction
    Eigen::VectorXd basis_times(int k, const Eigen::VectorXd& a, int n) const {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        auto [p, q] = pq[k];
        w[p] += a[q];
        if (p != q) w[q] += a[p];
        return w;
    }
};

}  // namespace

std::optional<ConvexBody> to_h_polytope(const ConvexBody& body) {
    switch (body.kind()) {
        case BodyKind::HPolytope:
            return body;
        case BodyKind::Box: {
            int n = body.dim();
            Eigen::MatrixXd a(2 * n, n);
            Eigen::VectorXd b(2 * n);
            a.topRows(n) = Eigen::MatrixXd::Identity(n, n);
            a.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
            b.head(n) = body.half_widths();
            b.tail(n) = body.half_widths();
            return ConvexBody::h_polytope(a, b);
        }
        case BodyKind::Translate: {
            auto base = to_h_polytope(body.base());
            if (!base) return std::nullopt;
            // a.(x - v) <= b  ->  a.x <= b + a.v
            return ConvexBody::h_polytope(base->normals(),
                                          base->offsets() + base->normals() * body.shift());
        }
        case BodyKind::LinearImage: {
            auto base = to_h_polytope(body.base());
            if (!base) return std::nullopt;
            Eigen::MatrixXd inv = body.map_matrix().inverse();
            return ConvexBody::h_polytope(base->normals() * inv, base->offsets());
        }
        case BodyKind::Intersection: {
            std::vector<Eigen::MatrixXd> as;
            std::vector<Eigen::VectorXd> bs;
            long rows = 0;
            for (const auto& p : body.parts()) {
                auto hp = to_h_polytope(p);
                if (!hp) return std::nullopt;
                as.push_back(hp->normals());
                bs.push_back(hp->offsets());
                rows += as.back().rows();
            }
            Eigen::MatrixXd a(rows, body.dim());
            Eigen::VectorXd b(rows);
            long at = 0;
            for (std::size_t i = 0; i < as.size(); ++i) {
                a.middleRows(at, as[i].rows()) = as[i];
                b.segment(at, bs[i].size()) = bs[i];
                at += as[i].rows();
            }
            return ConvexBody::h_polytope(a, b);
        }
        default:
            return std::nullopt;
    }
}

EllipsoidResult john_ellipsoid(const ConvexBody& poly_in, double tol) {
    auto hp = to_h_polytope(poly_in);
    if (!hp) throw PreconditionError("john_ellipsoid: body is not convertible to an h-polytope");
    const Eigen::MatrixXd a = hp->normals();
    const Eigen::VectorXd b = hp->offsets();
    const int n = hp->dim();
    const int m = static_cast<int>(a.rows());
    if (n > 6) throw PreconditionError("john_ellipsoid: restricted to dim <= 6");

    auto [d0, r0] = chebyshev_center(a, b);
    if (!(r0 > 1e-12)) throw PreconditionError("john_ellipsoid: polytope has empty interior");

    VechIndex vech(n);
    const int mb = vech.size();
    const int dimth = mb + n;  // (vech(B), d)
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dimth);
    for (int k = 0; k < mb; ++k)
        if (vech.pq[k].first == vech.pq[k].second) theta[k] = 0.8 * r0;
    theta.tail(n) = d0;

    // slack g_i = b_i - a_i.d - |B a_i|; objective log det B + mu sum log g_i
    auto slack = [&](const Eigen::MatrixXd& bm, const Eigen::VectorXd& dv, int i) {
        return b[i] - a.row(i).dot(dv) - (bm * a.row(i).transpose()).norm();
    };

    int iterations = 0;
    bool converged = false;
    double scale = 1.0 + b.cwiseAbs().maxCoeff();
    // The slack b_i - a_i.d - |B a_i| cancels to O(eps) near the boundary, so
    // the reachable gradient norm is about eps/mu; mu stops where central-path
    // offset and that noise floor balance (~1e-7 parameter accuracy).
    for (double mu = 0.5 * scale; mu > 2e-8 * scale; mu *= 0.1) {
        BarrierProblem prob;
        prob.value = [&, mu](const Eigen::VectorXd& th) {
            Eigen::MatrixXd bm = vech.unpack(th.head(mb), n);
            Eigen::VectorXd dv = th.tail(n);
            Eigen::LLT<Eigen::MatrixXd> llt(bm);
            if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
            double v = 0.0;
            for (int i = 0; i < n; ++i) v += 2.0 * std::log(llt.matrixL()(i, i));
            for (int i = 0; i < m; ++i) {
                double gi = slack(bm, dv, i);
                if (gi <= 0.0) return -std::numeric_limits<double>::infinity();
                v += mu * std::log(gi);
            }
            return v;
        };
        prob.gradient = [&, mu](const Eigen::VectorXd& th) {
            Eigen::MatrixXd bm = vech.unpack(th.head(mb), n);
            Eigen::VectorXd dv = th.tail(n);
            Eigen::MatrixXd binv = bm.inverse();
            Eigen::VectorXd g = Eigen::VectorXd::Zero(dimth);
            for (int k = 0; k < mb; ++k) {
                auto [p, q] = vech.pq[k];
                g[k] = (p == q) ? binv(p, p) : 2.0 * binv(p, q);
            }
            for (int i = 0; i < m; ++i) {
                Eigen::VectorXd ai = a.row(i).transpose();
                Eigen::VectorXd w = bm * ai;
                double wn = std::max(w.norm(), 1e-300);
                double gi = slack(bm, dv, i);
                double c = mu / gi;
                for (int k = 0; k < mb; ++k)
                    g[k] -= c * vech.basis_times(k, ai, n).dot(w) / wn;
                g.tail(n) -= c * ai;
            }
            return g;
        };
        prob.hessian = [&, mu](const Eigen::VectorXd& th) {
            Eigen::MatrixXd bm = vech.unpack(th.head(mb), n);
            Eigen::VectorXd dv = th.tail(n);
            Eigen::MatrixXd binv = bm.inverse();
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimth, dimth);
            // log det: H_{kl} = -tr(B^{-1} E_k B^{-1} E_l)
            for (int k = 0; k < mb; ++k) {
                auto [p, q] = vech.pq[k];
                for (int l = k; l < mb; ++l) {
                    auto [r, s] = vech.pq[l];
                    double v;
                    if (p == q && r == s)
                        v = binv(q, r) * binv(s, p);
                    else if (p == q)
                        v = binv(q, r) * binv(s, p) + binv(q, s) * binv(r, p);
                    else if (r == s)
                        v = binv(q, r) * binv(s, p) + binv(p, r) * binv(s, q);
                    else
                        v = binv(q, r) * binv(s, p) + binv(q, s) * binv(r, p) +
                            binv(p, r) * binv(s, q) + binv(p, s) * binv(r, q);
                    h(k, l) -= v;
                    if (l != k) h(l, k) -= v;
                }
            }
            for (int i = 0; i < m; ++i) {
                Eigen::VectorXd ai = a.row(i).transpose();
                Eigen::VectorXd w = bm * ai;
                double wn = std::max(w.norm(), 1e-300);
                Eigen::VectorXd what = w / wn;
                double gi = slack(bm, dv, i);
                // grad g_i in theta coordinates
                Eigen::VectorXd dg = Eigen::VectorXd::Zero(dimth);
                std::vector<Eigen::VectorXd> dw(mb);
                for (int k = 0; k < mb; ++k) {
                    dw[k] = vech.basis_times(k, ai, n);
                    dg[k] = -dw[k].dot(what);
                }
                dg.tail(n) = -ai;
                // log g_i: (1/g) d2g - (1/g^2) dg dg'
                h -= (mu / (gi * gi)) * dg * dg.transpose();
                // d2g has only the B-B block: -(<dw_k, dw_l> - (what.dw_k)(what.dw_l))/wn
                for (int k = 0; k < mb; ++k)
                    for (int l = k; l < mb; ++l) {
                        double v = -(dw[k].dot(dw[l]) - dw[k].dot(what) * dw[l].dot(what)) / wn;
                        h(k, l) += (mu / gi) * v;
                        if (l != k) h(l, k) += (mu / gi) * v;
                    }
            }
            return h;
        };
        converged =
            newton_ascend(prob, theta, std::max({tol * scale, 0.05 * mu, 3e-9 * scale}), 150,
                          &iterations);
    }
    if (!converged)
        throw NumericError("john_ellipsoid: barrier ascent did not converge after " +
                           std::to_string(iterations) + " iterations");

    EllipsoidResult res;
    Eigen::MatrixXd bm = vech.unpack(theta.head(mb), n);
    Eigen::VectorXd dv = theta.tail(n);
    res.center = dv;
    res.shape = bm * bm;
    res.iterations = iterations;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bm);
    res.semi_axis_lengths.resize(n);
    res.axes.resize(n, n);
    for (int i = 0; i < n; ++i) {
        res.semi_axis_lengths[i] = es.eigenvalues()[n - 1 - i];
        res.axes.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    // a posteriori: all vertices inside center + n (E - center)
    Eigen::MatrixXd binv = bm.inverse();
    res.containment_verified = true;
    for (const auto& v : hp->vertices()) {
        if ((binv * (v - dv)).norm() > n * (1.0 + 1e-6)) {
            res.containment_verified = false;
            break;
        }
    }
    return res;
}

PancakeResult pancake_check(const ConvexBody& body, int ell, double delta, std::int64_t budget,
                            std::uint64_t seed) {
    const int n = body.dim();
    if (ell < 0 || ell > n - 1) throw PreconditionError("pancake_check: need 0 <= ell <= dim-1");
    if (delta <= 0.0) throw PreconditionError("pancake_check: delta must be positive");

    PancakeResult res;

    if (to_h_polytope(body)) {
        EllipsoidResult je = john_ellipsoid(body);
        res.thin_axis_length = je.semi_axis_lengths[ell];
        if (res.thin_axis_length <= delta / n) {
            res.state = PancakeState::Pancake;
            res.witness = AffineFlat{je.center, je.axes.leftCols(ell)};
            return res;
        }
    }

    // Necessary bound: if the body fits within delta of some ell-flat, the
    // best-fit (least-squares) flat of any interior sample has RMS distance
    // at most delta. RMS above that refutes; the farthest-point distance is
    // reported as a diagnostic only, since the L2-fit flat need not minimize
    // the sup distance.
    auto mu = MeasureModel::uniform_on(body);
    auto pts = mu.sample(budget, seed);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pts) {
        Eigen::VectorXd d = p - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(pts.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::MatrixXd basis(n, ell);
    for (int j = 0; j < ell; ++j) basis.col(j) = es.eigenvectors().col(n - 1 - j);
    AffineFlat flat{mean, basis};

    double sq_sum = 0.0, worst = 0.0;
    for (const auto& p : pts) {
        double d = flat.distance(p);
        sq_sum += d * d;
        worst = std::max(worst, d);
    }
    res.rms_distance = std::sqrt(sq_sum / static_cast<double>(pts.size()));
    res.farthest_distance = worst;

    double noise_margin = 1.0 + 3.0 / std::sqrt(static_cast<double>(budget));
    if (res.rms_distance > delta * 1.02 * noise_margin) {
        res.state = PancakeState::NotPancake;
        return res;
    }
    res.state = PancakeState::Indeterminate;
    return res;
}

}  // namespace waistlab
