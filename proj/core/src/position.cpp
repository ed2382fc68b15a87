#include "waistlab/position.hpp"

#include <cmath>

#include "waistlab/linalg.hpp"
#include "waistlab/rng.hpp"
#include "waistlab/specfun.hpp"

namespace waistlab {

UnimodularSPD UnimodularSPD::identity(int n) {
    return UnimodularSPD(Eigen::MatrixXd::Identity(n, n));
}

UnimodularSPD UnimodularSPD::from_tracefree(const Eigen::MatrixXd& s) {
    Eigen::MatrixXd sym = symmetrize(s);
    double tr = sym.trace();
    sym -= (tr / sym.rows()) * Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
    return UnimodularSPD(sym_exp(sym));
}

UnimodularSPD UnimodularSPD::project(const Eigen::MatrixXd& m) {
    // SPD polar factor of m: (m m')^{1/2}, then determinant-normalized.
    Eigen::MatrixXd p = sym_sqrt(m * m.transpose());
    double det = p.determinant();
    if (det <= 0.0) throw NumericError("UnimodularSPD::project: singular input");
    p *= std::pow(det, -1.0 / p.rows());
    return UnimodularSPD(p);
}

double UnimodularSPD::det_error() const { return std::abs(m_.determinant() - 1.0); }

// ---------------------------------------------------------------------------

namespace {

// Directional radial estimate of gamma_n(T(K)): for theta uniform on the
// sphere, P(chi_n <= rho(theta)) with rho = 1 / gauge_K(T^{-1} theta).
double radial_objective(const ConvexBody& body, const Eigen::MatrixXd& t_inv, double extra_scale,
                        const Eigen::MatrixXd& dirs, double* se_out) {
    const int n = body.dim();
    double sum = 0.0, sum_sq = 0.0;
    const std::int64_t count = dirs.cols();
    for (std::int64_t j = 0; j < count; ++j) {
        double g = body.gauge(t_inv * dirs.col(j)) / extra_scale;
        double v = g <= 0.0 ? 1.0 : gaussian_ball_measure(n, 1.0 / g);
        sum += v;
        sum_sq += v * v;
    }
    double mean = sum / static_cast<double>(count);
    if (se_out) {
        double var = std::max(sum_sq / static_cast<double>(count) - mean * mean, 0.0);
        *se_out = std::sqrt(var / static_cast<double>(count));
    }
    return mean;
}

Eigen::MatrixXd sphere_directions(int n, std::int64_t count, std::uint64_t seed) {
    Eigen::MatrixXd dirs(n, count);
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    while (done < count) {
        Rng rng = Rng::substream(seed, stream++);
        std::int64_t take = std::min<std::int64_t>(kSubstreamBlock, count - done);
        for (std::int64_t i = 0; i < take; ++i) dirs.col(done + i) = rng.unit_vec(n);
        done += take;
    }
    return dirs;
}

// Orthonormal basis of trace-free symmetric matrices.
std::vector<Eigen::MatrixXd> tracefree_basis(int n) {
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
            e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
            basis.push_back(e);
        }
    for (int k = 0; k + 1 < n; ++k) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
        e(k, k) = 1.0 / std::sqrt(2.0);
        e(k + 1, k + 1) = -1.0 / std::sqrt(2.0);
        basis.push_back(e);
    }
    return basis;
}

}  // namespace

MCEstimate gaussian_body_measure(const ConvexBody& body, const Eigen::MatrixXd& transform,
                                 std::int64_t budget, std::uint64_t seed) {
    MCEstimate est;
    est.samples = budget;
    est.seed = seed;
    if (body.origin_interior()) {
        Eigen::MatrixXd dirs = sphere_directions(body.dim(), budget, seed);
        Eigen::MatrixXd t_inv = transform.inverse();
        est.value = radial_objective(body, t_inv, 1.0, dirs, &est.std_error);
        est.note = "radial";
        return est;
    }
    // indicator fallback for bodies without the origin interior
    auto g = MeasureModel::gaussian(body.dim());
    Eigen::MatrixXd t_inv = transform.inverse();
    auto rm = g.region_measure(
        [&](const Eigen::VectorXd& z) { return body.contains(t_inv * z); }, budget, seed);
    rm.note = "indicator";
    return rm;
}

std::pair<AffineNormalization, ConvexBody> isotropic_transform(const ConvexBody& body,
                                                               std::int64_t budget,
                                                               std::uint64_t seed) {
    auto mu = MeasureModel::uniform_on(body);
    auto [bary, cov] = mu.barycenter_covariance(budget, substream_seed(seed, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff())
        throw NumericError("isotropic_transform: covariance estimate not positive definite");
    Eigen::MatrixXd w = es.eigenvectors() *
                        es.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                        es.eigenvectors().transpose();
    auto vol = estimate_volume(body, budget, substream_seed(seed, 2));
    double image_vol = w.determinant() * vol.value;
    double s = std::pow(image_vol, -1.0 / body.dim());
    AffineNormalization map{s * w, bary};
    ConvexBody image = ConvexBody::linear_image(ConvexBody::translate(body, -bary), map.linear);
    return {map, image};
}

PositionReport gaussian_m_position(const ConvexBody& body, const MPositionOptions& opts) {
    const int n = body.dim();
    PositionReport rep;
    rep.seed = opts.seed;
    rep.transform = UnimodularSPD::identity(n);

    // Symmetrized, centered core K0 = (K - b) cap (b - K); kept structural
    // when the body is already origin-symmetric.
    ConvexBody k0 = [&]() {
        if (body.centrally_symmetric()) return body;
        Eigen::VectorXd b = barycenter(body, opts.budget, substream_seed(opts.seed, 11));
        ConvexBody centered = ConvexBody::translate(body, -b);
        ConvexBody reflected =
            ConvexBody::linear_image(centered, -Eigen::MatrixXd::Identity(n, n));
        return ConvexBody::intersection({centered, reflected});
    }();
    auto vol = estimate_volume(k0, opts.budget, substream_seed(opts.seed, 12));
    if (!(vol.value > 0.0)) throw NumericError("gaussian_m_position: volume estimate failed");
    const double alpha = std::pow(vol.value, -1.0 / n);  // scale K0 to volume one

    auto basis = tracefree_basis(n);
    const int p = static_cast<int>(basis.size());
    Eigen::VectorXd s_param = Eigen::VectorXd::Zero(p);
    auto unpack = [&](const Eigen::VectorXd& sp) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < p; ++k) s += sp[k] * basis[k];
        return s;
    };
    // objective at parameter sp over a fixed direction pool
    auto eval = [&](const Eigen::VectorXd& sp, const Eigen::MatrixXd& dirs, double* se) {
        Eigen::MatrixXd t_inv = sym_exp(-unpack(sp));
        return radial_objective(k0, t_inv, alpha, dirs, se);
    };

    const int phase_split = (2 * opts.max_iters) / 3;
    const std::int64_t coarse = std::max<std::int64_t>(opts.budget / 8, 20000);
    double step = opts.step0;
    Eigen::VectorXd polyak_sum = Eigen::VectorXd::Zero(p);
    int polyak_count = 0;
    bool converged = false;

    for (int it = 0; it < opts.max_iters; ++it) {
        const bool fine = it >= phase_split;
        const std::int64_t count = fine ? opts.budget : coarse;
        const double h = fine ? 0.5 * opts.fd_step : opts.fd_step;
        Eigen::MatrixXd dirs = sphere_directions(n, count, substream_seed(opts.seed, 100 + it));

        double f0_se = 0.0;
        double f0 = eval(s_param, dirs, &f0_se);
        rep.objective_trace.push_back(f0);

        Eigen::VectorXd grad(p), grad_se(p);
        for (int k = 0; k < p; ++k) {
            Eigen::VectorXd sp = s_param, sm = s_param;
            sp[k] += h;
            sm[k] -= h;
            // same pool on both sides: difference is smooth in the parameter
            double se_p = 0.0, se_m = 0.0;
            double fp = eval(sp, dirs, &se_p);
            double fm = eval(sm, dirs, &se_m);
            grad[k] = (fp - fm) / (2.0 * h);
            grad_se[k] = std::sqrt(se_p * se_p + se_m * se_m) / (2.0 * h);
        }
        ++rep.iterations;

        double noise = grad_se.norm();
        if (fine && grad.norm() <= opts.grad_noise_mult * noise) {
            polyak_sum += s_param;
            ++polyak_count;
            converged = true;
            break;
        }
        // ascent with a same-pool decrease check
        Eigen::VectorXd cand = s_param + step * grad;
        double fc = eval(cand, dirs, nullptr);
        int halvings = 0;
        while (fc < f0 - 2.0 * f0_se && halvings < 5) {
            step *= 0.5;
            cand = s_param + step * grad;
            fc = eval(cand, dirs, nullptr);
            ++halvings;
        }
        s_param = cand;
        if (halvings == 0) step = std::min(step * 1.1, opts.step0);
        if (fine) {
            polyak_sum += s_param;
            ++polyak_count;
        }
    }
    if (polyak_count > 0) s_param = polyak_sum / static_cast<double>(polyak_count);

    rep.converged = converged;
    rep.transform = UnimodularSPD::from_tracefree(unpack(s_param));
    auto final_est = gaussian_body_measure(
        ConvexBody::linear_image(k0, alpha * Eigen::MatrixXd::Identity(n, n)),
        rep.transform.matrix(), 2 * opts.budget, substream_seed(opts.seed, 7777));
    rep.objective_value = final_est.value;
    rep.objective_std_error = final_est.std_error;
    return rep;
}

CheckRecord verify_symmetry_commutation(const ConvexBody& body,
                                        const std::vector<Eigen::MatrixXd>& isometries,
                                        const UnimodularSPD& transform, double tol,
                                        std::int64_t budget, std::uint64_t seed) {
    const int n = body.dim();
    auto mu = MeasureModel::uniform_on(body);
    auto pts = mu.sample(budget, seed);
    for (const auto& m : isometries) {
        if ((m.transpose() * m - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-9)
            throw PreconditionError("verify_symmetry_commutation: matrix is not an isometry");
        std::int64_t misses = 0;
        for (const auto& x : pts)
            if (!body.contains(m * x)) ++misses;
        if (static_cast<double>(misses) > 1e-3 * static_cast<double>(budget))
            throw PreconditionError(
                "verify_symmetry_commutation: isometry fails the body self-map check");
    }
    double worst = 0.0;
    for (const auto& m : isometries)
        worst = std::max(worst, operator_norm(transform.matrix() * m - m * transform.matrix()));
    CheckRecord rec;
    rec.name = "symmetry_commutation";
    rec.tag = "symmetry-commutation";
    rec.tolerance = tol;
    rec.quantities["max_commutator_norm"] = worst;
    rec.quantities["isometries"] = static_cast<double>(isometries.size());
    rec.status = worst <= tol ? CheckStatus::Pass : CheckStatus::Fail;
    return rec;
}

MCEstimate isotropic_constant(const MeasureModel& mu, std::int64_t budget, std::uint64_t seed) {
    const int n = mu.dim();
    double log_sup = 0.0;
    double log_sup_se = 0.0;
    switch (mu.kind()) {
        case MeasureKind::GaussianStd:
            log_sup = -0.5 * n * std::log(2.0 * M_PI);
            break;
        case MeasureKind::UniformOnBody: {
            auto vol = estimate_volume(*mu.body(), budget, substream_seed(seed, 1));
            log_sup = -std::log(vol.value);
            log_sup_se = vol.std_error / vol.value;
            break;
        }
        case MeasureKind::GaussianRestricted: {
            const ConvexBody& k = *mu.body();
            if (!k.contains(Eigen::VectorXd::Zero(n)))
                throw PreconditionError("isotropic_constant: restricted body must contain 0");
            auto g = MeasureModel::gaussian(n);
            auto gm = g.region_measure([&](const Eigen::VectorXd& z) { return k.contains(z); },
                                       budget, substream_seed(seed, 1));
            log_sup = -0.5 * n * std::log(2.0 * M_PI) - std::log(gm.value);
            log_sup_se = gm.std_error / gm.value;
            break;
        }
        case MeasureKind::Custom:
            throw PreconditionError("isotropic_constant: density mode unknown for custom kinds");
    }
    auto [bary, cov] = mu.barycenter_covariance(budget, substream_seed(seed, 2));
    (void)bary;
    double log_det = std::log(cov.determinant());
    // first-order propagation of the covariance noise into log det
    Eigen::MatrixXd cinv = cov.inverse();
    double var_logdet = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double var_ij = (cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) /
                            static_cast<double>(budget);
            var_logdet += cinv(i, j) * cinv(i, j) * var_ij;
        }
    MCEstimate est;
    est.value = std::exp(log_sup / n + log_det / (2.0 * n));
    est.std_error = est.value * std::sqrt(std::pow(log_sup_se / n, 2) +
                                          var_logdet / std::pow(2.0 * n, 2));
    est.samples = budget;
    est.seed = seed;
    return est;
}

}  // namespace waistlab
