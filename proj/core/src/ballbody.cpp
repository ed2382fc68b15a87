#include "waistlab/ballbody.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "waistlab/rng.hpp"
#include "waistlab/specfun.hpp"

namespace waistlab {

double radial_moment(const DensityFn& density, int dim, const Eigen::VectorXd& theta, double p,
                     double quad_tol) {
    if (p < 0.0) throw PreconditionError("radial_moment: p >= 0");
    if (theta.size() != dim) throw PreconditionError("radial_moment: direction dim mismatch");
    double phi0 = density(Eigen::VectorXd::Zero(dim));
    if (!(phi0 > 0.0)) throw PreconditionError("radial_moment: density(0) must be positive");
    auto g = [&](double r) { return density(r * theta) * std::pow(r, dim + p - 1.0); };
    double cutoff = ray_cutoff(g, 1.0);
    auto quad = integrate(g, 0.0, cutoff, quad_tol);
    if (!(quad.value >= 0.0) || !std::isfinite(quad.value))
        throw NumericError("radial_moment: quadrature failed along the ray");
    return std::pow((dim + p) / phi0 * quad.value, 1.0 / (dim + p));
}

struct RadialBody::Impl {
    int dim = 0;
    DensityFn density;
    double quad_tol = 1e-10;
    Eigen::MatrixXd dirs;   // dim x m
    Eigen::VectorXd radii;  // table values of r_2
    mutable std::mutex cache_mutex;
    mutable std::unordered_map<std::uint64_t, double> cache;
};

namespace {

std::uint64_t direction_key(const Eigen::VectorXd& theta) {
    std::uint64_t h = 0x8e51ac31f2b7d943ULL;
    for (int i = 0; i < theta.size(); ++i) {
        auto q = static_cast<std::int64_t>(std::llround(theta[i] * 1e12));
        h = splitmix64(h ^ static_cast<std::uint64_t>(q));
    }
    return h;
}

}  // namespace

int RadialBody::dim() const { return impl_->dim; }
const Eigen::MatrixXd& RadialBody::directions() const { return impl_->dirs; }
const Eigen::VectorXd& RadialBody::radii() const { return impl_->radii; }
double RadialBody::max_table_radius() const { return impl_->radii.maxCoeff(); }

double RadialBody::radial(const Eigen::VectorXd& theta) const {
    std::uint64_t key = direction_key(theta);
    {
        std::lock_guard<std::mutex> lock(impl_->cache_mutex);
        auto it = impl_->cache.find(key);
        if (it != impl_->cache.end()) return it->second;
    }
    double r = radial_moment(impl_->density, impl_->dim, theta, 2.0, impl_->quad_tol);
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    impl_->cache.emplace(key, r);
    return r;
}

bool RadialBody::contains(const Eigen::VectorXd& x) const {
    double r = x.norm();
    if (r == 0.0) return true;
    return r <= radial(x / r);
}

ConvexBody RadialBody::table_body() const {
    return ConvexBody::radial_table(impl_->dirs, impl_->radii, /*symmetric=*/true,
                                    1.2 * max_table_radius());
}

MCEstimate RadialBody::volume(std::int64_t direction_budget, std::uint64_t seed) const {
    const int n = impl_->dim;
    MCEstimate est;
    est.seed = seed;
    if (n == 1) {
        Eigen::VectorXd plus(1), minus(1);
        plus << 1.0;
        minus << -1.0;
        est.value = radial(plus) + radial(minus);
        est.samples = 2;
        est.note = "exact";
        return est;
    }
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    while (done < direction_budget) {
        Rng rng = Rng::substream(seed, stream++);
        std::int64_t take = std::min<std::int64_t>(1024, direction_budget - done);
        for (std::int64_t i = 0; i < take; ++i) {
            double rho = radial(rng.unit_vec(n));
            double v = std::pow(rho, n);
            sum += v;
            sum_sq += v * v;
        }
        done += take;
    }
    double mean = sum / direction_budget;
    double var = std::max(sum_sq / direction_budget - mean * mean, 0.0);
    double beta = unit_ball_volume(n);
    est.value = beta * mean;
    est.std_error = beta * std::sqrt(var / direction_budget);
    est.samples = direction_budget;
    return est;
}

Eigen::MatrixXd sphere_table(int dim, int count) {
    if (dim == 1) {
        Eigen::MatrixXd t(1, 2);
        t << 1.0, -1.0;
        return t;
    }
    Eigen::MatrixXd t(dim, count);
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            double a = 2.0 * M_PI * i / count;
            t(0, i) = std::cos(a);
            t(1, i) = std::sin(a);
        }
        return t;
    }
    if (dim == 3) {
        // Fibonacci lattice
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            double z = 1.0 - (2.0 * i + 1.0) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double a = 2.0 * M_PI * i / golden;
            t(0, i) = r * std::cos(a);
            t(1, i) = r * std::sin(a);
            t(2, i) = z;
        }
        return t;
    }
    Rng rng(0x5EEDULL);
    for (int i = 0; i < count; ++i) t.col(i) = rng.unit_vec(dim);
    return t;
}

RadialBody ball_body(const DensityFn& density, int dim, const Eigen::MatrixXd& direction_table,
                     double quad_tol) {
    if (direction_table.rows() != dim || direction_table.cols() < 1)
        throw PreconditionError("ball_body: direction table shape mismatch");
    // evenness and log-concavity probes
    Rng rng(0xE7E7ULL);
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd x = 2.0 * rng.normal_vec(dim);
        double fp = density(x), fm = density(-x);
        if (std::abs(fp - fm) > 1e-9 * (std::abs(fp) + std::abs(fm) + 1e-300))
            throw PreconditionError("ball_body: density is not even");
        Eigen::VectorXd y = 2.0 * rng.normal_vec(dim);
        double fx = density(x), fy = density(y), fmid = density(0.5 * (x + y));
        if (fx > 0.0 && fy > 0.0) {
            if (!(std::log(fmid + 1e-300) >= 0.5 * (std::log(fx) + std::log(fy)) - 1e-7))
                throw PreconditionError("ball_body: density fails the log-concavity probe");
        }
    }
    auto im = std::make_shared<RadialBody::Impl>();
    im->dim = dim;
    im->density = density;
    im->quad_tol = quad_tol;
    im->dirs = direction_table;
    im->radii.resize(direction_table.cols());
    for (int j = 0; j < direction_table.cols(); ++j)
        im->radii[j] = radial_moment(density, dim, direction_table.col(j), 2.0, quad_tol);
    RadialBody body(im);
    // seed the cache with the table
    for (int j = 0; j < direction_table.cols(); ++j) body.radial(direction_table.col(j));
    return body;
}

VerificationReport ball_body_invariants(const RadialBody& body, const DensityFn& density,
                                        bool source_isotropic, std::int64_t budget,
                                        std::uint64_t seed) {
    const int n = body.dim();
    VerificationReport rep;
    rep.command = "ball_body_invariants";
    rep.seed = seed;

    // (a) two-sided volume bound with the exact constant ((n+2)!)^{n/(n+2)}/n!
    {
        double phi0 = density(Eigen::VectorXd::Zero(n));
        auto vol = body.volume(std::max<std::int64_t>(budget / 8, 2048), substream_seed(seed, 1));
        double hi = std::exp((static_cast<double>(n) / (n + 2)) * std::lgamma(n + 3.0) -
                             std::lgamma(n + 1.0));
        double prod = phi0 * vol.value;
        double band = 3.0 * phi0 * vol.std_error;
        CheckRecord rec;
        rec.name = "normalized_volume_bounds";
        rec.tag = "ball-body-volume";
        rec.quantities["phi0_times_volume"] = prod;
        rec.quantities["lower"] = 1.0;
        rec.quantities["upper"] = hi;
        rec.std_errors["phi0_times_volume"] = phi0 * vol.std_error;
        rec.status = (prod >= 1.0 - band - 1e-9 && prod <= hi + band + 1e-9)
                         ? CheckStatus::Pass
                         : CheckStatus::Fail;
        rep.add(rec);
    }

    // sample the body once for (b) and (c)
    auto table = body.table_body();
    std::int64_t keep = std::min<std::int64_t>(budget, 4000);
    std::vector<Eigen::VectorXd> pts;
    {
        double radius = 1.05 * body.max_table_radius();
        Rng rng(substream_seed(seed, 2));
        std::int64_t guard = 0;
        while (static_cast<std::int64_t>(pts.size()) < keep && ++guard < keep * 4000) {
            Eigen::VectorXd x = rng.ball_point(n, radius);
            if (body.contains(x)) pts.push_back(x);
        }
    }

    // (b) support inclusion: body within the closed support of the density
    {
        std::int64_t violations = 0;
        for (const auto& x : pts)
            if (!(density((1.0 - 1e-9) * x) > 0.0)) ++violations;
        CheckRecord rec;
        rec.name = "support_inclusion";
        rec.tag = "ball-body-support";
        rec.quantities["sampled_points"] = static_cast<double>(pts.size());
        rec.quantities["violations"] = static_cast<double>(violations);
        rec.status = violations == 0 ? CheckStatus::Pass : CheckStatus::Fail;
        rep.add(rec);
    }

    // (c) isotropy is inherited
    if (source_isotropic && !pts.empty()) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
        for (const auto& x : pts) cov += x * x.transpose();
        cov /= static_cast<double>(pts.size());
        double diag_mean = cov.trace() / n;
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) /
                                      static_cast<double>(pts.size()));
                double dev = (i == j) ? std::abs(cov(i, i) - diag_mean) : std::abs(cov(i, j));
                worst = std::max(worst, se > 0.0 ? dev / se : 0.0);
            }
        CheckRecord rec;
        rec.name = "isotropy_inherited";
        rec.tag = "ball-body-isotropy";
        rec.tolerance = 3.0;
        rec.quantities["max_deviation_in_se"] = worst;
        rec.status = worst <= 3.0 ? CheckStatus::Pass : CheckStatus::Fail;
        rep.add(rec);
    }
    return rep;
}

}  // namespace waistlab
