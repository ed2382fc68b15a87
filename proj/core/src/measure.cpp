#include "waistlab/measure.hpp"

#include <cmath>
#include <mutex>

#include "waistlab/linalg.hpp"
#include "waistlab/rng.hpp"
#include "waistlab/specfun.hpp"

namespace waistlab {

namespace {
constexpr std::int64_t kWalkBlock = 4096;
constexpr double kAcceptanceFloor = 1e-4;
constexpr std::int64_t kPilotProposals = 200000;
}  // namespace

struct MeasureModel::Impl {
    MeasureKind kind;
    int dim = 0;
    std::optional<ConvexBody> body;
    std::function<double(const Eigen::VectorXd&)> log_density_fn;
    WalkParams walk;

    // proposal box for rejection kinds
    Eigen::VectorXd box_lo, box_hi;

    mutable std::once_flag norm_once;
    mutable double normalization = 1.0;  // cached total mass of the base density over the body

    Impl() = default;
    Impl(const Impl& o)
        : kind(o.kind), dim(o.dim), body(o.body), log_density_fn(o.log_density_fn),
          walk(o.walk), box_lo(o.box_lo), box_hi(o.box_hi) {}
};

namespace {

using Impl = MeasureModel::Impl;

double gaussian_log_density(const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); }

// Draw one uniform point in the proposal box.
Eigen::VectorXd box_point(const Impl& im, Rng& rng) {
    Eigen::VectorXd x(im.dim);
    for (int i = 0; i < im.dim; ++i) x[i] = rng.uniform(im.box_lo[i], im.box_hi[i]);
    return x;
}

bool direct_kind(const Impl& im) { return im.kind == MeasureKind::GaussianStd; }

// Acceptance pilot for rejection kinds; deterministic in the seed.
bool use_walk(const Impl& im, std::uint64_t seed) {
    if (direct_kind(im) || im.kind == MeasureKind::Custom) return im.kind == MeasureKind::Custom;
    Rng rng(substream_seed(seed, 0xFA11BACULL));
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < kPilotProposals; ++i) {
        Eigen::VectorXd x = im.kind == MeasureKind::UniformOnBody ? box_point(im, rng)
                                                                  : rng.normal_vec(im.dim);
        if (im.body->contains(x)) ++hits;
        if (hits >= 64) return false;  // well above the floor, stop early
    }
    return static_cast<double>(hits) / static_cast<double>(kPilotProposals) < kAcceptanceFloor;
}

double walk_step_size(const Impl& im) {
    double extent = (im.box_hi - im.box_lo).minCoeff();
    return im.walk.step_scale * extent / std::sqrt(static_cast<double>(im.dim));
}

// One Metropolis sweep targeting the model density inside the support.
// Returns the number of accepted steps.
int walk_advance(const Impl& im, Eigen::VectorXd& x, double& logd, double step, Rng& rng) {
    int accepted = 0;
    for (int t = 0; t < im.walk.thinning; ++t) {
        Eigen::VectorXd y = x + step * rng.ball_point(im.dim, 1.0);
        double ly = im.log_density_fn ? im.log_density_fn(y)
                                      : (im.kind == MeasureKind::GaussianRestricted
                                             ? gaussian_log_density(y)
                                             : 0.0);
        bool inside = !im.body || im.body->contains(y);
        if (!inside) continue;
        if (ly >= logd || rng.uniform() < std::exp(ly - logd)) {
            x = y;
            logd = ly;
            ++accepted;
        }
    }
    return accepted;
}

// Fill `out` columns [at, at+count) with samples from substream `stream_idx`.
void fill_block(const Impl& im, bool walk_mode, std::uint64_t seed, std::uint64_t stream_idx,
                Eigen::MatrixXd& out, std::int64_t at, std::int64_t count) {
    Rng rng = Rng::substream(seed, stream_idx);
    if (direct_kind(im)) {
        for (std::int64_t i = 0; i < count; ++i) out.col(at + i) = rng.normal_vec(im.dim);
        return;
    }
    if (!walk_mode) {
        // The pilot promised acceptance >= ~1e-4 up to noise; size the retry
        // budget so borderline cases still complete.
        const std::int64_t cap = count * 30000 + 1000000;
        std::int64_t proposals = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            for (;;) {
                if (++proposals > cap)
                    throw NumericError(
                        "sample: rejection acceptance below retry budget (estimate < " +
                        std::to_string(static_cast<double>(i) / static_cast<double>(proposals)) +
                        ")");
                Eigen::VectorXd x = im.kind == MeasureKind::UniformOnBody
                                        ? box_point(im, rng)
                                        : rng.normal_vec(im.dim);
                if (im.body->contains(x)) {
                    out.col(at + i) = x;
                    break;
                }
            }
        }
        return;
    }
    // Independent walk per block keeps the substream contract. During burn-in
    // the step size halves whenever acceptance drops below 20%.
    Eigen::VectorXd x = im.body ? im.body->interior_point() : Eigen::VectorXd::Zero(im.dim);
    double logd = im.log_density_fn ? im.log_density_fn(x)
                                    : (im.kind == MeasureKind::GaussianRestricted
                                           ? gaussian_log_density(x)
                                           : 0.0);
    double step = walk_step_size(im);
    int window_acc = 0, window_tries = 0;
    for (int b = 0; b < im.walk.burn_in; ++b) {
        window_acc += walk_advance(im, x, logd, step, rng);
        window_tries += im.walk.thinning;
        if (window_tries >= 40) {
            if (window_acc < window_tries / 5 && step > 1e-12) step *= 0.5;
            window_acc = 0;
            window_tries = 0;
        }
    }
    for (std::int64_t i = 0; i < count; ++i) {
        walk_advance(im, x, logd, step, rng);
        out.col(at + i) = x;
    }
}

// Streaming visitor over the sample stream: deterministic block partition.
template <typename F>
void for_each_sample(const Impl& im, std::int64_t count, std::uint64_t seed, F&& visit) {
    bool walk_mode = use_walk(im, seed);
    std::int64_t block = walk_mode ? kWalkBlock : static_cast<std::int64_t>(kSubstreamBlock);
    Eigen::MatrixXd buf(im.dim, block);
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    while (done < count) {
        std::int64_t take = std::min(block, count - done);
        fill_block(im, walk_mode, seed, stream, buf, 0, take);
        for (std::int64_t i = 0; i < take; ++i) visit(buf.col(i));
        done += take;
        ++stream;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

MeasureModel MeasureModel::gaussian(int dim) {
    if (dim < 1) throw PreconditionError("gaussian: dim >= 1");
    auto im = std::make_shared<Impl>();
    im->kind = MeasureKind::GaussianStd;
    im->dim = dim;
    return MeasureModel(im);
}

MeasureModel MeasureModel::uniform_on(ConvexBody body) {
    auto im = std::make_shared<Impl>();
    im->kind = MeasureKind::UniformOnBody;
    im->dim = body.dim();
    body.bounding_box(im->box_lo, im->box_hi);
    im->body = std::move(body);
    return MeasureModel(im);
}

MeasureModel MeasureModel::gaussian_restricted(ConvexBody body) {
    auto im = std::make_shared<Impl>();
    im->kind = MeasureKind::GaussianRestricted;
    im->dim = body.dim();
    body.bounding_box(im->box_lo, im->box_hi);
    im->body = std::move(body);
    return MeasureModel(im);
}

MeasureModel MeasureModel::custom(int dim, std::function<double(const Eigen::VectorXd&)> log_density,
                                  ConvexBody support) {
    if (support.dim() != dim) throw PreconditionError("custom: support dimension mismatch");
    auto im = std::make_shared<Impl>();
    im->kind = MeasureKind::Custom;
    im->dim = dim;
    im->log_density_fn = std::move(log_density);
    support.bounding_box(im->box_lo, im->box_hi);
    im->body = std::move(support);
    return MeasureModel(im);
}

MeasureModel MeasureModel::with_walk_params(const WalkParams& params) const {
    auto im = std::make_shared<Impl>(*impl_);
    im->walk = params;
    return MeasureModel(im);
}

int MeasureModel::dim() const { return impl_->dim; }
MeasureKind MeasureModel::kind() const { return impl_->kind; }
const std::optional<ConvexBody>& MeasureModel::body() const { return impl_->body; }

bool MeasureModel::is_symmetric() const {
    switch (impl_->kind) {
        case MeasureKind::GaussianStd:
            return true;
        case MeasureKind::UniformOnBody:
        case MeasureKind::GaussianRestricted:
            return impl_->body->centrally_symmetric();
        case MeasureKind::Custom:
            return false;
    }
    return false;
}

double MeasureModel::log_density(const Eigen::VectorXd& x) const {
    const Impl& im = *impl_;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    switch (im.kind) {
        case MeasureKind::GaussianStd:
            return gaussian_log_density(x);
        case MeasureKind::UniformOnBody:
            return im.body->contains(x) ? 0.0 : neg_inf;
        case MeasureKind::GaussianRestricted:
            return im.body->contains(x) ? gaussian_log_density(x) : neg_inf;
        case MeasureKind::Custom:
            return im.body->contains(x) ? im.log_density_fn(x) : neg_inf;
    }
    return neg_inf;
}

double MeasureModel::density(const Eigen::VectorXd& x) const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case MeasureKind::GaussianStd:
            return std::exp(-0.5 * x.squaredNorm()) / std::pow(2.0 * M_PI, 0.5 * im.dim);
        case MeasureKind::UniformOnBody: {
            std::call_once(im.norm_once, [&] {
                auto v = estimate_volume(*im.body, 400000, 0xA11CEull);
                im.normalization = v.value;
            });
            return im.body->contains(x) ? 1.0 / im.normalization : 0.0;
        }
        case MeasureKind::GaussianRestricted: {
            std::call_once(im.norm_once, [&] {
                auto g = MeasureModel::gaussian(im.dim);
                const ConvexBody& k = *im.body;
                im.normalization =
                    g.region_measure([&](const Eigen::VectorXd& y) { return k.contains(y); },
                                     400000, 0xA11CEull)
                        .value;
            });
            if (!im.body->contains(x)) return 0.0;
            return std::exp(-0.5 * x.squaredNorm()) /
                   (std::pow(2.0 * M_PI, 0.5 * im.dim) * im.normalization);
        }
        case MeasureKind::Custom:
            return im.body->contains(x) ? std::exp(im.log_density_fn(x)) : 0.0;
    }
    return 0.0;
}

Eigen::MatrixXd MeasureModel::sample_matrix(std::int64_t count, std::uint64_t seed) const {
    if (count < 1) throw PreconditionError("sample: count >= 1");
    Eigen::MatrixXd out(impl_->dim, count);
    std::int64_t at = 0;
    for_each_sample(*impl_, count, seed, [&](const auto& col) { out.col(at++) = col; });
    return out;
}

std::vector<Eigen::VectorXd> MeasureModel::sample(std::int64_t count, std::uint64_t seed) const {
    Eigen::MatrixXd m = sample_matrix(count, seed);
    std::vector<Eigen::VectorXd> out(count);
    for (std::int64_t i = 0; i < count; ++i) out[i] = m.col(i);
    return out;
}

MCEstimate MeasureModel::region_measure(const std::function<bool(const Eigen::VectorXd&)>& region,
                                        std::int64_t budget, std::uint64_t seed) const {
    std::int64_t hits = 0;
    for_each_sample(*impl_, budget, seed, [&](const auto& col) {
        if (region(col)) ++hits;
    });
    double p = static_cast<double>(hits) / static_cast<double>(budget);
    MCEstimate est;
    est.value = p;
    est.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(budget));
    if (hits == 0 || hits == budget)
        est.std_error = 3.0 / static_cast<double>(budget);  // rule-of-three bound
    est.samples = budget;
    est.seed = seed;
    return est;
}

MCEstimate MeasureModel::region_measure_grid(
    const std::function<bool(const Eigen::VectorXd&)>& region, int resolution) const {
    const Impl& im = *impl_;
    if (im.dim > 3) throw PreconditionError("region_measure_grid: dim <= 3 only");
    Eigen::VectorXd lo = im.box_lo, hi = im.box_hi;
    if (im.kind == MeasureKind::GaussianStd) {
        lo = Eigen::VectorXd::Constant(im.dim, -8.5);
        hi = Eigen::VectorXd::Constant(im.dim, 8.5);
    }
    auto eval = [&](int res) {
        double tot = 0.0, in = 0.0;
        Eigen::VectorXd x(im.dim);
        std::vector<int> idx(im.dim, 0);
        std::int64_t cells = 1;
        for (int i = 0; i < im.dim; ++i) cells *= res;
        for (std::int64_t c = 0; c < cells; ++c) {
            std::int64_t rem = c;
            for (int i = 0; i < im.dim; ++i) {
                int k = static_cast<int>(rem % res);
                rem /= res;
                x[i] = lo[i] + (hi[i] - lo[i]) * (k + 0.5) / res;
            }
            double w = std::exp(log_density(x));
            if (!(w > 0.0)) continue;
            tot += w;
            if (region(x)) in += w;
        }
        return tot > 0.0 ? in / tot : 0.0;
    };
    double coarse = eval(resolution / 2);
    double fine = eval(resolution);
    MCEstimate est;
    est.value = fine;
    est.std_error = std::abs(fine - coarse);
    est.samples = static_cast<std::int64_t>(std::pow(resolution, im.dim));
    est.seed = 0;
    est.note = "grid";
    return est;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> MeasureModel::barycenter_covariance(
    std::int64_t budget, std::uint64_t seed) const {
    const int n = impl_->dim;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
    for_each_sample(*impl_, budget, seed, [&](const auto& col) {
        sum += col;
        sq += col * col.transpose();
    });
    Eigen::VectorXd mean = sum / static_cast<double>(budget);
    Eigen::MatrixXd cov = sq / static_cast<double>(budget) - mean * mean.transpose();
    return {mean, symmetrize(cov)};
}

MCEstimate MeasureModel::moment(const Eigen::VectorXd& direction, double p, std::int64_t budget,
                                std::uint64_t seed) const {
    if (p < 1.0) throw PreconditionError("moment: p >= 1 required");
    if (direction.size() != impl_->dim) throw PreconditionError("moment: direction dim mismatch");
    double center = 0.0;
    if (!is_symmetric()) {
        // first streaming pass for the barycenter projection (same stream)
        double s = 0.0;
        for_each_sample(*impl_, budget, seed, [&](const auto& col) { s += direction.dot(col); });
        center = s / static_cast<double>(budget);
    }
    double sum = 0.0, sum_sq = 0.0;
    for_each_sample(*impl_, budget, seed, [&](const auto& col) {
        double y = std::pow(std::abs(direction.dot(col) - center), p);
        sum += y;
        sum_sq += y * y;
    });
    double mp = sum / static_cast<double>(budget);
    double var = std::max(sum_sq / static_cast<double>(budget) - mp * mp, 0.0);
    double se_mp = std::sqrt(var / static_cast<double>(budget));
    MCEstimate est;
    est.value = std::pow(mp, 1.0 / p);
    est.std_error = mp > 0.0 ? se_mp * est.value / (p * mp) : se_mp;
    est.samples = budget;
    est.seed = seed;
    if (est.value > 0.0 && est.std_error > 0.25 * est.value)
        est.note = "std_error exceeds 25% of value; p too large for budget";
    return est;
}

// ---------------------------------------------------------------------------

MCEstimate estimate_volume(const ConvexBody& body, std::int64_t budget, std::uint64_t seed,
                           bool use_exact_when_available) {
    if (use_exact_when_available) {
        if (auto v = body.exact_volume()) {
            MCEstimate est;
            est.value = *v;
            est.samples = 0;
            est.seed = seed;
            est.note = "exact";
            return est;
        }
    }
    Eigen::VectorXd lo, hi;
    body.bounding_box(lo, hi);
    double box_vol = (hi - lo).prod();
    std::int64_t hits = 0;
    const int n = body.dim();
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    Eigen::VectorXd x(n);
    while (done < budget) {
        std::int64_t take = std::min<std::int64_t>(kSubstreamBlock, budget - done);
        Rng rng = Rng::substream(seed, stream++);
        for (std::int64_t i = 0; i < take; ++i) {
            for (int k = 0; k < n; ++k) x[k] = rng.uniform(lo[k], hi[k]);
            if (body.contains(x)) ++hits;
        }
        done += take;
    }
    double p = static_cast<double>(hits) / static_cast<double>(budget);
    MCEstimate est;
    est.value = box_vol * p;
    est.std_error = box_vol * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(budget));
    est.samples = budget;
    est.seed = seed;
    return est;
}

Eigen::VectorXd barycenter(const ConvexBody& body, std::int64_t budget, std::uint64_t seed) {
    if (auto b = body.structural_barycenter()) return *b;
    auto mu = MeasureModel::uniform_on(body);
    return mu.barycenter_covariance(budget, seed).first;
}

}  // namespace waistlab
