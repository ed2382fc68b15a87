#include "waistlab/body.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>

#include "waistlab/linalg.hpp"
#include "waistlab/rng.hpp"

namespace waistlab {

struct ConvexBody::Impl {
    BodyKind kind;
    int dim = 0;
    std::string name;

    // Ball
    double radius = 0.0;
    // Box
    Eigen::VectorXd half_widths;
    // HPolytope
    Eigen::MatrixXd normals;
    Eigen::VectorXd offsets;
    std::optional<double> given_radius;
    // Ellipsoid
    Eigen::MatrixXd shape;
    Eigen::MatrixXd shape_inv;
    Eigen::VectorXd center;
    // Intersection
    std::vector<ConvexBody> parts;
    // LinearImage / Translate
    std::optional<ConvexBody> base;
    Eigen::MatrixXd map;
    Eigen::MatrixXd map_inv;
    Eigen::VectorXd shift;
    // RadialTable
    Eigen::MatrixXd table_dirs;  // dim x m
    Eigen::VectorXd table_radii;
    bool table_symmetric = false;

    mutable std::once_flag vertex_once;
    mutable std::vector<Eigen::VectorXd> vertex_cache;
    mutable std::once_flag origin_once;
    mutable bool origin_interior_cache = false;

    Impl() = default;
    Impl(const Impl& o)
        : kind(o.kind), dim(o.dim), name(o.name), radius(o.radius),
          half_widths(o.half_widths), normals(o.normals), offsets(o.offsets),
          given_radius(o.given_radius), shape(o.shape), shape_inv(o.shape_inv),
          center(o.center), parts(o.parts), base(o.base), map(o.map),
          map_inv(o.map_inv), shift(o.shift), table_dirs(o.table_dirs),
          table_radii(o.table_radii), table_symmetric(o.table_symmetric) {}
};

namespace {

using Impl = ConvexBody::Impl;

double table_radial(const Impl& im, const Eigen::VectorXd& theta) {
    // Nearest tabulated direction; adequate for the dense tables this kind is
    // exported with (documented reload approximation).
    double best = -2.0;
    int arg = 0;
    for (int j = 0; j < im.table_dirs.cols(); ++j) {
        double c = im.table_dirs.col(j).dot(theta);
        if (im.table_symmetric) c = std::abs(c);
        if (c > best) { best = c; arg = j; }
    }
    return im.table_radii[arg];
}

}  // namespace

// ---------------------------------------------------------------------------
// factories

ConvexBody ConvexBody::ball(int dim, double radius) {
    if (dim < 1 || radius <= 0.0) throw PreconditionError("ball: need dim >= 1, radius > 0");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::Ball;
    im->dim = dim;
    im->radius = radius;
    return ConvexBody(im);
}

ConvexBody ConvexBody::box(const Eigen::VectorXd& half_widths) {
    if (half_widths.size() < 1 || half_widths.minCoeff() <= 0.0)
        throw PreconditionError("box: half-widths must be positive");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::Box;
    im->dim = static_cast<int>(half_widths.size());
    im->half_widths = half_widths;
    return ConvexBody(im);
}

ConvexBody ConvexBody::h_polytope(const Eigen::MatrixXd& normals, const Eigen::VectorXd& offsets,
                                  std::optional<double> bounding_radius) {
    if (normals.rows() != offsets.size() || normals.rows() < 1)
        throw PreconditionError("h_polytope: normals/offsets shape mismatch");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::HPolytope;
    im->dim = static_cast<int>(normals.cols());
    im->normals = normals;
    im->offsets = offsets;
    im->given_radius = bounding_radius;
    return ConvexBody(im);
}

ConvexBody ConvexBody::ellipsoid(const Eigen::MatrixXd& shape, const Eigen::VectorXd& center) {
    if (shape.rows() != shape.cols() || shape.rows() != center.size())
        throw PreconditionError("ellipsoid: shape/center mismatch");
    Eigen::MatrixXd sym = symmetrize(shape);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw PreconditionError("ellipsoid: shape matrix must be positive definite");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::Ellipsoid;
    im->dim = static_cast<int>(center.size());
    im->shape = sym;
    im->shape_inv = sym.inverse();
    im->center = center;
    return ConvexBody(im);
}

ConvexBody ConvexBody::intersection(std::vector<ConvexBody> parts) {
    if (parts.empty()) throw PreconditionError("intersection: no parts");
    int d = parts.front().dim();
    for (const auto& p : parts)
        if (p.dim() != d) throw PreconditionError("intersection: dimension mismatch");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::Intersection;
    im->dim = d;
    im->parts = std::move(parts);
    return ConvexBody(im);
}

ConvexBody ConvexBody::linear_image(ConvexBody base, const Eigen::MatrixXd& map) {
    if (map.rows() != map.cols() || map.rows() != base.dim())
        throw PreconditionError("linear_image: map must be square of the body dimension");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(map);
    if (!lu.isInvertible()) throw PreconditionError("linear_image: map is singular");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::LinearImage;
    im->dim = base.dim();
    im->base = std::move(base);
    im->map = map;
    im->map_inv = lu.inverse();
    return ConvexBody(im);
}

ConvexBody ConvexBody::translate(ConvexBody base, const Eigen::VectorXd& shift) {
    if (shift.size() != base.dim()) throw PreconditionError("translate: shift dimension mismatch");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::Translate;
    im->dim = base.dim();
    im->base = std::move(base);
    im->shift = shift;
    return ConvexBody(im);
}

ConvexBody ConvexBody::radial_table(const Eigen::MatrixXd& directions, const Eigen::VectorXd& radii,
                                    bool symmetric, std::optional<double> bounding_radius) {
    if (directions.cols() != radii.size() || directions.cols() < 1)
        throw PreconditionError("radial_table: directions/radii mismatch");
    if (radii.minCoeff() <= 0.0) throw PreconditionError("radial_table: radii must be positive");
    auto im = std::make_shared<Impl>();
    im->kind = BodyKind::RadialTable;
    im->dim = static_cast<int>(directions.rows());
    im->table_dirs = directions;
    im->table_radii = radii;
    im->table_symmetric = symmetric;
    im->given_radius = bounding_radius;
    return ConvexBody(im);
}

// ---------------------------------------------------------------------------
// basic queries

int ConvexBody::dim() const { return impl_->dim; }
BodyKind ConvexBody::kind() const { return impl_->kind; }
const std::string& ConvexBody::name() const { return impl_->name; }

ConvexBody ConvexBody::named(std::string name) const {
    auto im = std::make_shared<Impl>(*impl_);
    im->name = std::move(name);
    return ConvexBody(im);
}

bool ConvexBody::contains(const Eigen::VectorXd& x) const {
    const Impl& im = *impl_;
    if (x.size() != im.dim) throw PreconditionError("contains: dimension mismatch");
    switch (im.kind) {
        case BodyKind::Ball:
            return x.norm() <= im.radius;
        case BodyKind::Box:
            return (x.array().abs() <= im.half_widths.array()).all();
        case BodyKind::HPolytope:
            return ((im.normals * x - im.offsets).array() <= 0.0).all();
        case BodyKind::Ellipsoid: {
            Eigen::VectorXd d = x - im.center;
            return d.dot(im.shape_inv * d) <= 1.0;
        }
        case BodyKind::Intersection:
            return std::all_of(im.parts.begin(), im.parts.end(),
                               [&](const ConvexBody& p) { return p.contains(x); });
        case BodyKind::LinearImage:
            return im.base->contains(im.map_inv * x);
        case BodyKind::Translate:
            return im.base->contains(x - im.shift);
        case BodyKind::RadialTable: {
            double r = x.norm();
            if (r == 0.0) return true;
            return r <= table_radial(im, x / r);
        }
    }
    return false;
}

bool ConvexBody::origin_interior(double delta) const {
    const Impl& im = *impl_;
    std::call_once(im.origin_once, [&] {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(im.dim);
        bool ok = contains(z);
        for (int i = 0; i < im.dim && ok; ++i) {
            z[i] = delta;
            ok = ok && contains(z);
            z[i] = -delta;
            ok = ok && contains(z);
            z[i] = 0.0;
        }
        im.origin_interior_cache = ok;
    });
    return im.origin_interior_cache;
}

double ConvexBody::gauge(const Eigen::VectorXd& x) const {
    const Impl& im = *impl_;
    if (x.size() != im.dim) throw PreconditionError("gauge: dimension mismatch");
    switch (im.kind) {
        case BodyKind::Ball:
            return x.norm() / im.radius;
        case BodyKind::Box:
            return (x.array().abs() / im.half_widths.array()).maxCoeff();
        case BodyKind::HPolytope: {
            if (im.offsets.minCoeff() <= 0.0) break;  // origin not interior: bisect
            return std::max(0.0, (im.normals * x).cwiseQuotient(im.offsets).maxCoeff());
        }
        case BodyKind::Ellipsoid: {
            if (im.center.norm() > 0.0) break;
            return std::sqrt(std::max(0.0, x.dot(im.shape_inv * x)));
        }
        case BodyKind::Intersection: {
            double g = 0.0;
            for (const auto& p : im.parts) g = std::max(g, p.gauge(x));
            return g;
        }
        case BodyKind::LinearImage:
            return im.base->gauge(im.map_inv * x);
        case BodyKind::RadialTable:
            if (im.table_symmetric) {
                double r = x.norm();
                return r == 0.0 ? 0.0 : r / table_radial(im, x / r);
            }
            break;
        default:
            break;
    }
    // Generic star-shaped bisection on membership.
    if (!origin_interior()) throw PreconditionError("gauge: origin is not interior to the body");
    if (x.norm() == 0.0) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (!contains(x / hi)) {
        hi *= 2.0;
        if (++guard > 200) throw NumericError("gauge: bisection bracket failed (unbounded ray?)");
    }
    double lo = hi;
    guard = 0;
    while (contains(x / lo)) {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;
        if (++guard > 2000) break;
    }
    // invariant: x/hi inside, x/lo outside
    while ((hi - lo) > 1e-12 * hi) {
        double mid = 0.5 * (lo + hi);
        if (contains(x / mid)) hi = mid; else lo = mid;
    }
    return hi;
}

double ConvexBody::support(const Eigen::VectorXd& u) const {
    const Impl& im = *impl_;
    if (u.size() != im.dim) throw PreconditionError("support: dimension mismatch");
    switch (im.kind) {
        case BodyKind::Ball:
            return im.radius * u.norm();
        case BodyKind::Box:
            return im.half_widths.dot(u.cwiseAbs());
        case BodyKind::Ellipsoid:
            return im.center.dot(u) + std::sqrt(std::max(0.0, u.dot(im.shape * u)));
        case BodyKind::HPolytope: {
            const auto& vs = vertices();
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& v : vs) best = std::max(best, v.dot(u));
            return best;
        }
        case BodyKind::LinearImage:
            return im.base->support(im.map.transpose() * u);
        case BodyKind::Translate:
            return im.base->support(u) + im.shift.dot(u);
        case BodyKind::RadialTable: {
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < im.table_dirs.cols(); ++j) {
                best = std::max(best, im.table_radii[j] * im.table_dirs.col(j).dot(u));
                if (im.table_symmetric)
                    best = std::max(best, -im.table_radii[j] * im.table_dirs.col(j).dot(u));
            }
            return best;
        }
        case BodyKind::Intersection: {
            // Numeric maximization of <x,u> over the intersection: biased ray
            // walk from an interior point. Result is a feasible lower
            // estimate, certified above by bounding_radius * |u|.
            double un = u.norm();
            if (un == 0.0) return 0.0;
            Eigen::VectorXd dir = u / un;
            Eigen::VectorXd x0 = interior_point();
            double big = 2.0 * bounding_radius() + 1.0;
            auto advance = [&](const Eigen::VectorXd& from, const Eigen::VectorXd& d) {
                double hi = big, lo = 0.0;
                if (contains(from + hi * d)) return hi;
                for (int k = 0; k < 60; ++k) {
                    double mid = 0.5 * (lo + hi);
                    if (contains(from + mid * d)) lo = mid; else hi = mid;
                }
                return lo;
            };
            Eigen::VectorXd x = x0 + advance(x0, dir) * dir;
            double best = x.dot(dir);
            Rng rng(0x9c0ffee1234567ULL);  // fixed seed: support() stays deterministic
            for (int it = 0; it < 256; ++it) {
                double pull = 0.5 * std::pow(0.97, it);
                Eigen::VectorXd inside = (1.0 - pull) * x + pull * x0;
                Eigen::VectorXd d = (rng.unit_vec(im.dim) + 1.5 * dir).normalized();
                Eigen::VectorXd y = inside + advance(inside, d) * d;
                if (y.dot(dir) > best) {
                    best = y.dot(dir);
                    x = y;
                }
            }
            return best * un;
        }
    }
    return 0.0;
}

double ConvexBody::support_upper_bound(const Eigen::VectorXd& u) const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case BodyKind::Intersection: {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : im.parts) best = std::min(best, p.support_upper_bound(u));
            return best;
        }
        case BodyKind::LinearImage:
            return im.base->support_upper_bound(im.map.transpose() * u);
        case BodyKind::Translate:
            return im.base->support_upper_bound(u) + im.shift.dot(u);
        case BodyKind::RadialTable:
            return bounding_radius() * u.norm();
        case BodyKind::HPolytope:
            // An unbounded or degenerate facet system has no vertex bound.
            try {
                return support(u);
            } catch (const NumericError&) {
                return std::numeric_limits<double>::infinity();
            }
        default:
            return support(u);
    }
}

void ConvexBody::bounding_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    int n = dim();
    lo.resize(n);
    hi.resize(n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        e[i] = 1.0;
        hi[i] = support_upper_bound(e);
        e[i] = -1.0;
        lo[i] = -support_upper_bound(e);
        e[i] = 0.0;
    }
}

double ConvexBody::bounding_radius() const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case BodyKind::Ball:
            return im.radius;
        case BodyKind::Box:
            return im.half_widths.norm();
        case BodyKind::HPolytope: {
            if (im.given_radius) return *im.given_radius;
            const auto& vs = vertices();
            double r = 0.0;
            for (const auto& v : vs) r = std::max(r, v.norm());
            return r;
        }
        case BodyKind::Ellipsoid: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(im.shape);
            return im.center.norm() + std::sqrt(es.eigenvalues().maxCoeff());
        }
        case BodyKind::Intersection: {
            double r = std::numeric_limits<double>::infinity();
            for (const auto& p : im.parts) r = std::min(r, p.bounding_radius());
            return r;
        }
        case BodyKind::LinearImage:
            return operator_norm(im.map) * im.base->bounding_radius();
        case BodyKind::Translate:
            return im.base->bounding_radius() + im.shift.norm();
        case BodyKind::RadialTable:
            if (im.given_radius) return *im.given_radius;
            return 1.2 * im.table_radii.maxCoeff();
    }
    return 0.0;
}

bool ConvexBody::centrally_symmetric() const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case BodyKind::Ball:
        case BodyKind::Box:
            return true;
        case BodyKind::Ellipsoid:
            return im.center.norm() == 0.0;
        case BodyKind::HPolytope: {
            // symmetric iff the facet list is closed under (a, b) -> (-a, b)
            for (int i = 0; i < im.normals.rows(); ++i) {
                bool paired = false;
                for (int j = 0; j < im.normals.rows() && !paired; ++j)
                    paired = (im.normals.row(i) + im.normals.row(j)).norm() <
                                 1e-12 * (1.0 + im.normals.row(i).norm()) &&
                             std::abs(im.offsets[i] - im.offsets[j]) <=
                                 1e-12 * (1.0 + std::abs(im.offsets[i]));
                if (!paired) return false;
            }
            return true;
        }
        case BodyKind::Intersection:
            return std::all_of(im.parts.begin(), im.parts.end(),
                               [](const ConvexBody& p) { return p.centrally_symmetric(); });
        case BodyKind::LinearImage:
            return im.base->centrally_symmetric();
        case BodyKind::Translate:
            return im.shift.norm() == 0.0 && im.base->centrally_symmetric();
        case BodyKind::RadialTable:
            return im.table_symmetric;
    }
    return false;
}

Eigen::VectorXd ConvexBody::interior_point() const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case BodyKind::Ball:
        case BodyKind::Box:
        case BodyKind::RadialTable:
            return Eigen::VectorXd::Zero(im.dim);
        case BodyKind::Ellipsoid:
            return im.center;
        case BodyKind::LinearImage:
            return im.map * im.base->interior_point();
        case BodyKind::Translate:
            return im.base->interior_point() + im.shift;
        case BodyKind::HPolytope: {
            const auto& vs = vertices();
            Eigen::VectorXd c = Eigen::VectorXd::Zero(im.dim);
            for (const auto& v : vs) c += v;
            return c / static_cast<double>(vs.size());
        }
        case BodyKind::Intersection: {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(im.dim);
            if (contains(z)) return z;
            Eigen::VectorXd c = Eigen::VectorXd::Zero(im.dim);
            for (const auto& p : im.parts) c += p.interior_point();
            c /= static_cast<double>(im.parts.size());
            if (contains(c)) return c;
            throw NumericError("interior_point: no structural interior point for intersection");
        }
    }
    throw NumericError("interior_point: unsupported kind");
}

std::optional<double> ConvexBody::exact_volume() const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case BodyKind::Ball: {
            double b = 1.0;  // unit ball volume by recursion-free formula below
            // beta_n computed via lgamma to avoid pulling specfun here
            b = std::pow(M_PI, 0.5 * im.dim) / std::exp(std::lgamma(0.5 * im.dim + 1.0));
            return b * std::pow(im.radius, im.dim);
        }
        case BodyKind::Box:
            return std::pow(2.0, im.dim) * im.half_widths.prod();
        case BodyKind::Ellipsoid: {
            double b = std::pow(M_PI, 0.5 * im.dim) / std::exp(std::lgamma(0.5 * im.dim + 1.0));
            return b * std::sqrt(im.shape.determinant());
        }
        case BodyKind::LinearImage:
            if (auto v = im.base->exact_volume()) return std::abs(im.map.determinant()) * *v;
            return std::nullopt;
        case BodyKind::Translate:
            return im.base->exact_volume();
        default:
            return std::nullopt;
    }
}

std::optional<Eigen::VectorXd> ConvexBody::structural_barycenter() const {
    const Impl& im = *impl_;
    switch (im.kind) {
        case BodyKind::Ball:
        case BodyKind::Box:
            return Eigen::VectorXd::Zero(im.dim);
        case BodyKind::Ellipsoid:
            return im.center;
        case BodyKind::LinearImage:
            if (auto b = im.base->structural_barycenter())
                return Eigen::VectorXd(im.map * *b);
            return std::nullopt;
        case BodyKind::Translate:
            if (auto b = im.base->structural_barycenter()) return Eigen::VectorXd(*b + im.shift);
            return std::nullopt;
        case BodyKind::Intersection:
            if (centrally_symmetric()) return Eigen::VectorXd::Zero(im.dim);
            return std::nullopt;
        case BodyKind::RadialTable:
            if (im.table_symmetric) return Eigen::VectorXd::Zero(im.dim);
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// accessors

#define WAISTLAB_KIND_GUARD(expected, what)                                        \
    if (impl_->kind != expected) throw PreconditionError(what ": wrong body kind")

double ConvexBody::ball_radius() const {
    WAISTLAB_KIND_GUARD(BodyKind::Ball, "ball_radius");
    return impl_->radius;
}
const Eigen::VectorXd& ConvexBody::half_widths() const {
    WAISTLAB_KIND_GUARD(BodyKind::Box, "half_widths");
    return impl_->half_widths;
}
const Eigen::MatrixXd& ConvexBody::normals() const {
    WAISTLAB_KIND_GUARD(BodyKind::HPolytope, "normals");
    return impl_->normals;
}
const Eigen::VectorXd& ConvexBody::offsets() const {
    WAISTLAB_KIND_GUARD(BodyKind::HPolytope, "offsets");
    return impl_->offsets;
}
const Eigen::MatrixXd& ConvexBody::ellipsoid_shape() const {
    WAISTLAB_KIND_GUARD(BodyKind::Ellipsoid, "ellipsoid_shape");
    return impl_->shape;
}
const Eigen::VectorXd& ConvexBody::ellipsoid_center() const {
    WAISTLAB_KIND_GUARD(BodyKind::Ellipsoid, "ellipsoid_center");
    return impl_->center;
}
const std::vector<ConvexBody>& ConvexBody::parts() const {
    WAISTLAB_KIND_GUARD(BodyKind::Intersection, "parts");
    return impl_->parts;
}
const ConvexBody& ConvexBody::base() const {
    if (!impl_->base) throw PreconditionError("base: body has no base");
    return *impl_->base;
}
const Eigen::MatrixXd& ConvexBody::map_matrix() const {
    WAISTLAB_KIND_GUARD(BodyKind::LinearImage, "map_matrix");
    return impl_->map;
}
const Eigen::VectorXd& ConvexBody::shift() const {
    WAISTLAB_KIND_GUARD(BodyKind::Translate, "shift");
    return impl_->shift;
}
const Eigen::MatrixXd& ConvexBody::table_directions() const {
    WAISTLAB_KIND_GUARD(BodyKind::RadialTable, "table_directions");
    return impl_->table_dirs;
}
const Eigen::VectorXd& ConvexBody::table_radii() const {
    WAISTLAB_KIND_GUARD(BodyKind::RadialTable, "table_radii");
    return impl_->table_radii;
}

#undef WAISTLAB_KIND_GUARD

// ---------------------------------------------------------------------------
// vertex enumeration

const std::vector<Eigen::VectorXd>& ConvexBody::vertices() const {
    const Impl& im = *impl_;
    if (im.kind != BodyKind::HPolytope)
        throw PreconditionError("vertices: only available for h-polytopes");
    std::call_once(im.vertex_once, [&] {
        const int n = im.dim;
        const int m = static_cast<int>(im.normals.rows());
        if (n > 6) throw PreconditionError("vertices: restricted to dim <= 6");
        double scale = 1.0 + im.offsets.cwiseAbs().maxCoeff();
        std::vector<int> idx(n);
        std::vector<Eigen::VectorXd> out;
        // enumerate all n-subsets of facets
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == n) {
                Eigen::MatrixXd a(n, n);
                Eigen::VectorXd b(n);
                for (int i = 0; i < n; ++i) {
                    a.row(i) = im.normals.row(idx[i]);
                    b[i] = im.offsets[idx[i]];
                }
                Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
                if (!lu.isInvertible()) return;
                Eigen::VectorXd x = lu.solve(b);
                if (((im.normals * x - im.offsets).array() <= 1e-9 * scale).all()) {
                    for (const auto& v : out)
                        if ((v - x).norm() <= 1e-9 * (1.0 + x.norm())) return;
                    out.push_back(x);
                }
                return;
            }
            for (int i = start; i <= m - (n - depth); ++i) {
                idx[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
        im.vertex_cache = std::move(out);
    });
    if (im.vertex_cache.empty())
        throw NumericError("vertices: polytope has no vertices (empty or degenerate)");
    return im.vertex_cache;
}

// ---------------------------------------------------------------------------
// builders

ConvexBody unit_cube(int dim) {
    Eigen::VectorXd h = Eigen::VectorXd::Constant(dim, 0.5);
    return ConvexBody::translate(ConvexBody::box(h), h).named("cube" + std::to_string(dim));
}

ConvexBody corner_box(const Eigen::VectorXd& extents) {
    Eigen::VectorXd h = 0.5 * extents;
    return ConvexBody::translate(ConvexBody::box(h), h);
}

ConvexBody standard_simplex(int dim) {
    Eigen::MatrixXd a(dim + 1, dim);
    Eigen::VectorXd b(dim + 1);
    a.topRows(dim) = -Eigen::MatrixXd::Identity(dim, dim);
    b.head(dim).setZero();
    a.row(dim).setOnes();
    b[dim] = 1.0;
    return ConvexBody::h_polytope(a, b).named("simplex" + std::to_string(dim));
}

}  // namespace waistlab
