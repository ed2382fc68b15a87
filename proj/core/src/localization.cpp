#include "waistlab/localization.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "waistlab/rng.hpp"
#include "waistlab/specfun.hpp"

namespace waistlab {

Halfspace CutCircle::at(double phi) const {
    Eigen::VectorXd u = std::cos(phi) * a + std::sin(phi) * b;
    Halfspace h;
    h.normal = u.head(u.size() - 1);
    h.offset = u[u.size() - 1];
    return h;
}

CutCircle CutCircle::normal_direction(const Eigen::VectorXd& dir) {
    const int n = static_cast<int>(dir.size());
    double norm = dir.norm();
    if (!(norm > 0.0)) throw PreconditionError("CutCircle: zero direction");
    CutCircle c;
    c.a = Eigen::VectorXd::Zero(n + 1);
    c.a.head(n) = dir / norm;
    c.b = Eigen::VectorXd::Zero(n + 1);
    c.b[n] = 1.0;
    return c;
}

CutCircle CutCircle::through_flat(const AffineFlat& axis) {
    const int n = axis.ambient_dim();
    if (axis.dim() != n - 2)
        throw PreconditionError("CutCircle::through_flat: flat must have dimension n-2");
    // (w, c) with U' w = 0 and p.w + c = 0
    Eigen::MatrixXd constraints(axis.dim() + 1, n + 1);
    constraints.setZero();
    constraints.block(0, 0, axis.dim(), n) = axis.basis.transpose();
    constraints.block(axis.dim(), 0, 1, n) = axis.point.transpose();
    constraints(axis.dim(), n) = 1.0;
    Eigen::MatrixXd null = null_space(constraints);
    if (null.cols() != 2)
        throw NumericError("CutCircle::through_flat: degenerate constraint flat");
    CutCircle c;
    c.a = null.col(0);
    c.b = null.col(1);
    return c;
}

CutCircle CutCircle::random(int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd a = rng.normal_vec(dim + 1);
    a.normalize();
    Eigen::VectorXd b = rng.normal_vec(dim + 1);
    b -= a.dot(b) * a;
    b.normalize();
    return CutCircle{a, b};
}

namespace {

// D(phi) = sum w_i sgn(p_i cos phi + q_i sin phi): signed side imbalance.
struct CutScorer {
    Eigen::VectorXd p, q, w;
    double operator()(double phi) const {
        double c = std::cos(phi), s = std::sin(phi);
        double d = 0.0;
        for (int i = 0; i < p.size(); ++i)
            d += (c * p[i] + s * q[i] >= 0.0) ? w[i] : -w[i];
        return d;
    }
};

}  // namespace

Halfspace bisect_points(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights,
                        const CutCircle& family, double angle_tol) {
    const auto m = points.cols();
    if (m < 1) throw PreconditionError("bisect_points: no points");
    if (weights.size() != m) throw PreconditionError("bisect_points: weight size mismatch");
    const int n = static_cast<int>(points.rows());
    CutScorer scorer;
    scorer.p.resize(m);
    scorer.q.resize(m);
    scorer.w = weights;
    for (Eigen::Index i = 0; i < m; ++i) {
        scorer.p[i] = family.a.head(n).dot(points.col(i)) + family.a[n];
        scorer.q[i] = family.b.head(n).dot(points.col(i)) + family.b[n];
    }
    double w_max = weights.cwiseAbs().maxCoeff();

    // bracket scan over [0, pi): D(phi + pi) = -D(phi), so a sign change (or
    // a zero plateau) always exists for continuous data
    const int kBrackets = 720;
    double prev = scorer(0.0);
    double lo = 0.0, hi = -1.0;
    double best_phi = 0.0, best_abs = std::abs(prev);
    for (int k = 1; k <= kBrackets; ++k) {
        double phi = M_PI * k / kBrackets;
        double cur = scorer(phi);
        if (std::abs(cur) < best_abs) {
            best_abs = std::abs(cur);
            best_phi = phi;
        }
        if ((prev <= 0.0 && cur >= 0.0) || (prev >= 0.0 && cur <= 0.0)) {
            lo = M_PI * (k - 1) / kBrackets;
            hi = phi;
            break;
        }
        prev = cur;
    }
    if (hi < 0.0) {
        if (best_abs <= w_max) return family.at(best_phi);
        throw NumericError("bisect_points: no sign change found on the cut circle");
    }
    double flo = scorer(lo);
    while (hi - lo > angle_tol) {
        double mid = 0.5 * (lo + hi);
        double fm = scorer(mid);
        if (std::abs(fm) <= w_max) return family.at(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return family.at(0.5 * (lo + hi));
}

Halfspace bisect_equal(const MeasureModel& mu,
                       const std::function<double(const Eigen::VectorXd&)>& weight,
                       const std::optional<CutCircle>& family, double angle_tol,
                       std::int64_t budget, std::uint64_t seed) {
    CutCircle circle = family ? *family : CutCircle::random(mu.dim(), substream_seed(seed, 0xC1));
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::int64_t n = attempt == 0 ? budget : 2 * budget;  // one automatic budget raise
        Eigen::MatrixXd pts = mu.sample_matrix(n, substream_seed(seed, attempt));
        Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
        if (weight)
            for (std::int64_t i = 0; i < n; ++i) w[i] = weight(pts.col(i));
        if (w.cwiseAbs().sum() <= 0.0)
            throw PreconditionError("bisect_equal: total functional is zero");
        try {
            return bisect_points(pts, w, circle, angle_tol);
        } catch (const NumericError&) {
            if (attempt == 1) throw;
        }
    }
    throw NumericError("bisect_equal: unreachable");
}

// ---------------------------------------------------------------------------
// partition tree

int PartitionTree::leaf_index(const Eigen::VectorXd& x) const {
    int node = 0;
    int leaf = 0;
    while (nodes[node].left >= 0) {
        if (nodes[node].cut.contains(x)) {
            node = nodes[node].left;
            leaf = 2 * leaf;
        } else {
            node = nodes[node].right;
            leaf = 2 * leaf + 1;
        }
    }
    return leaf;
}

std::vector<std::vector<Halfspace>> PartitionTree::leaf_constraints() const {
    std::vector<std::vector<Halfspace>> out(leaf_count());
    // walk every root-to-leaf path
    std::function<void(int, int, std::vector<Halfspace>&)> rec =
        [&](int node, int leaf, std::vector<Halfspace>& acc) {
            if (nodes[node].left < 0) {
                out[leaf] = acc;
                return;
            }
            Halfspace h = nodes[node].cut;
            acc.push_back(h);
            rec(nodes[node].left, 2 * leaf, acc);
            acc.pop_back();
            Halfspace flipped{-h.normal, -h.offset};
            acc.push_back(flipped);
            rec(nodes[node].right, 2 * leaf + 1, acc);
            acc.pop_back();
        };
    std::vector<Halfspace> acc;
    rec(0, 0, acc);
    return out;
}

ConvexBody PartitionTree::leaf_cell(int leaf, std::optional<double> bounding_radius) const {
    auto rows = leaf_constraints().at(leaf);
    Eigen::MatrixXd a(rows.size(), dim);
    Eigen::VectorXd b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        // normal.x + offset >= 0  ->  (-normal).x <= offset
        a.row(i) = -rows[i].normal.transpose();
        b[i] = rows[i].offset;
    }
    return ConvexBody::h_polytope(a, b, bounding_radius);
}

std::string PartitionTree::to_json_string() const {
    nlohmann::ordered_json j;
    j["dim"] = dim;
    j["depth"] = depth;
    nlohmann::ordered_json nodes_j = nlohmann::ordered_json::array();
    for (const auto& nd : nodes) {
        nlohmann::ordered_json nj;
        nj["depth"] = nd.depth;
        nj["left"] = nd.left;
        nj["right"] = nd.right;
        if (nd.left >= 0) {
            nj["normal"] = std::vector<double>(nd.cut.normal.data(),
                                               nd.cut.normal.data() + nd.cut.normal.size());
            nj["offset"] = nd.cut.offset;
        }
        nodes_j.push_back(nj);
    }
    j["nodes"] = nodes_j;
    j["leaf_weights"] = leaf_weights;
    return j.dump(2) + "\n";
}

PartitionTree PartitionTree::from_json_string(const std::string& text) {
    auto j = nlohmann::ordered_json::parse(text);
    PartitionTree t;
    t.dim = j.at("dim").get<int>();
    t.depth = j.at("depth").get<int>();
    for (const auto& nj : j.at("nodes")) {
        Node nd;
        nd.depth = nj.at("depth").get<int>();
        nd.left = nj.at("left").get<int>();
        nd.right = nj.at("right").get<int>();
        if (nd.left >= 0) {
            auto nv = nj.at("normal").get<std::vector<double>>();
            nd.cut.normal = Eigen::Map<Eigen::VectorXd>(nv.data(), nv.size());
            nd.cut.offset = nj.at("offset").get<double>();
        }
        t.nodes.push_back(nd);
    }
    t.leaf_weights = j.at("leaf_weights").get<std::vector<double>>();
    return t;
}

PartitionTree dyadic_equipartition(const MeasureModel& mu, int depth,
                                   const std::vector<std::optional<CutCircle>>& constraints,
                                   double tol, std::int64_t budget, std::uint64_t seed) {
    if (depth < 1 || depth > 6)
        throw PreconditionError("dyadic_equipartition: depth must be in [1, 6]");
    const int n = mu.dim();
    Eigen::MatrixXd pts = mu.sample_matrix(budget, substream_seed(seed, 0xB11D));

    PartitionTree tree;
    tree.dim = n;
    tree.depth = depth;
    tree.nodes.push_back({0, {}, -1, -1});

    struct Cell {
        int node;
        int depth;
        std::vector<std::int64_t> idx;
    };
    std::vector<Cell> frontier;
    {
        std::vector<std::int64_t> all(budget);
        for (std::int64_t i = 0; i < budget; ++i) all[i] = i;
        frontier.push_back({0, 0, std::move(all)});
    }
    std::uint64_t cell_counter = 0;
    while (!frontier.empty()) {
        Cell cell = std::move(frontier.back());
        frontier.pop_back();
        if (cell.depth == depth) continue;
        CutCircle circle =
            (cell.depth < static_cast<int>(constraints.size()) && constraints[cell.depth])
                ? *constraints[cell.depth]
                : CutCircle::random(n, substream_seed(seed, 0xCE11 + (++cell_counter)));
        Eigen::MatrixXd sub(n, cell.idx.size());
        for (std::size_t i = 0; i < cell.idx.size(); ++i) sub.col(i) = pts.col(cell.idx[i]);
        Halfspace cut;
        try {
            cut = bisect_points(sub, Eigen::VectorXd::Ones(sub.cols()), circle, 1e-9);
        } catch (const NumericError& e) {
            throw NumericError("dyadic_equipartition: cell at depth " +
                               std::to_string(cell.depth) + " node " +
                               std::to_string(cell.node) + ": " + e.what());
        }
        std::vector<std::int64_t> left, right;
        for (auto i : cell.idx)
            (cut.contains(pts.col(i)) ? left : right).push_back(i);
        int li = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({cell.depth + 1, {}, -1, -1});
        int ri = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({cell.depth + 1, {}, -1, -1});
        tree.nodes[cell.node].cut = cut;
        tree.nodes[cell.node].left = li;
        tree.nodes[cell.node].right = ri;
        frontier.push_back({li, cell.depth + 1, std::move(left)});
        frontier.push_back({ri, cell.depth + 1, std::move(right)});
    }

    // build-sample leaf masses and the equality tolerance gate
    tree.leaf_weights.assign(tree.leaf_count(), 0.0);
    for (std::int64_t i = 0; i < budget; ++i)
        tree.leaf_weights[tree.leaf_index(pts.col(i))] += 1.0;
    double target = 1.0 / tree.leaf_count();
    for (auto& w : tree.leaf_weights) w /= static_cast<double>(budget);
    for (int leaf = 0; leaf < tree.leaf_count(); ++leaf)
        if (std::abs(tree.leaf_weights[leaf] - target) > tol)
            throw NumericError("dyadic_equipartition: leaf " + std::to_string(leaf) +
                               " mass deviates beyond tolerance");
    return tree;
}

std::vector<double> partition_recount(const PartitionTree& tree, const MeasureModel& mu,
                                      std::int64_t budget, std::uint64_t seed) {
    std::vector<double> mass(tree.leaf_count(), 0.0);
    Eigen::MatrixXd pts = mu.sample_matrix(budget, substream_seed(seed, 0x4EC0));
    for (std::int64_t i = 0; i < budget; ++i) mass[tree.leaf_index(pts.col(i))] += 1.0;
    for (auto& m : mass) m /= static_cast<double>(budget);
    return mass;
}

// ---------------------------------------------------------------------------
// peak machinery

namespace {

// multistart coordinate ascent with golden-section line steps (concave h)
Eigen::VectorXd maximize_concave(const std::function<double(const Eigen::VectorXd&)>& h, int dim,
                                 std::uint64_t seed, double span0 = 4.0) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    Rng rng(seed);
    Eigen::VectorXd best;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int start = 0; start < 8; ++start) {
        Eigen::VectorXd x = start == 0 ? Eigen::VectorXd::Zero(dim)
                                       : Eigen::VectorXd(span0 / 2.0 * rng.normal_vec(dim));
        double span = span0;
        for (int sweep = 0; sweep < 120; ++sweep) {
            double before = h(x);
            for (int c = 0; c < dim; ++c) {
                double lo = x[c] - span, hi = x[c] + span;
                double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
                auto at = [&](double v) {
                    Eigen::VectorXd y = x;
                    y[c] = v;
                    return h(y);
                };
                double f1 = at(m1), f2 = at(m2);
                for (int it = 0; it < 80 && (hi - lo) > 1e-13 * (1.0 + std::abs(hi)); ++it) {
                    if (f1 < f2) {
                        lo = m1;
                        m1 = m2;
                        f1 = f2;
                        m2 = lo + gr * (hi - lo);
                        f2 = at(m2);
                    } else {
                        hi = m2;
                        m2 = m1;
                        f2 = f1;
                        m1 = hi - gr * (hi - lo);
                        f1 = at(m1);
                    }
                }
                double v = 0.5 * (lo + hi);
                if (at(v) >= h(x)) x[c] = v;
            }
            span = std::max(span * 0.7, 1e-10);
            if (std::abs(h(x) - before) < 1e-14 * (1.0 + std::abs(before)) && sweep > 4) break;
        }
        if (h(x) > best_val) {
            best_val = h(x);
            best = x;
        }
    }
    return best;
}

// integral of `dens` over the plane region {gauge(y - y0) <= r} in polar
// coordinates; `boundary(theta)` is the radial extent of the region
double polar_integral(const std::function<double(const Eigen::VectorXd&)>& dens,
                      const Eigen::VectorXd& y0,
                      const std::function<double(double)>& boundary, double tol) {
    auto outer = [&](double theta) {
        Eigen::VectorXd dir(2);
        dir << std::cos(theta), std::sin(theta);
        double rmax = boundary(theta);
        if (!(rmax > 0.0)) return 0.0;
        auto inner = [&](double s) { return dens(y0 + s * dir) * s; };
        return integrate(inner, 0.0, rmax, tol).value;
    };
    return integrate(outer, 0.0, 2.0 * M_PI, tol).value;
}

}  // namespace

CheckRecord PeakCertificate::as_check(const std::string& name, const std::string& tag) const {
    CheckRecord rec;
    rec.name = name;
    rec.tag = tag;
    rec.status = status;
    rec.series["r_grid"] = r_grid;
    rec.series["achieved"] = achieved;
    rec.series["bounds"] = bounds;
    if (center.size() > 0)
        rec.series["center"] = std::vector<double>(center.data(), center.data() + center.size());
    rec.note = note;
    return rec;
}

PeakCertificate peak_point(const OneLogConcave& nu, const std::vector<double>& r_grid,
                           std::uint64_t seed, double quad_tol) {
    const int ell = nu.dim;
    if (ell < 1 || ell > 2) throw PreconditionError("peak_point: quadrature supports dim <= 2");
    auto logd = [&](const Eigen::VectorXd& x) {
        double lf = nu.log_factor ? nu.log_factor(x) : 0.0;
        return -0.5 * x.squaredNorm() + lf;
    };
    Eigen::VectorXd x0 = maximize_concave(logd, ell, substream_seed(seed, 0x3E));
    auto dens = [&](const Eigen::VectorXd& x) {
        double v = logd(x);
        return std::isfinite(v) ? std::exp(v) : 0.0;
    };

    PeakCertificate cert;
    cert.center = x0;
    cert.r_grid = r_grid;
    double total = 0.0;
    if (ell == 1) {
        auto d1 = [&](double s) {
            Eigen::VectorXd y(1);
            y << s;
            return dens(y);
        };
        double up = ray_cutoff([&](double s) { return d1(x0[0] + s); });
        double down = ray_cutoff([&](double s) { return d1(x0[0] - s); });
        total = integrate(d1, x0[0] - down, x0[0] + up, quad_tol).value;
        for (double r : r_grid)
            cert.achieved.push_back(integrate(d1, x0[0] - r, x0[0] + r, quad_tol).value / total);
    } else {
        double reach = ray_cutoff([&](double s) {
            double worst = 0.0;
            Eigen::VectorXd y(2);
            for (int k = 0; k < 8; ++k) {
                double a = 2.0 * M_PI * k / 8.0;
                y << x0[0] + s * std::cos(a), x0[1] + s * std::sin(a);
                worst = std::max(worst, dens(y));
            }
            return worst;
        });
        total = polar_integral(dens, x0, [&](double) { return reach; }, quad_tol);
        for (double r : r_grid)
            cert.achieved.push_back(
                polar_integral(dens, x0, [&](double) { return r; }, quad_tol) / total);
    }
    if (!(total > 0.0)) throw NumericError("peak_point: density integrates to zero");

    bool ok = true;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        cert.bounds.push_back(gaussian_ball_measure(ell, r_grid[i]));
        if (cert.achieved[i] < cert.bounds[i] - 50.0 * quad_tol) ok = false;
    }
    cert.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    return cert;
}

std::vector<PeakCertificate> peak_property_check(
    const std::function<double(const Eigen::VectorXd&)>& density, const ConvexBody& dilation_body,
    const std::function<double(double)>& profile, const std::vector<AffineFlat>& flats,
    const std::vector<std::function<double(const Eigen::VectorXd&)>>& multipliers,
    const std::vector<double>& r_grid, std::uint64_t seed, double quad_tol) {
    if (flats.size() != multipliers.size())
        throw PreconditionError("peak_property_check: flats/multipliers size mismatch");
    std::vector<PeakCertificate> out;
    for (std::size_t fi = 0; fi < flats.size(); ++fi) {
        const AffineFlat& flat = flats[fi];
        const auto& psi = multipliers[fi];
        const int ell = flat.dim();
        if (ell < 1 || ell > 2)
            throw PreconditionError("peak_property_check: flat dimension must be 1 or 2");
        auto rho = [&](const Eigen::VectorXd& y) {
            double p = psi ? psi(y) : 1.0;
            return density(flat.embed(y)) * p;
        };
        PeakCertificate cert;
        cert.r_grid = r_grid;

        double total = 0.0;
        auto logrho = [&](const Eigen::VectorXd& y) {
            double v = rho(y);
            return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        };
        Eigen::VectorXd y0 = maximize_concave(logrho, ell, substream_seed(seed, 0x70 + fi));
        cert.center = y0;

        // directional radial extent of {gauge(U z) <= r}: r / gauge(U dir)
        auto dir_gauge = [&](const Eigen::VectorXd& z) { return dilation_body.gauge(flat.basis * z); };

        if (ell == 1) {
            auto d1 = [&](double s) {
                Eigen::VectorXd y(1);
                y << s;
                return rho(y);
            };
            Eigen::VectorXd e(1);
            e << 1.0;
            double gp = dir_gauge(e), gm = dir_gauge(-e);
            if (!(gp > 0.0) || !(gm > 0.0))
                throw PreconditionError("peak_property_check: dilation body has empty gauge");
            double up = ray_cutoff([&](double s) { return d1(y0[0] + s); });
            double down = ray_cutoff([&](double s) { return d1(y0[0] - s); });
            total = integrate(d1, y0[0] - down, y0[0] + up, quad_tol).value;
            if (total > 0.0)
                for (double r : r_grid)
                    cert.achieved.push_back(
                        integrate(d1, y0[0] - r / gm, y0[0] + r / gp, quad_tol).value / total);
        } else {
            double reach = ray_cutoff([&](double s) {
                double worst = 0.0;
                Eigen::VectorXd y(2);
                for (int k = 0; k < 8; ++k) {
                    double a = 2.0 * M_PI * k / 8.0;
                    y << y0[0] + s * std::cos(a), y0[1] + s * std::sin(a);
                    worst = std::max(worst, rho(y));
                }
                return worst;
            });
            auto rho_fn = [&](const Eigen::VectorXd& y) { return rho(y); };
            total = polar_integral(rho_fn, y0, [&](double) { return reach; }, quad_tol);
            if (total > 0.0)
                for (double r : r_grid)
                    cert.achieved.push_back(polar_integral(rho_fn, y0,
                                                           [&](double theta) {
                                                               Eigen::VectorXd d(2);
                                                               d << std::cos(theta), std::sin(theta);
                                                               double g = dir_gauge(d);
                                                               return g > 0.0 ? r / g : 0.0;
                                                           },
                                                           quad_tol) /
                                            total);
        }
        if (!(total > 0.0)) {
            cert.status = CheckStatus::Indeterminate;
            cert.note = "restricted density integrates to zero on this flat; skipped";
            out.push_back(std::move(cert));
            continue;
        }
        bool ok = true;
        for (std::size_t i = 0; i < r_grid.size(); ++i) {
            cert.bounds.push_back(profile(r_grid[i]));
            if (cert.achieved[i] < cert.bounds[i] - 100.0 * quad_tol) ok = false;
        }
        cert.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
        out.push_back(std::move(cert));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Minkowski sums with closed-form volumes

namespace {

const ConvexBody* unwrap_translate(const ConvexBody& b) {
    const ConvexBody* cur = &b;
    while (cur->kind() == BodyKind::Translate) cur = &cur->base();
    return cur;
}

// counter-clockwise vertex cycle of a 2-D convex body, when polygonal
std::optional<std::vector<Eigen::Vector2d>> polygon_of(const ConvexBody& body) {
    const ConvexBody* core = unwrap_translate(body);
    std::vector<Eigen::Vector2d> verts;
    if (core->kind() == BodyKind::Box) {
        double hx = core->half_widths()[0], hy = core->half_widths()[1];
        verts = {{hx, hy}, {-hx, hy}, {-hx, -hy}, {hx, -hy}};
    } else if (core->kind() == BodyKind::HPolytope) {
        for (const auto& v : core->vertices()) verts.emplace_back(v[0], v[1]);
    } else {
        return std::nullopt;
    }
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& v : verts) c += v;
    c /= static_cast<double>(verts.size());
    std::sort(verts.begin(), verts.end(), [&](const auto& u, const auto& v) {
        return std::atan2(u.y() - c.y(), u.x() - c.x()) < std::atan2(v.y() - c.y(), v.x() - c.x());
    });
    return verts;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(a);
}

double polygon_perimeter(const std::vector<Eigen::Vector2d>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        s += (poly[(i + 1) % poly.size()] - poly[i]).norm();
    return s;
}

// Minkowski sum of convex polygons by the sorted edge merge.
std::vector<Eigen::Vector2d> polygon_sum(const std::vector<Eigen::Vector2d>& p,
                                         const std::vector<Eigen::Vector2d>& q) {
    auto edges = [](const std::vector<Eigen::Vector2d>& poly) {
        std::vector<Eigen::Vector2d> e;
        for (std::size_t i = 0; i < poly.size(); ++i)
            e.push_back(poly[(i + 1) % poly.size()] - poly[i]);
        return e;
    };
    std::vector<Eigen::Vector2d> all = edges(p);
    auto eq = edges(q);
    all.insert(all.end(), eq.begin(), eq.end());
    std::sort(all.begin(), all.end(), [](const auto& u, const auto& v) {
        return std::atan2(u.y(), u.x()) < std::atan2(v.y(), v.x());
    });
    std::vector<Eigen::Vector2d> out;
    Eigen::Vector2d cur = Eigen::Vector2d::Zero();
    for (const auto& e : all) {
        out.push_back(cur);
        cur += e;
    }
    return out;
}

}  // namespace

double minkowski_sum_volume(const ConvexBody& k_in, const ConvexBody& w_in, double r) {
    if (k_in.dim() != w_in.dim()) throw PreconditionError("minkowski_sum_volume: dim mismatch");
    const int n = k_in.dim();
    if (!(r >= 0.0)) throw PreconditionError("minkowski_sum_volume: r >= 0");
    const ConvexBody* k = unwrap_translate(k_in);
    const ConvexBody* w = unwrap_translate(w_in);

    if (n == 1) {
        Eigen::VectorXd plus(1), minus(1);
        plus << 1.0;
        minus << -1.0;
        return (k_in.support(plus) + r * w_in.support(plus)) +
               (k_in.support(minus) + r * w_in.support(minus));
    }
    if (k->kind() == BodyKind::Ball && w->kind() == BodyKind::Ball)
        return unit_ball_volume(n) * std::pow(k->ball_radius() + r * w->ball_radius(), n);
    if (k->kind() == BodyKind::Box && w->kind() == BodyKind::Box) {
        double v = 1.0;
        for (int i = 0; i < n; ++i)
            v *= 2.0 * (k->half_widths()[i] + r * w->half_widths()[i]);
        return v;
    }
    if (n == 2) {
        auto pk = polygon_of(*k);
        auto pw = polygon_of(*w);
        if (pk && pw) {
            std::vector<Eigen::Vector2d> scaled;
            for (const auto& v : *pw) scaled.push_back(r * v);
            return polygon_area(polygon_sum(*pk, scaled));
        }
        if (pk && w->kind() == BodyKind::Ball) {
            double rho = r * w->ball_radius();
            return polygon_area(*pk) + polygon_perimeter(*pk) * rho + M_PI * rho * rho;
        }
        if (pw && k->kind() == BodyKind::Ball) {
            std::vector<Eigen::Vector2d> scaled;
            for (const auto& v : *pw) scaled.push_back(r * v);
            double rho = k->ball_radius();
            return polygon_area(scaled) + polygon_perimeter(scaled) * rho + M_PI * rho * rho;
        }
    }
    throw NumericError("minkowski_sum_volume: unavailable for these body kinds");
}

CheckRecord spingarn_check(const MeasureModel& mu, const ConvexBody& v,
                           const std::vector<double>& r_grid, std::int64_t budget,
                           std::uint64_t seed) {
    if (!mu.body()) throw PreconditionError("spingarn_check: measure must carry a support body");
    const ConvexBody& k = *mu.body();
    const int n = k.dim();
    if (v.dim() != n) throw PreconditionError("spingarn_check: dilation body dim mismatch");
    // dilation body barycenter at the origin (probed)
    {
        Eigen::VectorXd b = barycenter(v, 100000, substream_seed(seed, 0xBA));
        if (b.norm() > 0.02 * v.bounding_radius())
            throw PreconditionError("spingarn_check: dilation body barycenter is not at 0");
    }
    auto vol_v = v.exact_volume();
    if (!vol_v) throw NumericError("spingarn_check: dilation body volume unavailable");
    ConvexBody w = ConvexBody::linear_image(v, -Eigen::MatrixXd::Identity(n, n));

    Eigen::VectorXd x0 = mu.is_symmetric() ? Eigen::VectorXd::Zero(n)
                                           : mu.barycenter_covariance(budget,
                                                                      substream_seed(seed, 1))
                                                 .first;
    CheckRecord rec;
    rec.name = "convolution_peak_bound";
    rec.tag = "spingarn";
    rec.series["r_grid"] = r_grid;
    std::vector<double> lhs, rhs, ses;
    bool ok = true;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        double r = r_grid[i];
        auto m = mu.region_measure(
            [&](const Eigen::VectorXd& x) { return v.gauge((x - x0) / r) <= 1.0; }, budget,
            substream_seed(seed, 2));
        double scale = std::pow(r, n) * (*vol_v);
        double left = m.value / scale;
        double left_se = m.std_error / scale;
        double right = 1.0 / minkowski_sum_volume(k, w, r);
        lhs.push_back(left);
        rhs.push_back(right);
        ses.push_back(left_se);
        if (!(left + 3.0 * left_se >= right)) ok = false;
        if (!std::isfinite(left) || !std::isfinite(right)) ok = false;
    }
    rec.series["lhs"] = lhs;
    rec.series["rhs"] = rhs;
    rec.series["lhs_std_errors"] = ses;
    rec.tolerance = 3.0;
    rec.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    return rec;
}

}  // namespace waistlab
