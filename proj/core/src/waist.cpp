#include "waistlab/waist.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "waistlab/constants.hpp"
#include "waistlab/rng.hpp"
#include "waistlab/specfun.hpp"

namespace waistlab {

CheckRecord WaistCertificate::as_check(const std::string& name) const {
    CheckRecord rec;
    rec.name = name;
    rec.tag = tag;
    rec.status = status;
    rec.tolerance = tolerance;
    rec.quantities = quantities;
    rec.quantities["achieved"] = achieved;
    rec.quantities["bound"] = bound_value;
    rec.quantities["witness_found"] = witness_found ? 1.0 : 0.0;
    rec.series = series;
    if (best_level.size() > 0) {
        std::vector<double> lv(best_level.data(), best_level.data() + best_level.size());
        rec.series["best_level"] = lv;
    }
    rec.note = note;
    return rec;
}

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Gauss-Newton step toward the level set; finite-difference Jacobian. Returns
// a nearby fiber point or nullopt.
std::optional<Eigen::VectorXd> newton_to_fiber(const MapSpec& f, const Eigen::VectorXd& t,
                                               Eigen::VectorXd y, double resid_tol,
                                               int max_iters = 15) {
    const int n = f.dim_in();
    const int l = f.dim_out();
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd r = f(y) - t;
        if (r.norm() <= resid_tol) return y;
        Eigen::MatrixXd jac(l, n);
        double h = 1e-6 * (1.0 + y.cwiseAbs().maxCoeff());
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd yp = y, ym = y;
            yp[j] += h;
            ym[j] -= h;
            jac.col(j) = (f(yp) - f(ym)) / (2.0 * h);
        }
        Eigen::MatrixXd gram = jac * jac.transpose();
        gram.diagonal().array() += 1e-12 * (1.0 + gram.trace());
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) return std::nullopt;
        y -= jac.transpose() * ldlt.solve(r);
        if (!y.allFinite()) return std::nullopt;
    }
    return (f(y) - t).norm() <= 10.0 * resid_tol ? std::optional<Eigen::VectorXd>(y)
                                                 : std::nullopt;
}

// Distance-to-fiber oracle: exact for maps with closed-form level-set
// distances, otherwise a refined probe cloud (grid-hashed) with per-query
// Gauss-Newton sharpening. Numeric values are upper bounds on the true
// distance, so tube counts err on the conservative side.
class FiberDistanceOracle {
public:
    FiberDistanceOracle(const FiberSpec& fiber, const MeasureModel& probe_source,
                        const ConvexBody* containment, double query_radius,
                        std::int64_t probe_budget, std::uint64_t seed)
        : map_(fiber.map), t_(fiber.level), radius_(query_radius) {
        if (map_.has_exact_distance()) {
            exact_ = true;
            return;
        }
        resid_tol_ = std::min(fiber.level_tolerance, 1e-9);
        const int n = map_.dim_in();
        cell_ = std::max(query_radius, 1e-6);
        Eigen::MatrixXd starts = probe_source.sample_matrix(probe_budget, seed);
        std::vector<Eigen::VectorXd> kept;
        for (std::int64_t i = 0; i < starts.cols(); ++i) {
            auto y = newton_to_fiber(map_, t_, starts.col(i), resid_tol_);
            if (!y) continue;
            if (containment && !containment->contains(*y)) continue;
            kept.push_back(*y);
        }
        probes_.resize(n, static_cast<std::int64_t>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            probes_.col(static_cast<std::int64_t>(i)) = kept[i];
            grid_[cell_key(kept[i])].push_back(static_cast<int>(i));
        }
    }

    bool empty() const { return !exact_ && probes_.cols() == 0; }

    // Euclidean distance to the fiber, or +inf beyond `cap`.
    double distance(const Eigen::VectorXd& x, double cap) const {
        if (exact_) return map_.fiber_distance(x, t_);
        if (probes_.cols() == 0) return kInf;
        double slack = cell_ * std::sqrt(static_cast<double>(x.size()));
        double dc = cloud_distance(x, cap + slack);
        if (!(dc < kInf)) return kInf;
        auto y = newton_to_fiber(map_, t_, x, resid_tol_, 12);
        if (y && y->size() == x.size()) {
            double dn = (*y - x).norm();
            if (dn < dc) return dn;
        }
        return dc;
    }

private:
    std::uint64_t cell_key(const Eigen::VectorXd& x) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int i = 0; i < x.size(); ++i) {
            auto c = static_cast<std::int64_t>(std::floor(x[i] / cell_));
            h = splitmix64(h ^ static_cast<std::uint64_t>(c * 0x9E3779B97F4A7C15ULL + i));
        }
        return h;
    }

    double cloud_distance(const Eigen::VectorXd& x, double cap) const {
        const int n = static_cast<int>(x.size());
        int reach = static_cast<int>(std::ceil(cap / cell_)) + 1;
        if (reach > 4) reach = 4;  // bounded neighborhood scan
        std::vector<std::int64_t> base(n);
        for (int i = 0; i < n; ++i) base[i] = static_cast<std::int64_t>(std::floor(x[i] / cell_));
        double best = kInf;
        std::vector<int> offset(n, -reach);
        for (;;) {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (int i = 0; i < n; ++i) {
                std::int64_t c = base[i] + offset[i];
                h = splitmix64(h ^ static_cast<std::uint64_t>(c * 0x9E3779B97F4A7C15ULL + i));
            }
            auto it = grid_.find(h);
            if (it != grid_.end())
                for (int idx : it->second)
                    best = std::min(best, (probes_.col(idx) - x).norm());
            int k = 0;
            while (k < n && ++offset[k] > reach) offset[k++] = -reach;
            if (k == n) break;
        }
        return best <= cap ? best : kInf;
    }

    MapSpec map_;
    Eigen::VectorXd t_;
    double radius_ = 0.0;
    bool exact_ = false;
    double resid_tol_ = 1e-9;
    double cell_ = 1.0;
    Eigen::MatrixXd probes_;
    std::unordered_map<std::uint64_t, std::vector<int>> grid_;
};

// Weighted (1/eps^2) linear fit v = a + b eps; returns a and its propagated
// standard error (per-eps errors treated as independent).
std::pair<double, double> extrapolate_to_zero(const std::vector<double>& eps,
                                              const std::vector<double>& val,
                                              const std::vector<double>& se) {
    const std::size_t m = eps.size();
    if (m == 1) return {val[0], se[0]};
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
        w[i] = 1.0 / (eps[i] * eps[i]);
        s0 += w[i];
        s1 += w[i] * eps[i];
        s2 += w[i] * eps[i] * eps[i];
        t0 += w[i] * val[i];
        t1 += w[i] * eps[i] * val[i];
    }
    double det = s0 * s2 - s1 * s1;
    if (std::abs(det) < 1e-30) return {val.back(), se.back()};
    double a = (s2 * t0 - s1 * t1) / det;
    // var(a) with coefficient c_i = w_i (s2 - s1 eps_i) / det on v_i
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double c = w[i] * (s2 - s1 * eps[i]) / det;
        var += c * c * se[i] * se[i];
    }
    return {a, std::sqrt(var)};
}

std::vector<double> sorted_desc(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<double>());
    return v;
}

// Axis-aligned box recognition: Box or Translate(Box); returns (center, half widths).
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> axis_box_of(const ConvexBody& body) {
    if (body.kind() == BodyKind::Box)
        return std::make_pair(Eigen::VectorXd::Zero(body.dim()), body.half_widths());
    if (body.kind() == BodyKind::Translate && body.base().kind() == BodyKind::Box)
        return std::make_pair(body.shift(), body.base().half_widths());
    return std::nullopt;
}

}  // namespace

ContentEstimate minkowski_content(const FiberSpec& fiber, const ConvexBody& ambient, int codim,
                                  const std::vector<double>& eps_schedule, std::int64_t budget,
                                  std::uint64_t seed) {
    const int n = ambient.dim();
    const int ell = codim;
    if (fiber.map.dim_in() != n) throw PreconditionError("minkowski_content: map/ambient dim");
    if (fiber.map.dim_out() != ell)
        throw PreconditionError("minkowski_content: codim must equal the map range dimension");
    if (eps_schedule.empty()) throw PreconditionError("minkowski_content: empty eps schedule");
    std::vector<double> eps = sorted_desc(eps_schedule);
    const double eps_max = eps.front();
    for (double e : eps)
        if (!(e > 0.0)) throw PreconditionError("minkowski_content: eps must be positive");

    // Coordinate-selector fibers in a box ambient admit the exact distance to
    // the clamped slice (not just to its affine hull), which removes the
    // first-order frame bias at the slice boundary.
    std::function<double(const Eigen::VectorXd&, double)> dist_fn;
    auto selector = fiber.map.selector_axes();
    auto box = axis_box_of(ambient);
    bool slice_exact = false;
    if (selector && box) {
        std::vector<bool> in_fiber(n, false);
        for (std::size_t i = 0; i < selector->size(); ++i) in_fiber[(*selector)[i]] = true;
        auto axes = *selector;
        auto [bc, bh] = *box;
        Eigen::VectorXd level = fiber.level;
        dist_fn = [axes, in_fiber, bc, bh, level](const Eigen::VectorXd& x, double) {
            double sq = 0.0;
            for (std::size_t i = 0; i < axes.size(); ++i) {
                double d = x[axes[i]] - level[static_cast<int>(i)];
                sq += d * d;
            }
            for (int j = 0; j < x.size(); ++j) {
                if (in_fiber[j]) continue;
                double d = std::max(0.0, std::abs(x[j] - bc[j]) - bh[j]);
                sq += d * d;
            }
            return std::sqrt(sq);
        };
        // level must itself lie inside the box slab for a nonempty fiber
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (std::abs(fiber.level[static_cast<int>(i)] - bc[axes[i]]) > bh[axes[i]])
                dist_fn = [](const Eigen::VectorXd&, double) { return kInf; };
        slice_exact = true;
    }

    auto uniform = MeasureModel::uniform_on(ambient);
    std::optional<FiberDistanceOracle> oracle;
    if (!slice_exact) {
        oracle.emplace(fiber, uniform, &ambient, eps_max,
                       std::max<std::int64_t>(budget / 16, 8192), substream_seed(seed, 0xF1BE));
        dist_fn = [&oracle](const Eigen::VectorXd& x, double cap) {
            return oracle->distance(x, cap);
        };
    }

    ContentEstimate out;
    out.eps_schedule = eps;
    if (oracle && oracle->empty()) {
        out.per_eps_values.assign(eps.size(), 0.0);
        out.per_eps_std_errors.assign(eps.size(), 0.0);
        out.extrapolation_note = "fiber empty in ambient";
        return out;
    }

    Eigen::VectorXd lo, hi;
    ambient.bounding_box(lo, hi);
    lo.array() -= eps_max;
    hi.array() += eps_max;
    double prop_vol = (hi - lo).prod();

    std::vector<std::int64_t> hits(eps.size(), 0);
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    Eigen::VectorXd x(n);
    while (done < budget) {
        Rng rng = Rng::substream(substream_seed(seed, 0x7B0E), stream++);
        std::int64_t take = std::min<std::int64_t>(kSubstreamBlock, budget - done);
        for (std::int64_t i = 0; i < take; ++i) {
            for (int k = 0; k < n; ++k) x[k] = rng.uniform(lo[k], hi[k]);
            double d = dist_fn(x, eps_max);
            for (std::size_t e = 0; e < eps.size(); ++e)
                if (d <= eps[e]) ++hits[e];
        }
        done += take;
    }

    for (std::size_t e = 0; e < eps.size(); ++e) {
        double p = static_cast<double>(hits[e]) / static_cast<double>(budget);
        double norm = unit_ball_volume(ell) * std::pow(eps[e], ell);
        out.per_eps_values.push_back(p * prop_vol / norm);
        double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(budget));
        if (hits[e] == 0) se = 3.0 / static_cast<double>(budget);
        out.per_eps_std_errors.push_back(se * prop_vol / norm);
    }
    auto [a, a_se] = extrapolate_to_zero(eps, out.per_eps_values, out.per_eps_std_errors);
    out.value = a;
    out.std_error = a_se;
    out.extrapolation_note = "inverse-eps^2 weighted linear fit a + b*eps, reported a";
    return out;
}

std::vector<Eigen::VectorXd> sampled_levels(const MapSpec& f, const MeasureModel& mu, int count,
                                            std::uint64_t seed) {
    const std::int64_t pool = std::max<std::int64_t>(4096, 16L * count);
    Eigen::MatrixXd pts = mu.sample_matrix(pool, seed);
    std::vector<Eigen::VectorXd> values(pool);
    for (std::int64_t i = 0; i < pool; ++i) values[i] = f(pts.col(i));
    std::sort(values.begin(), values.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (int i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return a[i] < b[i];
        return false;
    });
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < count; ++i) {
        auto idx = static_cast<std::int64_t>((i + 0.5) / count * (pool - 1));
        out.push_back(values[idx]);
    }
    return out;
}

WaistCertificate gaussian_waist_check(const MapSpec& f, int ell,
                                      const std::vector<Eigen::VectorXd>& user_levels,
                                      const std::vector<double>& r_grid, std::int64_t budget,
                                      std::uint64_t seed) {
    const int n = f.dim_in();
    if (f.dim_out() != ell) throw PreconditionError("gaussian_waist_check: ell != map range dim");
    if (r_grid.empty()) throw PreconditionError("gaussian_waist_check: empty r grid");
    auto gauss = MeasureModel::gaussian(n);

    std::vector<Eigen::VectorXd> levels = user_levels;
    for (auto& t : sampled_levels(f, gauss, 9, substream_seed(seed, 0x9E1)))
        levels.push_back(std::move(t));

    const double r_max = *std::max_element(r_grid.begin(), r_grid.end());
    Eigen::MatrixXd zs = gauss.sample_matrix(budget, substream_seed(seed, 0x5A11));

    WaistCertificate cert;
    cert.subject = "gaussian_" + std::to_string(n);
    cert.map_id = f.id();
    cert.tag = "gaussian-waist";
    cert.ell = ell;
    cert.tolerance = 3.0;  // noise-band multiplier
    cert.series["r_grid"] = r_grid;
    std::vector<double> bounds;
    for (double r : r_grid) bounds.push_back(gaussian_ball_measure(ell, r));
    cert.series["bounds"] = bounds;

    double best_min_margin = -kInf;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        FiberSpec fiber{f, levels[li], 1e-9};
        FiberDistanceOracle oracle(fiber, gauss, nullptr, r_max,
                                   std::max<std::int64_t>(budget / 16, 8192),
                                   substream_seed(seed, 0xC10D + li));
        if (oracle.empty()) continue;
        std::vector<double> dist(budget);
        for (std::int64_t i = 0; i < budget; ++i) dist[i] = oracle.distance(zs.col(i), r_max);
        double min_margin = kInf;
        std::vector<double> measures, ses;
        for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
            std::int64_t hit = 0;
            for (double d : dist)
                if (d <= r_grid[ri]) ++hit;
            double p = static_cast<double>(hit) / static_cast<double>(budget);
            double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(budget));
            if (hit == 0 || hit == budget) se = 3.0 / static_cast<double>(budget);
            measures.push_back(p);
            ses.push_back(se);
            min_margin = std::min(min_margin, (p - bounds[ri] + 3.0 * se) /
                                                  std::max(se, 1e-300));
        }
        // margin in noise units; a level passes when every r clears the bound
        // within three standard errors
        if (min_margin > best_min_margin) {
            best_min_margin = min_margin;
            cert.best_level = levels[li];
            cert.series["tube_measures"] = measures;
            cert.series["tube_std_errors"] = ses;
        }
    }
    cert.achieved = best_min_margin;
    cert.bound_value = 0.0;
    cert.witness_found = best_min_margin >= 0.0;
    cert.status = cert.witness_found ? CheckStatus::Pass : CheckStatus::Fail;
    if (!cert.witness_found)
        cert.note = "witness not found on the probed level grid; not a refutation";
    return cert;
}

WaistCertificate cube_waist_check(const MapSpec& f, int ell,
                                  const std::vector<Eigen::VectorXd>& level_grid,
                                  std::int64_t budget, std::uint64_t seed, double tol,
                                  bool run_conjugate) {
    const int n = f.dim_in();
    if (f.dim_out() != ell) throw PreconditionError("cube_waist_check: ell != map range dim");
    ConvexBody cube = unit_cube(n);
    auto uniform = MeasureModel::uniform_on(cube);

    std::vector<Eigen::VectorXd> levels = level_grid;
    if (levels.empty())
        levels = sampled_levels(f, uniform, 9, substream_seed(seed, 0x9E2));

    WaistCertificate cert;
    cert.subject = "cube" + std::to_string(n);
    cert.map_id = f.id();
    cert.tag = "cube-waist";
    cert.ell = ell;
    cert.tolerance = tol;
    cert.bound_value = 1.0;

    double best = -kInf, best_se = 0.0;
    std::vector<double> per_level;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        FiberSpec fiber{f, levels[li], 1e-9};
        auto content = minkowski_content(fiber, cube, ell, default_eps_schedule(), budget,
                                         substream_seed(seed, 0xCC + li));
        per_level.push_back(content.value);
        if (content.value > best) {
            best = content.value;
            best_se = content.std_error;
            cert.best_level = levels[li];
            cert.series["eps_schedule"] = content.eps_schedule;
            cert.series["per_eps_values"] = content.per_eps_values;
        }
    }
    cert.series["per_level_content"] = per_level;
    cert.achieved = best;
    cert.quantities["content_std_error"] = best_se;
    cert.witness_found = best >= (1.0 - tol) * cert.bound_value;
    cert.status = cert.witness_found ? CheckStatus::Pass : CheckStatus::Fail;

    if (run_conjugate) {
        // the transported conjugate reduces the cube statement to the
        // Gaussian one; attached as a sub-check
        auto conj = gaussian_waist_check(f.transported(), ell, levels, {0.25, 0.5, 1.0},
                                         std::max<std::int64_t>(budget / 4, 50000),
                                         substream_seed(seed, 0xC0A7));
        cert.quantities["conjugate_witness_found"] = conj.witness_found ? 1.0 : 0.0;
        cert.note = conj.witness_found
                        ? "conjugate transported map passed the gaussian tube check"
                        : "conjugate transported map found no witness (informational)";
    }
    return cert;
}

WaistCertificate box_waist_check(const Eigen::VectorXd& extents, const MapSpec& f, int ell,
                                 const std::vector<Eigen::VectorXd>& level_grid,
                                 std::int64_t budget, std::uint64_t seed, double tol) {
    const int n = static_cast<int>(extents.size());
    for (int i = 0; i + 1 < n; ++i)
        if (!(extents[i] <= extents[i + 1]))
            throw PreconditionError("box_waist_check: extents must be ascending");
    if (!(extents[0] > 0.0)) throw PreconditionError("box_waist_check: extents must be positive");
    if (f.dim_in() != n || f.dim_out() != ell)
        throw PreconditionError("box_waist_check: map shape mismatch");

    ConvexBody box = corner_box(extents);
    auto uniform = MeasureModel::uniform_on(box);
    std::vector<Eigen::VectorXd> levels = level_grid;
    if (levels.empty())
        levels = sampled_levels(f, uniform, 9, substream_seed(seed, 0x9E3));

    double bound = 1.0;
    for (int j = 0; j < n - ell; ++j) bound *= extents[j];

    WaistCertificate cert;
    cert.subject = "box";
    cert.map_id = f.id();
    cert.tag = "box-waist";
    cert.ell = ell;
    cert.tolerance = tol;
    cert.bound_value = bound;

    double best = -kInf, best_se = 0.0;
    std::vector<double> per_level;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        FiberSpec fiber{f, levels[li], 1e-9};
        auto content = minkowski_content(fiber, box, ell, default_eps_schedule(), budget,
                                         substream_seed(seed, 0xB0 + li));
        per_level.push_back(content.value);
        if (content.value > best) {
            best = content.value;
            best_se = content.std_error;
            cert.best_level = levels[li];
        }
    }
    cert.series["per_level_content"] = per_level;
    cert.achieved = best;
    cert.quantities["content_std_error"] = best_se;
    cert.witness_found = best >= (1.0 - tol) * bound;
    cert.status = cert.witness_found ? CheckStatus::Pass : CheckStatus::Fail;

    // proof-map composition: the same map precomposed with the diagonal
    // scaling lives on the unit cube with bound 1 (informational sub-check)
    auto scaled = f.precomposed_diag(extents);
    auto sub = cube_waist_check(scaled, ell, levels, std::max<std::int64_t>(budget / 4, 50000),
                                substream_seed(seed, 0x5CA1), tol, /*run_conjugate=*/false);
    cert.quantities["cube_composition_witness_found"] = sub.witness_found ? 1.0 : 0.0;
    return cert;
}

WaistCertificate section_theorem_check(const ConvexBody& body, const MapSpec& f, int ell,
                                       const std::vector<Eigen::VectorXd>& level_grid,
                                       int flat_search, std::int64_t budget, std::uint64_t seed,
                                       double tol) {
    const int n = body.dim();
    if (ell < 1 || ell > n) throw PreconditionError("section_theorem_check: need 1 <= ell <= n");
    if (f.dim_out() != ell) throw PreconditionError("section_theorem_check: map range != ell");
    if (f.id().rfind("const", 0) == 0)
        throw PreconditionError("section_theorem_check: constant maps are excluded");
    auto uniform = MeasureModel::uniform_on(body);

    std::vector<Eigen::VectorXd> levels = level_grid;
    if (levels.empty())
        levels = sampled_levels(f, uniform, 9, substream_seed(seed, 0x9E4));

    auto vol = estimate_volume(body, budget, substream_seed(seed, 1));

    // fiber content sup over levels
    double fiber_sup = 0.0, fiber_se = 0.0;
    Eigen::VectorXd best_level;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        FiberSpec fiber{f, levels[li], 1e-9};
        auto content = minkowski_content(fiber, body, ell, default_eps_schedule(), budget,
                                         substream_seed(seed, 0x5EC + li));
        if (content.value > fiber_sup) {
            fiber_sup = content.value;
            fiber_se = content.std_error;
            best_level = levels[li];
        }
    }

    // section sup over a finite flat family: coordinate flats, random flats
    // through interior points, and (for well-behaved bodies) vertex-pair
    // chords at ell = 1
    std::vector<AffineFlat> flats;
    Eigen::VectorXd center = barycenter(body, std::max<std::int64_t>(budget / 8, 20000),
                                        substream_seed(seed, 2));
    {
        std::vector<int> axes(ell);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == ell) {
                flats.push_back(AffineFlat::coordinate(n, axes, center));
                return;
            }
            for (int i = start; i < n; ++i) {
                axes[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }
    Rng rng(substream_seed(seed, 3));
    auto interior_pts = uniform.sample(std::max(flat_search, 1), substream_seed(seed, 4));
    for (int k = 0; k < flat_search; ++k) {
        Eigen::MatrixXd dirs(n, ell);
        for (int j = 0; j < ell; ++j) dirs.col(j) = rng.unit_vec(n);
        flats.push_back(AffineFlat::spanning(interior_pts[k % interior_pts.size()], dirs));
    }
    if (ell == 1 && body.kind() == BodyKind::HPolytope) {
        const auto& vs = body.vertices();
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j) {
                Eigen::MatrixXd d = vs[j] - vs[i];
                if (d.norm() < 1e-12) continue;
                flats.push_back(AffineFlat::spanning(vs[i], d));
            }
    }

    double section_sup = 0.0, section_se = 0.0;
    std::int64_t sec_budget = std::max<std::int64_t>(20000, budget / (2 * flats.size() + 1));
    for (std::size_t i = 0; i < flats.size(); ++i) {
        auto sec = section_volume(body, flats[i], sec_budget, substream_seed(seed, 0xF1A7 + i));
        if (sec.value > section_sup) {
            section_sup = sec.value;
            section_se = sec.std_error;
        }
    }

    WaistCertificate cert;
    cert.subject = body.name().empty() ? "body" : body.name();
    cert.map_id = f.id();
    cert.tag = "section-product";
    cert.ell = ell;
    cert.best_level = best_level;
    cert.tolerance = tol;
    double product = fiber_sup * section_sup;
    double product_se = fiber_se * section_sup + section_se * fiber_sup;
    cert.achieved = product;
    cert.bound_value = vol.value;
    cert.quantities["fiber_content_sup"] = fiber_sup;
    cert.quantities["section_sup"] = section_sup;
    cert.quantities["volume"] = vol.value;
    cert.quantities["product_std_error"] = product_se;
    cert.quantities["volume_std_error"] = vol.std_error;
    cert.quantities["flats_searched"] = static_cast<double>(flats.size());
    cert.witness_found =
        product >= vol.value * (1.0 - tol) - 3.0 * (product_se + vol.std_error);
    cert.status = cert.witness_found ? CheckStatus::Pass : CheckStatus::Fail;
    return cert;
}

WaistCertificate symmetric_body_waist_check(const ConvexBody& body, const MeasureModel& mu,
                                            const MapSpec& f, int ell,
                                            const std::vector<Eigen::VectorXd>& level_grid,
                                            const std::vector<double>& r_grid,
                                            std::int64_t budget, std::uint64_t seed) {
    const int n = body.dim();
    if (f.dim_out() != ell)
        throw PreconditionError("symmetric_body_waist_check: map range != ell");
    for (double r : r_grid)
        if (!(r > 0.0 && r < 1.0))
            throw PreconditionError("symmetric_body_waist_check: r grid must lie in (0,1)");
    // symmetry probe
    {
        auto pts = MeasureModel::uniform_on(body).sample(2000, substream_seed(seed, 0x51));
        for (const auto& x : pts)
            if (!body.contains(-x))
                throw PreconditionError("symmetric_body_waist_check: body fails symmetry probe");
    }

    std::vector<Eigen::VectorXd> levels = level_grid;
    if (levels.empty())
        levels = sampled_levels(f, mu, 9, substream_seed(seed, 0x9E5));

    Eigen::MatrixXd xs = mu.sample_matrix(budget, substream_seed(seed, 0x5A12));
    WaistCertificate cert;
    cert.subject = body.name().empty() ? "symmetric body" : body.name();
    cert.map_id = f.id();
    cert.tag = "symmetric-tube";
    cert.ell = ell;
    cert.tolerance = 3.0;
    cert.series["r_grid"] = r_grid;
    std::vector<double> bounds;
    for (double r : r_grid) bounds.push_back(std::pow(r / (2.0 + r), ell));
    cert.series["bounds"] = bounds;

    const double r_max = *std::max_element(r_grid.begin(), r_grid.end());
    double best_min_margin = -kInf;
    bool approximate_gauge = false;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        std::vector<double> gdist(budget, kInf);
        if (auto probe = f.fiber_gauge_distance(xs.col(0), levels[li], body); probe.has_value()) {
            for (std::int64_t i = 0; i < budget; ++i)
                gdist[i] = *f.fiber_gauge_distance(xs.col(i), levels[li], body);
        } else {
            // numeric fall-back: body-gauge of the offset to a Euclidean-near
            // fiber point (documented approximation)
            approximate_gauge = true;
            FiberSpec fiber{f, levels[li], 1e-9};
            double reach = r_max * body.bounding_radius();
            FiberDistanceOracle oracle(fiber, mu, nullptr, reach,
                                       std::max<std::int64_t>(budget / 16, 8192),
                                       substream_seed(seed, 0xD0 + li));
            if (oracle.empty()) continue;
            for (std::int64_t i = 0; i < budget; ++i) {
                auto y = newton_to_fiber(f, levels[li], xs.col(i), 1e-9, 12);
                if (y) gdist[i] = body.gauge(xs.col(i) - *y);
            }
        }
        double min_margin = kInf;
        std::vector<double> measures, ses;
        for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
            std::int64_t hit = 0;
            for (double d : gdist)
                if (d <= r_grid[ri]) ++hit;
            double p = static_cast<double>(hit) / static_cast<double>(budget);
            double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(budget));
            if (hit == 0 || hit == budget) se = 3.0 / static_cast<double>(budget);
            measures.push_back(p);
            ses.push_back(se);
            min_margin = std::min(min_margin,
                                  (p - bounds[ri] + 3.0 * se) / std::max(se, 1e-300));
        }
        if (min_margin > best_min_margin) {
            best_min_margin = min_margin;
            cert.best_level = levels[li];
            cert.series["tube_measures"] = measures;
            cert.series["tube_std_errors"] = ses;
        }
    }
    cert.achieved = best_min_margin;
    cert.witness_found = best_min_margin >= 0.0;
    cert.status = cert.witness_found ? CheckStatus::Pass : CheckStatus::Fail;
    if (approximate_gauge) cert.note = "gauge distance approximated via Euclidean-near fiber point";
    return cert;
}

double waist_upper_bound(const ConvexBody& body, int ell, const std::vector<MapSpec>& candidates,
                         std::int64_t budget, std::uint64_t seed,
                         std::vector<double>* per_candidate) {
    const int n = body.dim();
    if (ell < 1 || ell > n - 1) throw PreconditionError("waist_upper_bound: need 1 <= ell < n");
    if (candidates.empty()) throw PreconditionError("waist_upper_bound: no candidates");
    auto uniform = MeasureModel::uniform_on(body);
    double best = kInf;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const MapSpec& f = candidates[ci];
        if (f.dim_in() != n || f.dim_out() != n - ell)
            throw PreconditionError("waist_upper_bound: candidate must map R^n -> R^{n-ell}");
        auto levels = sampled_levels(f, uniform, 9, substream_seed(seed, 0x9E6 + ci));
        double sup = 0.0;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            FiberSpec fiber{f, levels[li], 1e-9};
            auto content = minkowski_content(fiber, body, n - ell, default_eps_schedule(), budget,
                                             substream_seed(seed, 0xCAFE + 31 * ci + li));
            sup = std::max(sup, content.value);
        }
        double value = std::pow(sup, 1.0 / ell);
        if (per_candidate) per_candidate->push_back(value);
        best = std::min(best, value);
    }
    return best;
}

namespace {

// lift f on the coordinate subspace "axes" to g(x) = (x_rest, f(x_axes) / s)
MapSpec lifted_map(const MapSpec& f, int n, const std::vector<int>& axes, double shrink) {
    std::vector<int> rest;
    std::vector<bool> used(n, false);
    for (int a : axes) used[a] = true;
    for (int i = 0; i < n; ++i)
        if (!used[i]) rest.push_back(i);
    const int k = static_cast<int>(axes.size());
    auto ax = axes;
    MapSpec base = f;
    int out_dim = static_cast<int>(rest.size()) + f.dim_out();
    return MapSpec::callable(
        n, out_dim,
        [ax, rest, base, shrink](const Eigen::VectorXd& x) {
            Eigen::VectorXd sub(ax.size());
            for (std::size_t i = 0; i < ax.size(); ++i) sub[static_cast<int>(i)] = x[ax[i]] * shrink;
            Eigen::VectorXd fval = base(sub);
            Eigen::VectorXd out(rest.size() + fval.size());
            for (std::size_t i = 0; i < rest.size(); ++i) out[static_cast<int>(i)] = x[rest[i]];
            out.tail(fval.size()) = fval;
            return out;
        },
        "lift(" + base.id() + ")");
}

}  // namespace

CheckRecord projection_candidate_check(const ConvexBody& body, const std::vector<int>& axes,
                                       const ConvexBody& projected_body, const MapSpec& f,
                                       int ell, std::int64_t budget, std::uint64_t seed) {
    const int n = body.dim();
    const int k = static_cast<int>(axes.size());
    if (projected_body.dim() != k)
        throw PreconditionError("projection_candidate_check: projected body dim != #axes");
    if (f.dim_in() != k || f.dim_out() != k - ell)
        throw PreconditionError("projection_candidate_check: candidate must map R^k -> R^{k-ell}");

    MapSpec g = lifted_map(f, n, axes, 1.0);
    auto uni_proj = MeasureModel::uniform_on(projected_body);
    auto uni_body = MeasureModel::uniform_on(body);

    auto g_levels = sampled_levels(g, uni_body, 9, substream_seed(seed, 1));
    double sup_g = 0.0;
    for (std::size_t li = 0; li < g_levels.size(); ++li) {
        auto c = minkowski_content({g, g_levels[li], 1e-9}, body, n - ell,
                                   default_eps_schedule(), budget, substream_seed(seed, 10 + li));
        sup_g = std::max(sup_g, c.value);
    }
    auto f_levels = sampled_levels(f, uni_proj, 9, substream_seed(seed, 2));
    for (const auto& gl : g_levels) f_levels.push_back(gl.tail(k - ell));
    double sup_f = 0.0, se_f = 0.0;
    for (std::size_t li = 0; li < f_levels.size(); ++li) {
        auto c = minkowski_content({f, f_levels[li], 1e-9}, projected_body, k - ell,
                                   default_eps_schedule(), budget, substream_seed(seed, 40 + li));
        if (c.value > sup_f) {
            sup_f = c.value;
            se_f = c.std_error;
        }
    }
    CheckRecord rec;
    rec.name = "projection_candidate";
    rec.tag = "waist-projection-monotonicity";
    rec.quantities["projected_sup_content"] = sup_f;
    rec.quantities["lifted_sup_content"] = sup_g;
    rec.std_errors["projected_sup_content"] = se_f;
    rec.tolerance = 0.1;
    rec.status = sup_f >= sup_g * (1.0 - rec.tolerance) - 3.0 * se_f ? CheckStatus::Pass
                                                                     : CheckStatus::Fail;
    return rec;
}

CheckRecord section_candidate_check(const ConvexBody& body, const std::vector<int>& axes,
                                    const ConvexBody& section_body, const MapSpec& f, int ell,
                                    std::int64_t budget, std::uint64_t seed) {
    const int n = body.dim();
    const int k = static_cast<int>(axes.size());
    if (!body.centrally_symmetric())
        throw PreconditionError("section_candidate_check: body must be centrally symmetric");
    if (section_body.dim() != k || f.dim_in() != k || f.dim_out() != k - ell)
        throw PreconditionError("section_candidate_check: shape mismatch");

    // halved-difference lift: fibers of g sit inside translates of 2 * fibers of f
    MapSpec g = lifted_map(f, n, axes, 0.5);
    auto uni_sec = MeasureModel::uniform_on(section_body);
    auto uni_body = MeasureModel::uniform_on(body);

    auto g_levels = sampled_levels(g, uni_body, 9, substream_seed(seed, 1));
    double sup_g = 0.0;
    for (std::size_t li = 0; li < g_levels.size(); ++li) {
        auto c = minkowski_content({g, g_levels[li], 1e-9}, body, n - ell,
                                   default_eps_schedule(), budget, substream_seed(seed, 10 + li));
        sup_g = std::max(sup_g, c.value);
    }
    auto f_levels = sampled_levels(f, uni_sec, 9, substream_seed(seed, 2));
    for (const auto& gl : g_levels) f_levels.push_back(gl.tail(k - ell));
    double sup_f = 0.0, se_f = 0.0;
    for (std::size_t li = 0; li < f_levels.size(); ++li) {
        auto c = minkowski_content({f, f_levels[li], 1e-9}, section_body, k - ell,
                                   default_eps_schedule(), budget, substream_seed(seed, 40 + li));
        if (c.value > sup_f) {
            sup_f = c.value;
            se_f = c.std_error;
        }
    }
    CheckRecord rec;
    rec.name = "section_candidate";
    rec.tag = "waist-section-monotonicity";
    rec.quantities["section_sup_content"] = sup_f;
    rec.quantities["lifted_sup_content"] = sup_g;
    rec.quantities["factor"] = std::pow(2.0, ell);
    rec.std_errors["section_sup_content"] = se_f;
    rec.tolerance = 0.1;
    rec.status = std::pow(2.0, ell) * sup_f >= sup_g * (1.0 - rec.tolerance) - 3.0 * se_f
                     ? CheckStatus::Pass
                     : CheckStatus::Fail;
    return rec;
}

}  // namespace waistlab
