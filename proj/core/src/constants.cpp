#include "waistlab/constants.hpp"

#include <cmath>

#include "waistlab/rng.hpp"
#include "waistlab/specfun.hpp"

namespace waistlab {

PsiEstimate psi_alpha_constant(const MeasureModel& mu, double alpha, int directions,
                               const std::vector<double>& p_grid, std::int64_t budget,
                               std::uint64_t seed) {
    if (alpha < 1.0 || alpha > 2.0)
        throw PreconditionError("psi_alpha_constant: alpha must lie in [1, 2]");
    if (directions < 1 || p_grid.empty())
        throw PreconditionError("psi_alpha_constant: need directions and a p grid");
    PsiEstimate out;
    out.alpha = alpha;
    out.p_grid = p_grid;
    out.direction_count = directions;
    out.seed = seed;
    out.note = "finite-probe lower bound";
    const int n = mu.dim();
    int skipped = 0;
    for (int d = 0; d < directions; ++d) {
        Rng rng = Rng::substream(seed, 0xD1000 + d);
        Eigen::VectorXd theta = rng.unit_vec(n);
        std::uint64_t stream = substream_seed(seed, 0xA0000 + d);  // shared across all p
        auto m1 = mu.moment(theta, 1.0, budget, stream);
        if (m1.value < 1e-12) {
            ++skipped;
            continue;
        }
        for (double p : p_grid) {
            auto mp = mu.moment(theta, p, budget, stream);
            double ratio = mp.value / (std::pow(p, 1.0 / alpha) * m1.value);
            if (ratio > out.value) {
                out.value = ratio;
                out.argmax_direction = theta;
                out.argmax_p = p;
            }
        }
    }
    if (skipped > 0)
        out.note += "; skipped " + std::to_string(skipped) + " degenerate direction(s)";
    return out;
}

MCEstimate mean_width_parameter(const ConvexBody& body, int directions, std::uint64_t seed) {
    if (!body.origin_interior())
        throw PreconditionError("mean_width_parameter: origin must be interior");
    double sum = 0.0, sum_sq = 0.0;
    const int n = body.dim();
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    while (done < directions) {
        Rng rng = Rng::substream(seed, stream++);
        std::int64_t take = std::min<std::int64_t>(kSubstreamBlock, directions - done);
        for (std::int64_t i = 0; i < take; ++i) {
            double g = body.gauge(rng.unit_vec(n));
            sum += g;
            sum_sq += g * g;
        }
        done += take;
    }
    MCEstimate est;
    est.value = sum / directions;
    double var = std::max(sum_sq / directions - est.value * est.value, 0.0);
    est.std_error = std::sqrt(var / directions);
    est.samples = directions;
    est.seed = seed;
    return est;
}

MCEstimate section_volume(const ConvexBody& body, const AffineFlat& flat, std::int64_t budget,
                          std::uint64_t seed) {
    const int ell = flat.dim();
    // The section lives within this radius around the flat's base point.
    double radius = body.bounding_radius() + flat.point.norm();
    double ball_vol = unit_ball_volume(ell) * std::pow(radius, ell);
    std::int64_t hits = 0;
    std::int64_t done = 0;
    std::uint64_t stream = 0;
    while (done < budget) {
        Rng rng = Rng::substream(seed, stream++);
        std::int64_t take = std::min<std::int64_t>(kSubstreamBlock, budget - done);
        for (std::int64_t i = 0; i < take; ++i) {
            Eigen::VectorXd y = rng.ball_point(ell, radius);
            if (body.contains(flat.embed(y))) ++hits;
        }
        done += take;
    }
    double p = static_cast<double>(hits) / static_cast<double>(budget);
    MCEstimate est;
    est.value = ball_vol * p;
    est.std_error = ball_vol * std::sqrt(std::max(p * (1.0 - p), 0.0) / budget);
    if (hits == 0) est.std_error = ball_vol * 3.0 / budget;
    est.samples = budget;
    est.seed = seed;
    return est;
}

CheckRecord slice_bound_check(const ConvexBody& body, const std::vector<AffineFlat>& flats,
                              const PsiEstimate& psi, double c_desk, std::int64_t budget,
                              std::uint64_t seed) {
    if (flats.empty()) throw PreconditionError("slice_bound_check: no flats supplied");
    const int n = body.dim();
    const int ell = flats.front().dim();
    auto vol = estimate_volume(body, budget, substream_seed(seed, 1));
    double denom = std::pow(vol.value, static_cast<double>(ell) / n);
    double bound = std::pow(c_desk * psi.value, n - ell);

    CheckRecord rec;
    rec.name = "slice_bound";
    rec.tag = "isotropic-slice-bound";
    rec.tolerance = 0.0;
    double worst_ratio = 0.0;
    int misses = 0;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < flats.size(); ++i) {
        if (flats[i].dim() != ell)
            throw PreconditionError("slice_bound_check: flats must share one dimension");
        auto sec = section_volume(body, flats[i], budget, substream_seed(seed, 100 + i));
        if (sec.value == 0.0) ++misses;  // flat misses the body: reported, not failed
        double ratio = sec.value / denom;
        ratios.push_back(ratio);
        worst_ratio = std::max(worst_ratio, ratio + 3.0 * sec.std_error / denom);
    }
    rec.quantities["max_section_ratio"] = worst_ratio;
    rec.quantities["bound"] = bound;
    rec.quantities["psi_value"] = psi.value;
    rec.quantities["c_desk"] = c_desk;
    rec.quantities["volume"] = vol.value;
    rec.quantities["flats_missing_body"] = misses;
    rec.series["section_ratios"] = ratios;
    rec.std_errors["volume"] = vol.std_error;
    rec.status = worst_ratio <= bound ? CheckStatus::Pass : CheckStatus::Fail;
    return rec;
}

}  // namespace waistlab
