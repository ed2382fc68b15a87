#include "waistlab/maps.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "waistlab/specfun.hpp"

namespace waistlab {

Eigen::VectorXd gaussian_transport(const Eigen::VectorXd& x) {
    Eigen::VectorXd u(x.size());
    for (int i = 0; i < x.size(); ++i) u[i] = normal_cdf(x[i]);
    return u;
}

Eigen::VectorXd gaussian_transport_inverse(const Eigen::VectorXd& u) {
    Eigen::VectorXd x(u.size());
    for (int i = 0; i < u.size(); ++i) x[i] = normal_quantile(u[i]);
    return x;
}

namespace {
enum class DistKind {
    None,
    Affine,           // fiber {A x = t}
    Radial,           // fiber {|x - c| = t}
    PlanePair,        // fiber {q (v.x)^2 = t}
    AffineTransport,  // fiber {A G(x) = t}, A a coordinate selector
    Everything,       // constant map: fiber is all of R^n or empty
};
}  // namespace

struct MapSpec::Impl {
    int dim_in = 0;
    int dim_out = 0;
    std::string id;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;

    DistKind dist = DistKind::None;
    Eigen::MatrixXd a;            // Affine / AffineTransport
    Eigen::LLT<Eigen::MatrixXd> gram_llt;  // chol(A A')
    Eigen::VectorXd center;       // Radial
    double quad_coef = 0.0;       // PlanePair
    Eigen::VectorXd quad_dir;
    Eigen::VectorXd const_value;  // Everything
};

namespace {

std::shared_ptr<MapSpec::Impl> make_affine(Eigen::MatrixXd a, std::string id,
                                           bool transported = false) {
    auto im = std::make_shared<MapSpec::Impl>();
    im->dim_in = static_cast<int>(a.cols());
    im->dim_out = static_cast<int>(a.rows());
    im->id = std::move(id);
    im->a = std::move(a);
    im->gram_llt.compute(im->a * im->a.transpose());
    if (im->gram_llt.info() != Eigen::Success)
        throw PreconditionError("map: linear map must have full row rank");
    if (transported) {
        im->dist = DistKind::AffineTransport;
        Eigen::MatrixXd m = im->a;
        im->eval = [m](const Eigen::VectorXd& x) { return (m * gaussian_transport(x)).eval(); };
    } else {
        im->dist = DistKind::Affine;
        Eigen::MatrixXd m = im->a;
        im->eval = [m](const Eigen::VectorXd& x) { return (m * x).eval(); };
    }
    return im;
}

double poly_eval_component(const std::vector<PolyTerm>& terms, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const auto& t : terms) {
        double m = t.coef;
        for (std::size_t i = 0; i < t.exponents.size(); ++i)
            for (int e = 0; e < t.exponents[i]; ++e) m *= x[static_cast<int>(i)];
        v += m;
    }
    return v;
}

}  // namespace

MapSpec MapSpec::coordinate(int dim_in, int k) {
    if (k < 1 || k > dim_in) throw PreconditionError("coordinate map: need 1 <= k <= dim");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, dim_in);
    a.leftCols(k).setIdentity();
    return MapSpec(make_affine(std::move(a), "coord:" + std::to_string(k)));
}

MapSpec MapSpec::linear(const Eigen::MatrixXd& matrix) {
    return MapSpec(make_affine(matrix, "linear"));
}

MapSpec MapSpec::radial(int dim_in) { return radial(dim_in, Eigen::VectorXd::Zero(dim_in)); }

MapSpec MapSpec::radial(int dim_in, const Eigen::VectorXd& center) {
    if (center.size() != dim_in) throw PreconditionError("radial map: center dim mismatch");
    auto im = std::make_shared<Impl>();
    im->dim_in = dim_in;
    im->dim_out = 1;
    im->id = "radial";
    im->dist = DistKind::Radial;
    im->center = center;
    Eigen::VectorXd c = center;
    im->eval = [c](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v[0] = (x - c).norm();
        return v;
    };
    return MapSpec(im);
}

MapSpec MapSpec::quadratic(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols()) throw PreconditionError("quadratic map: Q must be square");
    auto im = std::make_shared<Impl>();
    im->dim_in = static_cast<int>(q.rows());
    im->dim_out = 1;
    im->id = "quad";
    Eigen::MatrixXd qs = 0.5 * (q + q.transpose());
    im->eval = [qs](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v[0] = x.dot(qs * x);
        return v;
    };
    // Rank-one Q = q vv' has the two-hyperplane fiber with a closed distance.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qs);
    Eigen::VectorXd ev = es.eigenvalues();
    int nonzero = 0, arg = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) > 1e-12 * ev.cwiseAbs().maxCoeff()) {
            ++nonzero;
            arg = i;
        }
    if (nonzero == 1) {
        im->dist = DistKind::PlanePair;
        im->quad_coef = ev[arg];
        im->quad_dir = es.eigenvectors().col(arg);
    }
    return MapSpec(im);
}

MapSpec MapSpec::polynomial(int dim_in, std::vector<std::vector<PolyTerm>> components) {
    if (components.empty()) throw PreconditionError("polynomial map: no components");
    auto im = std::make_shared<Impl>();
    im->dim_in = dim_in;
    im->dim_out = static_cast<int>(components.size());
    im->id = "poly";
    auto comps = std::move(components);
    im->eval = [comps](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(static_cast<int>(comps.size()));
        for (std::size_t j = 0; j < comps.size(); ++j)
            v[static_cast<int>(j)] = poly_eval_component(comps[j], x);
        return v;
    };
    return MapSpec(im);
}

MapSpec MapSpec::constant(int dim_in, const Eigen::VectorXd& value) {
    auto im = std::make_shared<Impl>();
    im->dim_in = dim_in;
    im->dim_out = static_cast<int>(value.size());
    im->id = "const";
    im->dist = DistKind::Everything;
    im->const_value = value;
    Eigen::VectorXd v = value;
    im->eval = [v](const Eigen::VectorXd&) { return v; };
    return MapSpec(im);
}

MapSpec MapSpec::callable(int dim_in, int dim_out,
                          std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
                          std::string id) {
    auto im = std::make_shared<Impl>();
    im->dim_in = dim_in;
    im->dim_out = dim_out;
    im->id = std::move(id);
    im->eval = std::move(fn);
    return MapSpec(im);
}

MapSpec MapSpec::transported() const {
    if (impl_->dist == DistKind::Affine) {
        // coordinate selector rows keep an exact transported fiber distance
        bool selector = true;
        for (int i = 0; i < impl_->a.rows() && selector; ++i) {
            int ones = 0;
            for (int j = 0; j < impl_->a.cols(); ++j) {
                double v = impl_->a(i, j);
                if (v == 1.0) ++ones;
                else if (v != 0.0) selector = false;
            }
            selector = selector && ones == 1;
        }
        if (selector) {
            auto im = make_affine(impl_->a, impl_->id + "|transport", /*transported=*/true);
            return MapSpec(im);
        }
    }
    auto im = std::make_shared<Impl>();
    im->dim_in = impl_->dim_in;
    im->dim_out = impl_->dim_out;
    im->id = impl_->id + "|transport";
    auto base = impl_;
    im->eval = [base](const Eigen::VectorXd& x) { return base->eval(gaussian_transport(x)); };
    return MapSpec(im);
}

MapSpec MapSpec::precomposed_diag(const Eigen::VectorXd& scales) const {
    if (scales.size() != impl_->dim_in) throw PreconditionError("precomposed_diag: dim mismatch");
    if (impl_->dist == DistKind::Affine)
        return MapSpec(make_affine(impl_->a * scales.asDiagonal(), impl_->id + "|scaled"));
    if (impl_->dist == DistKind::PlanePair) {
        Eigen::MatrixXd q =
            impl_->quad_coef * (scales.asDiagonal() * impl_->quad_dir) *
            (scales.asDiagonal() * impl_->quad_dir).transpose();
        return quadratic(q);
    }
    auto im = std::make_shared<Impl>();
    im->dim_in = impl_->dim_in;
    im->dim_out = impl_->dim_out;
    im->id = impl_->id + "|scaled";
    auto base = impl_;
    Eigen::VectorXd s = scales;
    im->eval = [base, s](const Eigen::VectorXd& x) {
        return base->eval((s.array() * x.array()).matrix());
    };
    return MapSpec(im);
}

int MapSpec::dim_in() const { return impl_->dim_in; }
int MapSpec::dim_out() const { return impl_->dim_out; }
const std::string& MapSpec::id() const { return impl_->id; }

Eigen::VectorXd MapSpec::operator()(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->dim_in) throw PreconditionError("map: input dim mismatch");
    return impl_->eval(x);
}

bool MapSpec::has_exact_distance() const { return impl_->dist != DistKind::None; }

std::optional<std::vector<int>> MapSpec::selector_axes() const {
    if (impl_->dist != DistKind::Affine) return std::nullopt;
    std::vector<int> axes;
    for (int i = 0; i < impl_->a.rows(); ++i) {
        int hit = -1;
        for (int j = 0; j < impl_->a.cols(); ++j) {
            double v = impl_->a(i, j);
            if (v == 1.0 && hit < 0) hit = j;
            else if (v != 0.0) return std::nullopt;
        }
        if (hit < 0) return std::nullopt;
        axes.push_back(hit);
    }
    return axes;
}

double MapSpec::fiber_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& t) const {
    const Impl& im = *impl_;
    const double inf = std::numeric_limits<double>::infinity();
    switch (im.dist) {
        case DistKind::Affine: {
            Eigen::VectorXd r = im.a * x - t;
            return std::sqrt(r.dot(im.gram_llt.solve(r)));
        }
        case DistKind::AffineTransport: {
            // selector rows: fiber is {x_i = quantile(t_i)} over selected i
            double sq = 0.0;
            for (int i = 0; i < im.a.rows(); ++i) {
                int j = 0;
                while (im.a(i, j) != 1.0) ++j;
                if (t[i] <= 0.0 || t[i] >= 1.0) return inf;
                double d = x[j] - normal_quantile(t[i]);
                sq += d * d;
            }
            return std::sqrt(sq);
        }
        case DistKind::Radial: {
            if (t[0] < 0.0) return inf;
            return std::abs((x - im.center).norm() - t[0]);
        }
        case DistKind::PlanePair: {
            double s2 = t[0] / im.quad_coef;
            if (s2 < 0.0) return inf;
            double s = std::sqrt(s2);
            double y = im.quad_dir.dot(x);
            return std::min(std::abs(y - s), std::abs(y + s));
        }
        case DistKind::Everything:
            return (im.const_value - t).norm() == 0.0 ? 0.0 : inf;
        case DistKind::None:
            break;
    }
    throw NumericError("fiber_distance: no exact distance for map '" + im.id + "'");
}

std::optional<double> MapSpec::fiber_gauge_distance(const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& t,
                                                    const ConvexBody& unit) const {
    const Impl& im = *impl_;
    if (im.dist == DistKind::Affine && im.dim_out == 1) {
        double h = unit.support(im.a.row(0).transpose());
        if (h <= 0.0) return std::nullopt;
        return std::abs(im.a.row(0).dot(x) - t[0]) / h;
    }
    if (im.dist == DistKind::Everything)
        return (im.const_value - t).norm() == 0.0
                   ? std::optional<double>(0.0)
                   : std::optional<double>(std::numeric_limits<double>::infinity());
    return std::nullopt;
}

MapSpec MapSpec::parse(const std::string& spec, int ambient_dim) {
    auto json_or_file = [&](const std::string& payload) {
        if (!payload.empty() && (payload[0] == '[' || payload[0] == '{'))
            return nlohmann::json::parse(payload);
        std::ifstream in(payload);
        if (!in) throw PreconditionError("map: cannot read file '" + payload + "'");
        nlohmann::json j;
        in >> j;
        return j;
    };
    auto matrix_from = [&](const nlohmann::json& j) {
        const auto& rows = j.is_object() ? j.at("matrix") : j;
        Eigen::MatrixXd m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t k = 0; k < rows[i].size(); ++k)
                m(static_cast<int>(i), static_cast<int>(k)) = rows[i][k].get<double>();
        return m;
    };

    std::string body = spec;
    bool transport = false;
    if (auto pos = body.rfind("|transport"); pos != std::string::npos && pos == body.size() - 10) {
        transport = true;
        body = body.substr(0, pos);
    }
    MapSpec out = [&]() -> MapSpec {
        if (body.rfind("coord:", 0) == 0) return coordinate(ambient_dim, std::stoi(body.substr(6)));
        if (body.rfind("axis:", 0) == 0) {
            int k = std::stoi(body.substr(5));
            if (k < 1 || k > ambient_dim) throw PreconditionError("axis: index out of range");
            Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, ambient_dim);
            row(0, k - 1) = 1.0;
            return linear(row);
        }
        if (body.rfind("linear:", 0) == 0) return linear(matrix_from(json_or_file(body.substr(7))));
        if (body == "radial") return radial(ambient_dim);
        if (body.rfind("radial:", 0) == 0) {
            std::stringstream ss(body.substr(7));
            std::vector<double> c;
            std::string tok;
            while (std::getline(ss, tok, ',')) c.push_back(std::stod(tok));
            if (static_cast<int>(c.size()) != ambient_dim)
                throw PreconditionError("radial: center dim mismatch");
            Eigen::VectorXd cv(ambient_dim);
            for (int i = 0; i < ambient_dim; ++i) cv[i] = c[i];
            return radial(ambient_dim, cv);
        }
        if (body.rfind("quad:axis:", 0) == 0) {
            int k = std::stoi(body.substr(10));
            if (k < 1 || k > ambient_dim) throw PreconditionError("quad:axis: bad index");
            Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ambient_dim, ambient_dim);
            q(k - 1, k - 1) = 1.0;
            return quadratic(q);
        }
        if (body.rfind("quad:", 0) == 0) return quadratic(matrix_from(json_or_file(body.substr(5))));
        if (body.rfind("poly:", 0) == 0) {
            nlohmann::json j = json_or_file(body.substr(5));
            std::vector<std::vector<PolyTerm>> comps;
            for (const auto& comp : j.at("components")) {
                std::vector<PolyTerm> terms;
                for (const auto& t : comp.at("terms")) {
                    PolyTerm pt;
                    pt.coef = t.at("coef").get<double>();
                    for (const auto& e : t.at("exponents")) pt.exponents.push_back(e.get<int>());
                    if (static_cast<int>(pt.exponents.size()) != ambient_dim)
                        throw PreconditionError("poly: exponent arity mismatch");
                    terms.push_back(std::move(pt));
                }
                comps.push_back(std::move(terms));
            }
            return polynomial(ambient_dim, std::move(comps));
        }
        if (body.rfind("const:", 0) == 0) {
            std::stringstream ss(body.substr(6));
            std::vector<double> v;
            std::string tok;
            while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
            Eigen::VectorXd val(static_cast<int>(v.size()));
            for (std::size_t i = 0; i < v.size(); ++i) val[static_cast<int>(i)] = v[i];
            return constant(ambient_dim, val);
        }
        throw PreconditionError("unknown map id: " + spec);
    }();
    return transport ? out.transported() : out;
}

}  // namespace waistlab
