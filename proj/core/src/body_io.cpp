#include "waistlab/body_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace waistlab {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json vec_to_json(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ordered_json mat_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json r = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

Eigen::VectorXd vec_from_json(const ordered_json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
    return v;
}

Eigen::MatrixXd mat_from_json(const ordered_json& rows) {
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j].get<double>();
    return m;
}

ordered_json body_to_json(const ConvexBody& b) {
    ordered_json j;
    ordered_json params;
    switch (b.kind()) {
        case BodyKind::Ball:
            j["kind"] = "ball";
            params["radius"] = b.ball_radius();
            break;
        case BodyKind::Box:
            j["kind"] = "box";
            params["half_widths"] = vec_to_json(b.half_widths());
            break;
        case BodyKind::HPolytope:
            j["kind"] = "h_polytope";
            params["normals"] = mat_to_json(b.normals());
            params["offsets"] = vec_to_json(b.offsets());
            break;
        case BodyKind::Ellipsoid:
            j["kind"] = "ellipsoid";
            params["shape"] = mat_to_json(b.ellipsoid_shape());
            params["center"] = vec_to_json(b.ellipsoid_center());
            break;
        case BodyKind::Intersection: {
            j["kind"] = "intersection";
            ordered_json parts = ordered_json::array();
            for (const auto& p : b.parts()) parts.push_back(body_to_json(p));
            params["parts"] = parts;
            break;
        }
        case BodyKind::LinearImage:
            j["kind"] = "linear_image";
            params["matrix"] = mat_to_json(b.map_matrix());
            params["base"] = body_to_json(b.base());
            break;
        case BodyKind::Translate:
            j["kind"] = "translate";
            params["shift"] = vec_to_json(b.shift());
            params["base"] = body_to_json(b.base());
            break;
        case BodyKind::RadialTable:
            j["kind"] = "radial_table";
            params["directions"] = mat_to_json(b.table_directions());
            params["radii"] = vec_to_json(b.table_radii());
            params["symmetric"] = b.centrally_symmetric();
            params["bounding_radius"] = b.bounding_radius();
            break;
    }
    j["dim"] = b.dim();
    j["params"] = params;
    if (!b.name().empty()) j["name"] = b.name();
    return j;
}

ConvexBody body_from_json(const ordered_json& j) {
    if (!j.contains("kind")) throw PreconditionError("body file: missing 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const auto& params = j.at("params");
    ConvexBody out = [&]() -> ConvexBody {
        if (kind == "ball")
            return ConvexBody::ball(j.at("dim").get<int>(), params.at("radius").get<double>());
        if (kind == "box") return ConvexBody::box(vec_from_json(params.at("half_widths")));
        if (kind == "h_polytope")
            return ConvexBody::h_polytope(mat_from_json(params.at("normals")),
                                          vec_from_json(params.at("offsets")));
        if (kind == "ellipsoid")
            return ConvexBody::ellipsoid(mat_from_json(params.at("shape")),
                                         vec_from_json(params.at("center")));
        if (kind == "intersection") {
            std::vector<ConvexBody> parts;
            for (const auto& p : params.at("parts")) parts.push_back(body_from_json(p));
            return ConvexBody::intersection(std::move(parts));
        }
        if (kind == "linear_image")
            return ConvexBody::linear_image(body_from_json(params.at("base")),
                                            mat_from_json(params.at("matrix")));
        if (kind == "translate")
            return ConvexBody::translate(body_from_json(params.at("base")),
                                         vec_from_json(params.at("shift")));
        if (kind == "radial_table") {
            std::optional<double> br;
            if (params.contains("bounding_radius")) br = params.at("bounding_radius").get<double>();
            return ConvexBody::radial_table(mat_from_json(params.at("directions")),
                                            vec_from_json(params.at("radii")),
                                            params.value("symmetric", true), br);
        }
        throw PreconditionError("body file: unknown kind '" + kind + "'");
    }();
    if (j.contains("name")) out = out.named(j.at("name").get<std::string>());
    return out;
}

}  // namespace

ConvexBody parse_body(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw PreconditionError(std::string("body file: malformed JSON: ") + e.what());
    }
    return body_from_json(j);
}

std::string serialize_body(const ConvexBody& body) { return body_to_json(body).dump(2) + "\n"; }

ConvexBody resolve_body(const std::string& spec) {
    auto starts = [&](const char* p) { return spec.rfind(p, 0) == 0; };
    auto parse_args = [&](std::size_t open) {
        std::vector<double> vals;
        std::size_t close = spec.find(')', open);
        std::string inner = spec.substr(open + 1, close == std::string::npos
                                                      ? std::string::npos
                                                      : close - open - 1);
        std::stringstream ss(inner);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        return vals;
    };
    auto digits_after = [&](std::size_t k, std::size_t end) {
        return std::stoi(spec.substr(k, end - k));
    };
    try {
        if (starts("cube")) return unit_cube(digits_after(4, spec.size()));
        if (starts("simplex")) return standard_simplex(digits_after(7, spec.size()));
        if (starts("ball")) {
            std::size_t open = spec.find('(');
            int n = digits_after(4, open == std::string::npos ? spec.size() : open);
            double r = 1.0;
            if (open != std::string::npos) r = parse_args(open).at(0);
            return ConvexBody::ball(n, r).named(spec);
        }
        if (starts("box")) {
            std::size_t open = spec.find('(');
            if (open == std::string::npos)
                throw PreconditionError("boxN requires extents, e.g. box2(1,2)");
            int n = digits_after(3, open);
            auto vals = parse_args(open);
            if (static_cast<int>(vals.size()) != n)
                throw PreconditionError("boxN: expected N extents");
            Eigen::VectorXd e(n);
            for (int i = 0; i < n; ++i) e[i] = vals[i];
            return corner_box(e).named(spec);
        }
    } catch (const PreconditionError&) {
        throw;
    } catch (const std::exception&) {
        // fall through to file lookup
    }
    std::ifstream in(spec);
    if (!in) throw PreconditionError("unknown body kind or unreadable body file: " + spec);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_body(buf.str());
}

}  // namespace waistlab
