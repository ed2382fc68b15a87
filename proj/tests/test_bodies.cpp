#include <doctest.h>

#include <waistlab/body.hpp>
#include <waistlab/body_io.hpp>
#include <waistlab/ellipsoid.hpp>
#include <waistlab/rng.hpp>

#include "oracles.hpp"

using namespace waistlab;

namespace {
Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}
ConvexBody square2() {
    Eigen::MatrixXd a(4, 2);
    a << 1, 0, -1, 0, 0, 1, 0, -1;
    Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    return ConvexBody::h_polytope(a, b);
}
}  // namespace

TEST_CASE("membership per kind") {
    auto box = ConvexBody::box(v2(1, 1));
    CHECK(box.contains(v2(0.5, -0.9)));
    auto ball = ConvexBody::ball(2, 1.0);
    CHECK_FALSE(ball.contains(v2(0, 3)));
    auto inter = ConvexBody::intersection({box, ball});
    CHECK_FALSE(inter.contains(v2(0.9, 0.9)));
    CHECK(inter.contains(v2(0.5, 0.5)));
    CHECK_THROWS_AS((void)box.contains(Eigen::VectorXd::Ones(3)), PreconditionError);
}

TEST_CASE("gauge closed forms and boundary") {
    auto box = ConvexBody::box(v2(1, 1));
    CHECK(box.gauge(v2(2, 1)) == doctest::Approx(2.0));
    auto ball = ConvexBody::ball(2, 1.0);
    CHECK(ball.gauge(v2(0, 3)) == doctest::Approx(3.0));
    CHECK(square2().gauge(v2(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("gauge errors when origin is not interior") {
    auto shifted = ConvexBody::translate(ConvexBody::ball(2, 1.0), v2(5, 0));
    CHECK_THROWS_AS((void)shifted.gauge(v2(1, 0)), PreconditionError);
}

TEST_CASE("support per kind") {
    auto box = ConvexBody::box(v2(1, 2));
    CHECK(box.support(v2(0, 1)) == doctest::Approx(2.0));
    CHECK(ConvexBody::ball(2, 3.0).support(v2(1, 0)) == doctest::Approx(3.0));
    auto shifted = ConvexBody::translate(ConvexBody::ball(2, 1.0), v2(5, 0));
    CHECK(shifted.support(v2(1, 0)) == doctest::Approx(6.0));
}

TEST_CASE("gauge homogeneity and membership consistency") {
    Rng rng(7);
    std::vector<ConvexBody> bodies = {ConvexBody::box(v2(1.5, 0.4)), ConvexBody::ball(2, 2.0),
                                      square2(),
                                      ConvexBody::intersection({square2(), ConvexBody::ball(2, 1.2)})};
    for (const auto& body : bodies) {
        for (int k = 0; k < 200; ++k) {
            Eigen::VectorXd x = rng.normal_vec(2);
            double t = 0.1 + 3.0 * rng.uniform();
            CHECK(body.gauge(t * x) == doctest::Approx(t * body.gauge(x)).epsilon(1e-9));
            double g = body.gauge(x);
            if (g > 0) {
                CHECK(body.contains(x / g * (1.0 - 1e-8)));
                CHECK_FALSE(body.contains(x / g * (1.0 + 1e-6)));
            }
        }
    }
}

TEST_CASE("support subadditive under intersection") {
    Rng rng(11);
    auto a = ConvexBody::box(v2(1.5, 0.7));
    auto b = ConvexBody::ball(2, 1.1);
    auto inter = ConvexBody::intersection({a, b});
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd u = rng.unit_vec(2);
        CHECK(inter.support(u) <= std::min(a.support(u), b.support(u)) + 1e-9);
    }
}

TEST_CASE("john ellipsoid of the square is the unit disk") {
    auto res = john_ellipsoid(square2());
    CHECK(res.center.norm() < 1e-6);
    CHECK(res.semi_axis_lengths[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.semi_axis_lengths[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.containment_verified);
}

TEST_CASE("john ellipsoid of a rectangle has the box semi-axes") {
    auto rect = ConvexBody::box(v2(2, 1));
    auto res = john_ellipsoid(rect);
    CHECK(res.center.norm() < 1e-6);
    CHECK(res.semi_axis_lengths[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(res.semi_axis_lengths[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("john ellipsoid of the right triangle is its Steiner inellipse") {
    Eigen::MatrixXd a(3, 2);
    a << -1, 0, 0, -1, 1, 1;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    auto res = john_ellipsoid(ConvexBody::h_polytope(a, b));
    std::complex<double> centroid;
    auto [major, minor] = oracle::steiner_inellipse_axes({0, 0}, {1, 0}, {0, 1}, &centroid);
    CHECK(res.semi_axis_lengths[0] == doctest::Approx(major).epsilon(1e-6));
    CHECK(res.semi_axis_lengths[1] == doctest::Approx(minor).epsilon(1e-6));
    CHECK(res.center[0] == doctest::Approx(centroid.real()).epsilon(1e-5));
    CHECK(res.center[1] == doctest::Approx(centroid.imag()).epsilon(1e-5));
    // it strictly beats the best inscribed circle in volume
    double r = oracle::right_triangle_inradius();
    CHECK(major * minor > r * r);
    CHECK(res.containment_verified);
}

TEST_CASE("john ellipsoid is affine equivariant") {
    Rng rng(13);
    for (int trial = 0; trial < 4; ++trial) {
        // random bounded 2-D polytope around the origin
        int m = 5 + static_cast<int>(rng.uniform() * 4);
        Eigen::MatrixXd a(m + 4, 2);
        Eigen::VectorXd b(m + 4);
        for (int i = 0; i < m; ++i) {
            a.row(i) = rng.unit_vec(2).transpose();
            b[i] = 0.6 + rng.uniform();
        }
        a.block(m, 0, 4, 2) << 1, 0, -1, 0, 0, 1, 0, -1;
        b.segment(m, 4).setConstant(2.0);
        auto poly = ConvexBody::h_polytope(a, b);

        Eigen::Matrix2d t;
        t << 1.0 + rng.uniform(), 0.5 * rng.normal(), 0.5 * rng.normal(), 1.0 + rng.uniform();
        if (std::abs(t.determinant()) < 0.3) continue;
        Eigen::VectorXd shift = rng.normal_vec(2);

        auto mapped = ConvexBody::h_polytope(a * t.inverse(), b + (a * t.inverse()) * shift);
        auto r0 = john_ellipsoid(poly);
        auto r1 = john_ellipsoid(mapped);

        Eigen::MatrixXd expected_shape = t * r0.shape * t.transpose();
        Eigen::VectorXd expected_center = t * r0.center + shift;
        CHECK((r1.center - expected_center).norm() <= 1e-6 * (1.0 + expected_center.norm()));
        CHECK((r1.shape - expected_shape).norm() <= 1e-6 * (1.0 + expected_shape.norm()));
    }
}

TEST_CASE("pancake: thin box is a pancake with the x-axis witness") {
    auto thin = ConvexBody::box(v2(1, 0.05));
    auto res = pancake_check(thin, 1, 0.2);
    CHECK(res.state == PancakeState::Pancake);
    REQUIRE(res.witness.has_value());
    CHECK(std::abs(res.witness->basis(0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(res.witness->basis(1, 0)) < 1e-6);
}

TEST_CASE("pancake: the square is not a (1, 0.4)-pancake") {
    CHECK(oracle::square_line_fit_minmax() > 0.4);  // oracle backs the expectation
    auto res = pancake_check(ConvexBody::box(v2(1, 1)), 1, 0.4);
    CHECK(res.state == PancakeState::NotPancake);
}

TEST_CASE("pancake: ell = n is rejected") {
    CHECK_THROWS_AS(pancake_check(ConvexBody::box(v2(1, 1)), 2, 0.1), PreconditionError);
}

TEST_CASE("body description files round-trip") {
    auto body = ConvexBody::intersection(
        {ConvexBody::translate(ConvexBody::box(v2(1, 0.25)), v2(0.125, -3)),
         ConvexBody::ball(2, 7.0)});
    std::string text = serialize_body(body.named("demo"));
    auto re = parse_body(text);
    CHECK(serialize_body(re) == text);
    CHECK(re.dim() == 2);
    CHECK(re.name() == "demo");
}

TEST_CASE("builtin body specs resolve") {
    CHECK(resolve_body("cube3").dim() == 3);
    CHECK(resolve_body("ball2(1.5)").ball_radius() == doctest::Approx(1.5));
    CHECK(resolve_body("box2(1,2)").contains(v2(0.5, 1.5)));
    CHECK(resolve_body("simplex2").contains(v2(0.2, 0.2)));
    CHECK_THROWS_AS(resolve_body("dodecahedron"), PreconditionError);
}
