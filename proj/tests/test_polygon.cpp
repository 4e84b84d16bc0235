#include "psbfem/polygon.hpp"

#include "psbfem/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace psbfem;

namespace {

constexpr double kPi = std::numbers::pi;

// Random point strictly inside the regular n-gon, with a margin from
// the boundary (inradius of the reference polygon is cos(pi/n)).
Vec2 random_interior_point(int n, std::mt19937& rng, double margin = 0.9) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double r = margin * std::cos(kPi / n) * std::sqrt(uni(rng));
    const double a = 2.0 * kPi * uni(rng);
    return {r * std::cos(a), r * std::sin(a)};
}

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (b.y() - a.y()) * (c.x() - a.x()));
}

// Independent Wachspress evaluation via the triangle-area form:
// w_k = A(v_{k-1}, v_k, v_{k+1}) / (A(p, v_{k-1}, v_k) A(p, v_k, v_{k+1})).
Eigen::VectorXd wachspress_area_form(const ReferencePolygon& poly,
                                     const Vec2& p) {
    const int n = poly.n;
    Eigen::VectorXd w(n);
    for (int k = 0; k < n; ++k) {
        const Vec2& vm = poly.vertices[(k + n - 1) % n];
        const Vec2& v = poly.vertices[k];
        const Vec2& vp = poly.vertices[(k + 1) % n];
        w(k) = tri_area(vm, v, vp) / (tri_area(p, vm, v) * tri_area(p, v, vp));
    }
    return w / w.sum();
}

// Exact integral of x^a y^b over the unit triangle (0,0)-(1,0)-(0,1):
// a! b! / (a + b + 2)!.
double unit_triangle_monomial(int a, int b) {
    double num = 1.0;
    for (int i = 2; i <= a; ++i) num *= i;
    for (int i = 2; i <= b; ++i) num *= i;
    double den = 1.0;
    for (int i = 2; i <= a + b + 2; ++i) den *= i;
    return num / den;
}

// High-resolution reference: each fan triangle of the n-gon subdivided
// into m^2 congruent sub-triangles, each integrated with the degree-6
// rule.
double subdivided_integral(int n, int m, const std::function<double(Vec2)>& f) {
    const auto poly = reference_polygon(n);
    const auto tri = triangle_rule(6);
    double total = 0.0;
    for (int e = 0; e < n; ++e) {
        const Vec2 a = poly.vertices[e];
        const Vec2 b = poly.vertices[(e + 1) % n];
        auto at = [&](double u, double v) -> Vec2 { return u * a + v * b; };
        const double jac = a.x() * b.y() - a.y() * b.x();
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m - i; ++j) {
                // upright sub-triangle
                const double u0 = static_cast<double>(i) / m;
                const double v0 = static_cast<double>(j) / m;
                for (size_t q = 0; q < tri.points.size(); ++q) {
                    const Vec2 uv(u0 + tri.points[q].x() / m,
                                  v0 + tri.points[q].y() / m);
                    total += tri.weights[q] * jac / (m * m) * f(at(uv.x(), uv.y()));
                }
                // inverted sub-triangle
                if (j < m - i - 1) {
                    for (size_t q = 0; q < tri.points.size(); ++q) {
                        const Vec2 uv(u0 + (1.0 - tri.points[q].x()) / m,
                                      v0 + (1.0 - tri.points[q].y()) / m);
                        total +=
                            tri.weights[q] * jac / (m * m) * f(at(uv.x(), uv.y()));
                    }
                }
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("reference_polygon geometry") {
    const auto square = reference_polygon(4);
    CHECK(square.area() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(square.vertices[0].x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(square.vertices[0].y() == doctest::Approx(1.0).epsilon(1e-15));
    for (const auto& v : square.vertices)
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(reference_polygon(6).area() ==
          doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-14));
    CHECK(reference_polygon(3).area() ==
          doctest::Approx(0.75 * std::sqrt(3.0)).epsilon(1e-14));

    // CCW with centroid at the origin
    const auto hex = reference_polygon(6);
    Vec2 centroid = Vec2::Zero();
    for (const auto& v : hex.vertices) centroid += v;
    CHECK(centroid.norm() < 1e-14);

    CHECK_THROWS_AS(reference_polygon(2), InputError);
}

TEST_CASE("wachspress at the square center is 1/4 everywhere") {
    const auto eval = wachspress(reference_polygon(4), Vec2(0.0, 0.0));
    for (int i = 0; i < 4; ++i)
        CHECK(eval.N(i) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("wachspress approaches the Kronecker delta at vertices") {
    for (int n = 3; n <= 8; ++n) {
        const auto poly = reference_polygon(n);
        for (int k = 0; k < n; ++k) {
            const Vec2 p = (1.0 - 1e-7) * poly.vertices[k];
            const auto eval = wachspress(poly, p);
            for (int i = 0; i < n; ++i)
                CHECK(std::abs(eval.N(i) - (i == k ? 1.0 : 0.0)) < 1e-5);
        }
    }
}

TEST_CASE("wachspress rejects points on or outside the boundary") {
    const auto poly = reference_polygon(4);
    CHECK_THROWS_WITH_AS(wachspress(poly, Vec2(2.0, 0.0)),
                         "point outside open polygon", NumericalError);
    // edge midpoint of the inscribed square lies on the boundary
    const Vec2 mid = 0.5 * (poly.vertices[0] + poly.vertices[1]);
    CHECK_THROWS_AS(wachspress(poly, mid), NumericalError);
}

TEST_CASE("wachspress partition of unity, positivity and linear precision") {
    std::mt19937 rng(101);
    for (int n = 3; n <= 12; ++n) {
        const auto poly = reference_polygon(n);
        for (int trial = 0; trial < 100; ++trial) {
            const Vec2 p = random_interior_point(n, rng);
            const auto eval = wachspress(poly, p);
            CHECK(std::abs(eval.N.sum() - 1.0) < 1e-13);
            Vec2 recon = Vec2::Zero();
            for (int i = 0; i < n; ++i) {
                CHECK(eval.N(i) >= 0.0);
                recon += eval.N(i) * poly.vertices[i];
            }
            CHECK((recon - p).norm() < 1e-12);
        }
    }
}

TEST_CASE("wachspress matches the triangle-area form") {
    std::mt19937 rng(202);
    for (int n = 3; n <= 12; ++n) {
        const auto poly = reference_polygon(n);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec2 p = random_interior_point(n, rng);
            const auto eval = wachspress(poly, p);
            const auto oracle = wachspress_area_form(poly, p);
            CHECK((eval.N - oracle).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    // the spec'd spot check
    const auto hex = reference_polygon(6);
    const auto eval = wachspress(hex, Vec2(0.2, 0.1));
    CHECK(std::abs(eval.N.sum() - 1.0) < 1e-13);
    Vec2 recon = Vec2::Zero();
    for (int i = 0; i < 6; ++i) recon += eval.N(i) * hex.vertices[i];
    CHECK((recon - Vec2(0.2, 0.1)).norm() < 1e-12);
}

TEST_CASE("wachspress_grad identities") {
    std::mt19937 rng(303);
    for (int n = 3; n <= 12; ++n) {
        const auto poly = reference_polygon(n);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec2 p = random_interior_point(n, rng);
            const auto eval = wachspress_grad(poly, p);
            CHECK(std::abs(eval.dN_deta.sum()) < 1e-12);
            CHECK(std::abs(eval.dN_dzeta.sum()) < 1e-12);

            // d/dp of linear precision: sum grad(N_i) v_i = I
            Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
            for (int i = 0; i < n; ++i) {
                J.col(0) += eval.dN_deta(i) * poly.vertices[i];
                J.col(1) += eval.dN_dzeta(i) * poly.vertices[i];
            }
            CHECK((J - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
                  1e-10);
        }
    }
}

TEST_CASE("wachspress_grad matches central finite differences") {
    std::mt19937 rng(404);
    const double step = 1e-6;
    for (int n = 3; n <= 12; ++n) {
        const auto poly = reference_polygon(n);
        for (int trial = 0; trial < 100; ++trial) {
            const Vec2 p = random_interior_point(n, rng, 0.85);
            const auto eval = wachspress_grad(poly, p);
            const auto xp = wachspress(poly, p + Vec2(step, 0));
            const auto xm = wachspress(poly, p - Vec2(step, 0));
            const auto yp = wachspress(poly, p + Vec2(0, step));
            const auto ym = wachspress(poly, p - Vec2(0, step));
            for (int i = 0; i < n; ++i) {
                CHECK(std::abs(eval.dN_deta(i) -
                               (xp.N(i) - xm.N(i)) / (2 * step)) < 1e-6);
                CHECK(std::abs(eval.dN_dzeta(i) -
                               (yp.N(i) - ym.N(i)) / (2 * step)) < 1e-6);
            }
        }
    }
}

TEST_CASE("wachspress on the triangle reduces to barycentric coordinates") {
    std::mt19937 rng(505);
    const auto poly = reference_polygon(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec2 p = random_interior_point(3, rng);
        const auto eval = wachspress(poly, p);
        // barycentric via areas
        const double A = tri_area(poly.vertices[0], poly.vertices[1],
                                  poly.vertices[2]);
        const double l0 = tri_area(p, poly.vertices[1], poly.vertices[2]) / A;
        const double l1 = tri_area(poly.vertices[0], p, poly.vertices[2]) / A;
        const double l2 = tri_area(poly.vertices[0], poly.vertices[1], p) / A;
        CHECK(std::abs(eval.N(0) - l0) < 1e-13);
        CHECK(std::abs(eval.N(1) - l1) < 1e-13);
        CHECK(std::abs(eval.N(2) - l2) < 1e-13);
    }
}

TEST_CASE("triangle_rule properties and exactness") {
    CHECK(triangle_rule(2).points.size() == 3);
    CHECK(triangle_rule(4).points.size() == 6);
    CHECK(triangle_rule(6).points.size() == 12);
    CHECK_THROWS_AS(triangle_rule(3), InputError);
    CHECK_THROWS_AS(triangle_rule(8), InputError);

    for (int degree : {2, 4, 6}) {
        const auto rule = triangle_rule(degree);
        double wsum = 0.0;
        for (double w : rule.weights) {
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));

        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                double integral = 0.0;
                for (size_t q = 0; q < rule.points.size(); ++q)
                    integral += rule.weights[q] *
                                std::pow(rule.points[q].x(), a) *
                                std::pow(rule.points[q].y(), b);
                CHECK(integral == doctest::Approx(unit_triangle_monomial(a, b))
                                      .epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("polygon_quadrature reproduces areas and point counts") {
    const auto& square2 = polygon_quadrature(4, 2);
    CHECK(square2.points.size() == 12);
    double wsum = 0.0;
    for (double w : square2.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));

    const auto& hex4 = polygon_quadrature(6, 4);
    wsum = 0.0;
    for (double w : hex4.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(polygon_quadrature(4, 5), InputError);
}

TEST_CASE("polygon_quadrature integrates monomials to the reference value") {
    for (int n : {3, 4, 5, 6, 8}) {
        for (int degree : {2, 4, 6}) {
            const auto& rule = polygon_quadrature(n, degree);
            for (int a = 0; a <= degree; ++a) {
                for (int b = 0; a + b <= degree; ++b) {
                    double integral = 0.0;
                    for (size_t q = 0; q < rule.points.size(); ++q)
                        integral += rule.weights[q] *
                                    std::pow(rule.points[q].x(), a) *
                                    std::pow(rule.points[q].y(), b);
                    const double oracle =
                        subdivided_integral(n, 8, [&](Vec2 p) {
                            return std::pow(p.x(), a) * std::pow(p.y(), b);
                        });
                    CHECK(std::abs(integral - oracle) <=
                          1e-12 * std::max(1.0, std::abs(oracle)));
                }
            }
        }
    }
}

TEST_CASE("polygon_quadrature is memoized") {
    const auto& a = polygon_quadrature(7, 4);
    const auto& b = polygon_quadrature(7, 4);
    CHECK(&a == &b);
}
