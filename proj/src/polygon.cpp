#include "psbfem/polygon.hpp"

#include "psbfem/geometry.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace psbfem {

double ReferencePolygon::area() const {
    // regular n-gon inscribed in the unit circle
    return 0.5 * n * std::sin(2.0 * std::numbers::pi / n);
}

ReferencePolygon reference_polygon(int n) {
    if (n < 3) throw InputError("reference polygon needs n >= 3");
    ReferencePolygon poly;
    poly.n = n;
    poly.vertices.reserve(n);
    const double offset = std::numbers::pi / 2.0;
    for (int k = 0; k < n; ++k) {
        const double a = offset + 2.0 * std::numbers::pi * k / n;
        poly.vertices.emplace_back(std::cos(a), std::sin(a));
    }
    return poly;
}

namespace {

constexpr double kEdgeEps = 1e-14;

struct EdgeData {
    std::vector<Vec2> normals;    // unit outward normal per edge i: v_i -> v_i+1
    std::vector<double> offsets;  // n_i . v_i, so h_i(p) = offset_i - n_i . p
};

EdgeData edge_data(const ReferencePolygon& poly) {
    EdgeData d;
    d.normals.reserve(poly.n);
    d.offsets.reserve(poly.n);
    for (int i = 0; i < poly.n; ++i) {
        const Vec2& a = poly.vertices[i];
        const Vec2& b = poly.vertices[(i + 1) % poly.n];
        Vec2 t = b - a;
        Vec2 n(t.y(), -t.x());  // outward for a CCW polygon
        n.normalize();
        d.normals.push_back(n);
        d.offsets.push_back(n.dot(a));
    }
    return d;
}

double cross2(const Vec2& a, const Vec2& b) {
    return a.x() * b.y() - a.y() * b.x();
}

BasisEval wachspress_impl(const ReferencePolygon& poly, const Vec2& p,
                          bool gradients) {
    const int n = poly.n;
    const auto edges = edge_data(poly);

    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) {
        h(i) = edges.offsets[i] - edges.normals[i].dot(p);
        if (h(i) <= kEdgeEps) throw NumericalError("point outside open polygon");
    }

    // w_k uses the two edges meeting at vertex k: edge k-1 and edge k.
    Eigen::VectorXd w(n);
    std::vector<Vec2> R(n);
    for (int k = 0; k < n; ++k) {
        const int km = (k + n - 1) % n;
        w(k) = cross2(edges.normals[km], edges.normals[k]) / (h(km) * h(k));
        if (gradients)
            R[k] = edges.normals[km] / h(km) + edges.normals[k] / h(k);
    }

    BasisEval eval;
    const double wsum = w.sum();
    eval.N = w / wsum;

    if (gradients) {
        Vec2 Rbar = Vec2::Zero();
        for (int k = 0; k < n; ++k) Rbar += eval.N(k) * R[k];
        eval.dN_deta.resize(n);
        eval.dN_dzeta.resize(n);
        for (int k = 0; k < n; ++k) {
            const Vec2 g = eval.N(k) * (R[k] - Rbar);
            eval.dN_deta(k) = g.x();
            eval.dN_dzeta(k) = g.y();
        }
    }
    return eval;
}

}  // namespace

BasisEval wachspress(const ReferencePolygon& poly, const Vec2& p) {
    return wachspress_impl(poly, p, false);
}

BasisEval wachspress_grad(const ReferencePolygon& poly, const Vec2& p) {
    return wachspress_impl(poly, p, true);
}

QuadratureRule triangle_rule(int degree) {
    // Symmetric rules on the unit triangle; barycentric orbits with
    // normalized weights, scaled to the triangle area 1/2.
    QuadratureRule rule;
    rule.degree = degree;
    auto orbit3 = [&rule](double a, double w) {
        // permutations of (a, b, b), b = (1 - a) / 2
        const double b = 0.5 * (1.0 - a);
        rule.points.emplace_back(a, b);
        rule.points.emplace_back(b, a);
        rule.points.emplace_back(b, b);
        for (int i = 0; i < 3; ++i) rule.weights.push_back(0.5 * w);
    };
    auto orbit6 = [&rule](double a, double b, double w) {
        const double c = 1.0 - a - b;
        const double xs[6] = {a, a, b, b, c, c};
        const double ys[6] = {b, c, a, c, a, b};
        for (int i = 0; i < 6; ++i) {
            rule.points.emplace_back(xs[i], ys[i]);
            rule.weights.push_back(0.5 * w);
        }
    };

    switch (degree) {
        case 2:
            orbit3(2.0 / 3.0, 1.0 / 3.0);
            break;
        case 4:
            orbit3(0.108103018168070, 0.223381589678011);
            orbit3(0.816847572980459, 0.109951743655322);
            break;
        case 6:
            orbit3(0.501426509658179, 0.116786275726379);
            orbit3(0.873821971016996, 0.050844906370207);
            orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374);
            break;
        default:
            throw InputError("unsupported quadrature degree " +
                             std::to_string(degree) + " (use 2, 4 or 6)");
    }
    return rule;
}

namespace {

QuadratureRule build_polygon_rule(int n, int degree) {
    const auto poly = reference_polygon(n);
    const auto tri = triangle_rule(degree);
    QuadratureRule rule;
    rule.degree = degree;
    // fan triangles (origin, v_i, v_i+1)
    for (int i = 0; i < n; ++i) {
        const Vec2& a = poly.vertices[i];
        const Vec2& b = poly.vertices[(i + 1) % n];
        const double jac = cross2(a, b);  // determinant of (u,v) -> u*a + v*b
        for (size_t q = 0; q < tri.points.size(); ++q) {
            const double u = tri.points[q].x();
            const double v = tri.points[q].y();
            rule.points.push_back(u * a + v * b);
            rule.weights.push_back(tri.weights[q] * jac);
        }
    }
    return rule;
}

}  // namespace

const QuadratureRule& polygon_quadrature(int n, int degree) {
    if (degree != 2 && degree != 4 && degree != 6)
        throw InputError("unsupported quadrature degree " +
                         std::to_string(degree) + " (use 2, 4 or 6)");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto [it, inserted] = cache.try_emplace({n, degree});
    if (inserted) it->second = build_polygon_rule(n, degree);
    return it->second;
}

}  // namespace psbfem
