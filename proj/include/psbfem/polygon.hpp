#pragma once

#include <Eigen/Dense>

#include <vector>

namespace psbfem {

using Vec2 = Eigen::Vector2d;

/// Regular n-gon inscribed in the unit circle, first vertex at angle
/// pi/2, counterclockwise. All faces of a cell are mapped onto this
/// polygon before integration.
struct ReferencePolygon {
    int n = 0;
    std::vector<Vec2> vertices;

    double area() const;
};

/// Throws InputError for n < 3.
ReferencePolygon reference_polygon(int n);

struct QuadratureRule {
    std::vector<Vec2> points;
    std::vector<double> weights;  // sum to the reference polygon area
    int degree = 0;
};

/// Shape function values and (optionally) gradients at one point.
struct BasisEval {
    Eigen::VectorXd N;
    Eigen::VectorXd dN_deta;
    Eigen::VectorXd dN_dzeta;
};

/// Wachspress basis values at a point strictly inside the polygon.
/// Throws NumericalError if the point is on or outside the boundary.
BasisEval wachspress(const ReferencePolygon& poly, const Vec2& p);

/// Values plus analytic gradients.
BasisEval wachspress_grad(const ReferencePolygon& poly, const Vec2& p);

/// Fan quadrature: the n-gon is split into n triangles at the origin
/// and a symmetric triangle rule of the requested degree (2, 4 or 6)
/// is mapped into each. Rules are memoized per (n, degree).
const QuadratureRule& polygon_quadrature(int n, int degree);

/// Symmetric rule on the unit triangle (0,0)-(1,0)-(0,1); weights sum
/// to 1/2. Degrees 2, 4 and 6 are available; others throw InputError.
QuadratureRule triangle_rule(int degree);

}  // namespace psbfem
