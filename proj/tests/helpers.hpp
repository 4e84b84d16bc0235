#pragma once

// Shared mesh/cell generators for the test and acceptance suites.

#include "psbfem/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace test_helpers {

using psbfem::Mesh;
using psbfem::PolygonFace;
using psbfem::PolyhedronCell;
using psbfem::Vec3;

inline Mesh single_cell(std::vector<Vec3> nodes,
                        std::vector<std::vector<int>> faces) {
    Mesh mesh;
    mesh.nodes = std::move(nodes);
    PolyhedronCell cell;
    for (auto& ids : faces) {
        PolygonFace f;
        f.node_ids = std::move(ids);
        cell.faces.push_back(std::move(f));
    }
    mesh.cells.push_back(std::move(cell));
    psbfem::compute_scaling_centers(mesh);
    return mesh;
}

// Axis-aligned box cell; corner order ix + 2*iy + 4*iz, outward CCW faces.
inline Mesh box_cell(const Vec3& lo, const Vec3& hi) {
    std::vector<Vec3> nodes;
    for (int iz = 0; iz < 2; ++iz)
        for (int iy = 0; iy < 2; ++iy)
            for (int ix = 0; ix < 2; ++ix)
                nodes.emplace_back(ix ? hi.x() : lo.x(), iy ? hi.y() : lo.y(),
                                   iz ? hi.z() : lo.z());
    return single_cell(std::move(nodes), {{0, 2, 3, 1},
                                          {4, 5, 7, 6},
                                          {0, 1, 5, 4},
                                          {2, 6, 7, 3},
                                          {0, 4, 6, 2},
                                          {1, 3, 7, 5}});
}

inline Mesh unit_cube_cell() { return box_cell(Vec3::Zero(), Vec3::Ones()); }

// Parallelepiped spanned by three edge vectors from an origin; valid
// when (e1 x e2) . e3 > 0.
inline Mesh parallelepiped(const Vec3& origin, const Vec3& e1, const Vec3& e2,
                           const Vec3& e3) {
    std::vector<Vec3> nodes;
    for (int iz = 0; iz < 2; ++iz)
        for (int iy = 0; iy < 2; ++iy)
            for (int ix = 0; ix < 2; ++ix)
                nodes.push_back(origin + ix * e1 + iy * e2 + iz * e3);
    return single_cell(std::move(nodes), {{0, 2, 3, 1},
                                          {4, 5, 7, 6},
                                          {0, 1, 5, 4},
                                          {2, 6, 7, 3},
                                          {0, 4, 6, 2},
                                          {1, 3, 7, 5}});
}

// Right prism over a regular n-gon of circumradius r and height h,
// bottom at z = 0. Bottom vertices 0..n-1 (CCW seen from +z), top
// vertices n..2n-1.
inline Mesh regular_prism(int n, double r, double h) {
    std::vector<Vec3> nodes;
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        nodes.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
    for (int k = 0; k < n; ++k)
        nodes.emplace_back(nodes[k].x(), nodes[k].y(), h);

    std::vector<std::vector<int>> faces;
    std::vector<int> bottom, top;
    for (int k = n - 1; k >= 0; --k) bottom.push_back(k);  // outward = -z
    for (int k = 0; k < n; ++k) top.push_back(n + k);
    faces.push_back(bottom);
    faces.push_back(top);
    for (int k = 0; k < n; ++k) {
        const int k1 = (k + 1) % n;
        faces.push_back({k, k1, n + k1, n + k});
    }
    return single_cell(std::move(nodes), std::move(faces));
}

// Unit cube with the (1,1,1) corner cut off through the three adjacent
// edge midpoints: three pentagon faces, one triangle, three quads.
inline Mesh clipped_cube() {
    std::vector<Vec3> nodes;
    for (int iz = 0; iz < 2; ++iz)
        for (int iy = 0; iy < 2; ++iy)
            for (int ix = 0; ix < 2; ++ix) nodes.emplace_back(ix, iy, iz);
    nodes.emplace_back(1.0, 1.0, 0.5);  // 8
    nodes.emplace_back(1.0, 0.5, 1.0);  // 9
    nodes.emplace_back(0.5, 1.0, 1.0);  // 10
    return single_cell(std::move(nodes), {{0, 2, 3, 1},
                                          {4, 5, 9, 10, 6},
                                          {0, 1, 5, 4},
                                          {2, 6, 10, 8, 3},
                                          {0, 4, 6, 2},
                                          {1, 3, 8, 9, 5},
                                          {8, 10, 9}});
}

// Regular octahedron of circumradius r, all-triangle faces.
inline Mesh octahedron(double r = 1.0) {
    std::vector<Vec3> nodes = {{r, 0, 0},  {-r, 0, 0}, {0, r, 0},
                               {0, -r, 0}, {0, 0, r},  {0, 0, -r}};
    return single_cell(std::move(nodes), {{0, 2, 4},
                                          {2, 1, 4},
                                          {1, 3, 4},
                                          {3, 0, 4},
                                          {2, 0, 5},
                                          {1, 2, 5},
                                          {3, 1, 5},
                                          {0, 3, 5}});
}

inline void translate(Mesh& mesh, const Vec3& t) {
    for (auto& n : mesh.nodes) n += t;
    psbfem::compute_scaling_centers(mesh);
}

inline void transform(Mesh& mesh, const Eigen::Matrix3d& A) {
    for (auto& n : mesh.nodes) n = A * n;
    psbfem::compute_scaling_centers(mesh);
}

inline void scale(Mesh& mesh, double s) {
    transform(mesh, Eigen::Matrix3d(s * Eigen::Matrix3d::Identity()));
}

inline Eigen::Matrix3d random_rotation(std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    return q.toRotationMatrix();
}

// A randomized valid cell: boxes, parallelepipeds, prisms (n = 3..8),
// clipped cubes and octahedra, each under a random rotation, scale and
// translation.
inline Mesh random_cell(std::mt19937& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int kind = static_cast<int>(uni(rng) * 5.0) % 5;
    Mesh mesh;
    switch (kind) {
        case 0: {
            const Vec3 lo(uni(rng), uni(rng), uni(rng));
            const Vec3 ext(0.3 + uni(rng), 0.3 + uni(rng), 0.3 + uni(rng));
            mesh = box_cell(lo, lo + ext);
            break;
        }
        case 1: {
            // keep the edge vectors well away from degeneracy
            const Vec3 e1(1.0, 0.4 * uni(rng), 0.4 * uni(rng));
            const Vec3 e2(0.4 * uni(rng), 1.0, 0.4 * uni(rng));
            const Vec3 e3(0.4 * uni(rng), 0.4 * uni(rng), 1.0);
            mesh = parallelepiped(Vec3::Zero(), e1, e2, e3);
            break;
        }
        case 2: {
            const int n = 3 + static_cast<int>(uni(rng) * 6.0) % 6;
            mesh = regular_prism(n, 0.5 + uni(rng), 0.5 + uni(rng));
            break;
        }
        case 3:
            mesh = clipped_cube();
            break;
        default:
            mesh = octahedron(0.5 + uni(rng));
            break;
    }
    transform(mesh, random_rotation(rng));
    scale(mesh, 0.5 + uni(rng));
    translate(mesh, Vec3(uni(rng), uni(rng), uni(rng)) * 2.0);
    return mesh;
}

}  // namespace test_helpers
