#include "psbfem/geometry.hpp"

#include <doctest.h>

#include "helpers.hpp"

#include <random>

using namespace psbfem;
using namespace test_helpers;

namespace {

bool report_contains(const ValidationReport& report, const std::string& text) {
    return report.str().find(text) != std::string::npos;
}

// Independent divergence-theorem volume: V = (1/3) sum over face
// triangles of (triangle centroid) . (triangle area normal). Fanned
// from each face's first vertex, never from the scaling center.
double divergence_volume(const PolyhedronCell& cell, const Mesh& mesh) {
    double volume = 0.0;
    for (const auto& face : cell.faces) {
        const auto& ids = face.node_ids;
        const Vec3& a = mesh.nodes[ids[0]];
        for (size_t i = 1; i + 1 < ids.size(); ++i) {
            const Vec3& b = mesh.nodes[ids[i]];
            const Vec3& c = mesh.nodes[ids[i + 1]];
            const Vec3 n = 0.5 * (b - a).cross(c - a);
            volume += (a + b + c).dot(n) / 9.0;
        }
    }
    return volume;
}

}  // namespace

TEST_CASE("distinct_nodes follows first appearance across faces") {
    const Mesh mesh = unit_cube_cell();
    const auto nodes = mesh.cells[0].distinct_nodes();
    CHECK(nodes == std::vector<int>{0, 2, 3, 1, 4, 5, 7, 6});
}

TEST_CASE("validate_mesh accepts a unit cube") {
    CHECK(validate_mesh(unit_cube_cell()).ok());
    CHECK(validate_mesh(clipped_cube()).ok());
    CHECK(validate_mesh(octahedron()).ok());
    CHECK(validate_mesh(regular_prism(5, 1.0, 2.0)).ok());
}

TEST_CASE("validate_mesh flags a reversed face as a negative Jacobian") {
    Mesh mesh = unit_cube_cell();
    auto& ids = mesh.cells[0].faces[3].node_ids;
    std::reverse(ids.begin(), ids.end());
    const auto report = validate_mesh(mesh);
    CHECK_FALSE(report.ok());
    CHECK(report_contains(report, "negative Jacobian on face 3"));
}

TEST_CASE("validate_mesh counts unmatched boundary edges of an open cell") {
    Mesh mesh = unit_cube_cell();
    mesh.cells[0].faces.pop_back();
    const auto report = validate_mesh(mesh);
    CHECK(report_contains(report, "open surface: 4 boundary edges unmatched"));
}

TEST_CASE("validate_mesh flags index and topology defects") {
    SUBCASE("node index out of range") {
        Mesh mesh = unit_cube_cell();
        mesh.cells[0].faces[0].node_ids[0] = 42;
        CHECK(report_contains(validate_mesh(mesh), "out of range"));
    }
    SUBCASE("repeated node in a face") {
        Mesh mesh = unit_cube_cell();
        mesh.cells[0].faces[0].node_ids = {0, 2, 2, 1};
        CHECK(report_contains(validate_mesh(mesh), "repeated node"));
    }
    SUBCASE("face with fewer than 3 nodes") {
        Mesh mesh = unit_cube_cell();
        mesh.cells[0].faces[0].node_ids = {0, 2};
        CHECK(report_contains(validate_mesh(mesh), "fewer than 3 nodes"));
    }
    SUBCASE("cell without faces") {
        Mesh mesh = unit_cube_cell();
        mesh.cells[0].faces.clear();
        CHECK(report_contains(validate_mesh(mesh), "no faces"));
    }
    SUBCASE("non-finite node coordinates") {
        Mesh mesh = unit_cube_cell();
        mesh.nodes[0].x() = std::numeric_limits<double>::quiet_NaN();
        CHECK(report_contains(validate_mesh(mesh), "non-finite"));
    }
}

TEST_CASE("validate_mesh enforces planarity within 1e-8 of the diameter") {
    Mesh mesh = unit_cube_cell();
    mesh.nodes[7] += Vec3(0.0, 0.0, 1e-6);
    CHECK(report_contains(validate_mesh(mesh), "non-planar face"));

    Mesh fine = unit_cube_cell();
    fine.nodes[7] += Vec3(0.0, 0.0, 1e-10);  // below tolerance
    CHECK(validate_mesh(fine).ok());
}

TEST_CASE("validate_mesh rejects non-convex face polygons") {
    // prism over a simple polygon with one reflex vertex
    std::vector<Vec3> nodes = {{0, 0, 0},     {2, 0, 0}, {0.5, 0.5, 0},
                               {0, 2, 0},     {0, 0, 1}, {2, 0, 1},
                               {0.5, 0.5, 1}, {0, 2, 1}};
    const Mesh mesh = [&] {
        Mesh m;
        m.nodes = nodes;
        PolyhedronCell cell;
        std::vector<std::vector<int>> faces = {{3, 2, 1, 0}, {4, 5, 6, 7},
                                               {0, 1, 5, 4}, {1, 2, 6, 5},
                                               {2, 3, 7, 6}, {3, 0, 4, 7}};
        for (auto& ids : faces) {
            PolygonFace f;
            f.node_ids = ids;
            cell.faces.push_back(f);
        }
        m.cells.push_back(cell);
        return m;
    }();
    CHECK(report_contains(validate_mesh(mesh), "non-convex face polygon"));
}

TEST_CASE("scaling_center is the distinct-vertex centroid") {
    const Mesh cube = unit_cube_cell();
    CHECK((scaling_center(cube.cells[0], cube) - Vec3(0.5, 0.5, 0.5)).norm() ==
          doctest::Approx(0.0).epsilon(1e-14));

    const Mesh tet = single_cell(
        {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
        {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}});
    CHECK((scaling_center(tet.cells[0], tet) - Vec3(0.25, 0.25, 0.25)).norm() <
          1e-14);
}

TEST_CASE("scaling_center is translation and rotation equivariant") {
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        Mesh mesh = random_cell(rng);
        const Vec3 c0 = scaling_center(mesh.cells[0], mesh);

        Mesh moved = mesh;
        const Vec3 t(1.25, -3.0, 0.5);
        translate(moved, t);
        CHECK((scaling_center(moved.cells[0], moved) - (c0 + t)).norm() < 1e-12);

        Mesh rotated = mesh;
        const Eigen::Matrix3d R = random_rotation(rng);
        transform(rotated, R);
        CHECK((scaling_center(rotated.cells[0], rotated) - R * c0).norm() <
              1e-12);
    }
}

TEST_CASE("scaling_center rejects degenerate cells") {
    // all nodes coplanar
    const Mesh flat = [] {
        Mesh m;
        m.nodes = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
        PolyhedronCell cell;
        PolygonFace f;
        f.node_ids = {0, 1, 2, 3};
        cell.faces.push_back(f);
        f.node_ids = {3, 2, 1, 0};
        cell.faces.push_back(f);
        m.cells.push_back(cell);
        return m;
    }();
    CHECK_THROWS_WITH_AS(scaling_center(flat.cells[0], flat), "degenerate cell",
                         NumericalError);
}

TEST_CASE("cell_volume of reference shapes") {
    const Mesh cube = unit_cube_cell();
    CHECK(cell_volume(cube.cells[0], cube) == doctest::Approx(1.0).epsilon(1e-14));

    const Mesh beam = box_cell(Vec3::Zero(), Vec3(1.5, 1.5, 6.0));
    CHECK(cell_volume(beam.cells[0], beam) ==
          doctest::Approx(13.5).epsilon(1e-14));

    const Mesh clip = clipped_cube();
    CHECK(cell_volume(clip.cells[0], clip) ==
          doctest::Approx(1.0 - 1.0 / 48.0).epsilon(1e-14));
}

TEST_CASE("cell_volume matches the divergence-theorem oracle to 1e-10") {
    std::mt19937 rng(11);
    for (int i = 0; i < 50; ++i) {
        const Mesh mesh = random_cell(rng);
        const double v = cell_volume(mesh.cells[0], mesh);
        const double oracle = divergence_volume(mesh.cells[0], mesh);
        CHECK(v > 0.0);
        CHECK(std::abs(v - oracle) / oracle < 1e-10);
    }
}

TEST_CASE("cell_volume throws for an inverted cell") {
    Mesh mesh = unit_cube_cell();
    for (auto& face : mesh.cells[0].faces)
        std::reverse(face.node_ids.begin(), face.node_ids.end());
    CHECK_THROWS_WITH_AS(cell_volume(mesh.cells[0], mesh), "inverted cell",
                         NumericalError);
}

TEST_CASE("face_diameter of a unit cube face") {
    const Mesh mesh = unit_cube_cell();
    CHECK(face_diameter(mesh.cells[0].faces[0], mesh) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}
