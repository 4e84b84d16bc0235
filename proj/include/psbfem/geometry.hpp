#pragma once

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psbfem {

using Vec3 = Eigen::Vector3d;

/// Raised when input data (mesh, config, CLI arguments) is malformed.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a computation fails numerically (singular matrix,
/// defective spectrum, unconverged solve).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A polygonal face of a polyhedral cell. Node indices are ordered
/// counterclockwise when viewed from outside the owning cell.
struct PolygonFace {
    std::vector<int> node_ids;
};

/// A star-convex cell bounded by planar convex polygon faces.
/// The scaling center is filled in by compute_scaling_centers() (or by
/// the mesh loader) before any element computation.
struct PolyhedronCell {
    std::vector<PolygonFace> faces;
    Vec3 scaling_center = Vec3::Zero();

    /// Distinct node ids in order of first appearance across the faces.
    std::vector<int> distinct_nodes() const;
};

struct Mesh {
    std::vector<Vec3> nodes;
    std::vector<PolyhedronCell> cells;
    std::map<std::string, std::vector<int>> node_sets;
    // face references are (cell index, local face index) pairs
    std::map<std::string, std::vector<std::pair<int, int>>> face_sets;
};

/// Thermal material: conductivities in W/m/degC, density in kg/m^3,
/// heat capacity in J/kg/degC.
struct Material {
    double kx = 1.0;
    double ky = 1.0;
    double kz = 1.0;
    double rho = 1.0;
    double c = 1.0;

    bool isotropic() const { return kx == ky && ky == kz; }
    Eigen::Matrix3d conductivity() const {
        return Eigen::Vector3d(kx, ky, kz).asDiagonal();
    }
    double rho_c() const { return rho * c; }
};

struct ValidationIssue {
    int cell;  // -1 for mesh-level issues
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    std::string str() const;
};

/// Relative planarity tolerance (scaled by the face diameter).
inline constexpr double kPlanarTol = 1e-8;

/// Checks every cell of the mesh: index ranges, repeated face nodes,
/// face planarity and convexity, closed 2-manifold surface, and a
/// positive boundary Jacobian sample at every quadrature point.
/// Never throws; solver entry points require report.ok().
ValidationReport validate_mesh(const Mesh& mesh);

/// Arithmetic mean of the cell's distinct vertex coordinates.
/// Throws NumericalError for a degenerate (coplanar) cell.
Vec3 scaling_center(const PolyhedronCell& cell, const Mesh& mesh);

/// Fills cell.scaling_center for every cell.
void compute_scaling_centers(Mesh& mesh);

/// Exact volume of the (planar-faced) cell, via tetrahedra fanned from
/// the scaling center. Throws NumericalError if non-positive.
double cell_volume(const PolyhedronCell& cell, const Mesh& mesh);

/// Diameter (max vertex distance) of a face, used for tolerances.
double face_diameter(const PolygonFace& face, const Mesh& mesh);

}  // namespace psbfem
