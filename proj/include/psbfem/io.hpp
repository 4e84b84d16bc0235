#pragma once

#include "psbfem/assembly.hpp"

#include <iosfwd>
#include <string>

namespace psbfem {

/// Loads the JSON mesh format (docs/formats.md) and validates it.
/// Throws InputError with the validation report attached on failure.
Mesh load_mesh(const std::string& path);
Mesh parse_mesh(std::istream& in, const std::string& origin = "<stream>");

void write_mesh(std::ostream& out, const Mesh& mesh);
void save_mesh(const std::string& path, const Mesh& mesh);

/// Solver configuration document (JSON, docs/formats.md).
struct SolverConfig {
    bool transient = false;
    MaterialMap materials;
    BoundaryConditions bc;
    TransientConfig transient_cfg;
    int quadrature_degree = 4;
    bool use_parent_cache = true;
    int output_stride = 1;
    std::string output_path = "out";
};

SolverConfig load_config(const std::string& path, const Mesh& mesh);
SolverConfig parse_config(std::istream& in, const Mesh& mesh,
                          const std::string& origin = "<stream>");

/// Legacy ASCII VTK unstructured grid with polyhedron cells (type 42,
/// face-stream encoding) and a "Temperature" point scalar.
void write_vtk(std::ostream& out, const Mesh& mesh,
               const Eigen::VectorXd& temperature);
void write_vtk(const std::string& path, const Mesh& mesh,
               const Eigen::VectorXd& temperature);

/// One file per recorded time, suffixed by step index
/// (<base>_0000.vtk, ...). Returns the written paths.
std::vector<std::string> write_vtk_series(const std::string& base,
                                          const Mesh& mesh,
                                          const FieldResult& result);

}  // namespace psbfem
