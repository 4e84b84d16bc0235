#pragma once

#include "psbfem/element.hpp"
#include "psbfem/geometry.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>

namespace psbfem {

/// Piecewise-linear time series; a single point means a constant.
struct TimeSeries {
    std::vector<std::pair<double, double>> points;

    TimeSeries() = default;
    TimeSeries(double constant) : points{{0.0, constant}} {}

    double eval(double t) const;
};

struct DirichletBC {
    std::string node_set;
    TimeSeries value;
};

struct FluxBC {
    std::string face_set;
    TimeSeries q;  // q > 0 means heat leaving the domain
};

struct ConvectionBC {
    std::string face_set;
    double h = 0.0;  // W/m^2/degC, h >= 0
    TimeSeries t_inf;
};

struct BoundaryConditions {
    std::vector<DirichletBC> dirichlet;
    std::vector<FluxBC> flux;
    std::vector<ConvectionBC> convection;
};

/// Per-cell material lookup. Empty cell_index means every cell uses
/// materials[0].
struct MaterialMap {
    std::vector<Material> materials{Material{}};
    std::vector<int> cell_index;

    const Material& for_cell(int cell) const {
        return materials[cell_index.empty() ? 0 : cell_index[cell]];
    }
};

/// One temperature DOF per node; the map is the identity but kept as a
/// named type so constrained/free partitions have a single home.
struct DofMap {
    int n_dofs = 0;
    int dof(int node) const { return node; }
};

struct ThermalSystem {
    Eigen::SparseMatrix<double> K;  // conduction + convection surface terms
    Eigen::SparseMatrix<double> M;
    Eigen::VectorXd Q;  // time-independent part of the load
    DofMap dof_map;
    const Mesh* mesh = nullptr;
    BoundaryConditions bc;
    int quadrature_degree = 4;
};

enum class Exec { serial, parallel };

struct AssembleOptions {
    int degree = 4;
    bool use_parent_cache = true;
    Exec exec = Exec::parallel;
};

/// Element matrices scattered into global sparse K and M. The parallel
/// path computes per-cell matrices concurrently and scatters serially
/// in cell order, so results are identical across thread counts.
/// Requires validate_mesh(mesh).ok().
ThermalSystem assemble(const Mesh& mesh, const MaterialMap& materials,
                       const AssembleOptions& opts = {});

/// Adds int h N^T N dS to K and int h T_inf N^T dS to Q for every face
/// in the listed face sets, evaluated at time t.
void apply_convection(ThermalSystem& system, double t = 0.0);

/// Subtracts int q N^T dS from Q (q > 0 = outflow), evaluated at t.
void apply_flux(ThermalSystem& system, double t = 0.0);

struct FieldResult {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> fields;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// Direct solve of the Dirichlet-partitioned steady system
/// K_ff T_f = Q_f - K_fc Tbar_c. Throws NumericalError when the
/// reduced system is singular or the residual exceeds 1e-10 relative.
FieldResult solve_steady(const ThermalSystem& system);

struct TransientConfig {
    double dt = 0.0;
    double t_end = 0.0;
    std::function<double(const Vec3&)> initial;  // or constant below
    double initial_value = 0.0;
    int record_stride = 1;
};

/// One backward-difference step: (K + M/dt) T_next = Q(t_next) +
/// (M/dt) T_t, Dirichlet values taken at t_next.
Eigen::VectorXd step_transient(const ThermalSystem& system,
                               const Eigen::VectorXd& T_t, double dt,
                               double t_next);

/// Fixed-step march from the initial field to t_end; the factorization
/// of (K + M/dt) is built once and reused across steps.
FieldResult run_transient(const ThermalSystem& system,
                          const TransientConfig& cfg);

/// Nodes constrained by the Dirichlet sets, with values at time t.
void dirichlet_values(const ThermalSystem& system, double t,
                      std::vector<int>& nodes, Eigen::VectorXd& values);

}  // namespace psbfem
