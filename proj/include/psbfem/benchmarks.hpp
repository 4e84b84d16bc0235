#pragma once

#include "psbfem/assembly.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace psbfem {

/// ||T_num - T_ref|| / ||T_ref|| over nodal values (Euclidean norms).
double l2_relative_error(const Eigen::VectorXd& T_num,
                         const Eigen::VectorXd& T_ref);

/// Steady cube reference field on [0,1]^3:
/// T = sinh(pi*y)/sinh(pi) * sin(pi*x) * sin(pi*z).
double analytic_steady_cube(const Vec3& p);

/// Separated-variables solution of the steady cube boundary value
/// problem (T = sin(pi*x) sin(pi*z) on y=1, zero on the other faces):
/// T = sinh(sqrt(2)*pi*y)/sinh(sqrt(2)*pi) * sin(pi*x) * sin(pi*z).
/// This is the harmonic field the BVP actually admits; the
/// analytic_steady_cube form above matches the same boundary data but
/// is not harmonic in 3D, so discrete solutions do not converge to it.
double analytic_steady_cube_harmonic(const Vec3& p);

/// Transient cube reference field on [0,pi]^3:
/// T = 10 exp(-3t) sin(x) sin(y) sin(z).
double analytic_transient_cube(const Vec3& p, double t);

/// Axis-aligned hexahedral mesh of a box, with boundary node sets
/// (xmin..zmax) and matching face sets. Every cell is detectable by
/// is_scalable_cube.
Mesh structured_box_mesh(const Vec3& extents, double h);

struct BenchResult {
    std::string name;
    double h = 0.0;
    int dofs = 0;
    double error = 0.0;      // case-specific error measure
    double gate = 0.0;       // pass threshold
    bool passed = false;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;
    Eigen::VectorXd field;   // final nodal temperatures
    std::optional<double> monitor_value;
};

struct BenchOptions {
    int degree = 4;
    bool use_parent_cache = true;
    Exec exec = Exec::parallel;
    double dt = 0.01;  // transient cases
};

/// Built-in cases: "patch", "beam", "steady-cube", "steady-cube-exact",
/// "transient-cube", "robin-slab". Throws InputError for unknown names.
/// "steady-cube-exact" is the same solve as "steady-cube" but measures
/// the error against the harmonic reference field.
BenchResult run_bench(const std::string& name, double h,
                      const BenchOptions& opts = {});

/// Default mesh size of a named case.
double bench_default_h(const std::string& name);

struct ConvergenceRecord {
    std::string name;
    double h = 0.0;
    int dofs = 0;
    double e_l2 = 0.0;
    double seconds = 0.0;
    bool cache_flag = true;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRecord> records;
    double fitted_order = 0.0;  // least-squares slope of log e vs log h
};

/// Refinement sequences: beam {1.0, 0.5, 0.25, 0.1}, steady-cube
/// {0.25, 0.1, 0.05}, transient-cube {pi/5, pi/10, pi/20}.
ConvergenceStudy run_convergence(const std::string& name,
                                 const std::vector<double>& hs,
                                 const BenchOptions& opts = {});

std::vector<double> convergence_default_hs(const std::string& name);

/// CSV columns: case,h,dofs,e_L2,order,seconds,cache_flag.
void write_convergence_csv(std::ostream& out, const ConvergenceStudy& study);

/// Least-squares slope of log(e) against log(h).
double fit_order(const std::vector<double>& hs,
                 const std::vector<double>& errors);

}  // namespace psbfem
