#include "psbfem/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace psbfem {

double TimeSeries::eval(double t) const {
    if (points.empty()) return 0.0;
    if (points.size() == 1 || t <= points.front().first)
        return points.front().second;
    if (t >= points.back().first) return points.back().second;
    for (size_t i = 1; i < points.size(); ++i) {
        if (t <= points[i].first) {
            const auto& [t0, v0] = points[i - 1];
            const auto& [t1, v1] = points[i];
            const double a = (t - t0) / (t1 - t0);
            return v0 + a * (v1 - v0);
        }
    }
    return points.back().second;
}

namespace {

using Triplet = Eigen::Triplet<double>;

void scatter(const Eigen::MatrixXd& A, const std::vector<int>& nodes,
             std::vector<Triplet>& triplets) {
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            triplets.emplace_back(nodes[i], nodes[j], A(i, j));
}

}  // namespace

ThermalSystem assemble(const Mesh& mesh, const MaterialMap& materials,
                       const AssembleOptions& opts) {
    const int n_cells = static_cast<int>(mesh.cells.size());
    const int n_dofs = static_cast<int>(mesh.nodes.size());

    ParentCache cache;
    bool have_cache = false;
    if (opts.use_parent_cache) {
        cache = ParentCache::compute(opts.degree);
        have_cache = true;
    }

    auto compute_cell = [&](int c) -> CellMatrices {
        const auto& cell = mesh.cells[c];
        const Material& mat = materials.for_cell(c);
        if (have_cache && mat.isotropic()) {
            if (auto cube = is_scalable_cube(cell, mesh)) {
                const auto em = map_cube(cache, mat, cube->L);
                return {em.K, em.M, cube->corner_nodes};
            }
        }
        try {
            return element_matrices(cell, mesh, mat, opts.degree);
        } catch (const NumericalError& e) {
            throw NumericalError("cell " + std::to_string(c) + ": " + e.what());
        }
    };

    // Per-cell matrices are computed concurrently; the scatter below is
    // serial and in cell order, so the result is independent of the
    // thread count.
    std::vector<CellMatrices> cell_matrices(n_cells);
    if (opts.exec == Exec::parallel) {
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
        for (int c = 0; c < n_cells; ++c) {
            try {
                cell_matrices[c] = compute_cell(c);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (int c = 0; c < n_cells; ++c) cell_matrices[c] = compute_cell(c);
    }

    std::vector<Triplet> k_triplets, m_triplets;
    for (const auto& cm : cell_matrices) {
        scatter(cm.K, cm.node_ids, k_triplets);
        scatter(cm.M, cm.node_ids, m_triplets);
    }

    ThermalSystem system;
    system.K.resize(n_dofs, n_dofs);
    system.M.resize(n_dofs, n_dofs);
    system.K.setFromTriplets(k_triplets.begin(), k_triplets.end());
    system.M.setFromTriplets(m_triplets.begin(), m_triplets.end());
    system.Q = Eigen::VectorXd::Zero(n_dofs);
    system.dof_map.n_dofs = n_dofs;
    system.mesh = &mesh;
    system.quadrature_degree = opts.degree;
    return system;
}

namespace {

// Surface integral machinery shared by flux and convection terms:
// integrates f(N) over a physical boundary face using the polygon
// quadrature and the in-plane area Jacobian.
template <typename Accumulate>
void integrate_face(const Mesh& mesh, int cell, int face,
                    int degree, Accumulate&& accumulate) {
    const auto& f = mesh.cells[cell].faces[face];
    const int nf = static_cast<int>(f.node_ids.size());
    Eigen::Matrix3Xd coords(3, nf);
    for (int i = 0; i < nf; ++i) coords.col(i) = mesh.nodes[f.node_ids[i]];

    const auto poly = reference_polygon(nf);
    const auto& rule = polygon_quadrature(nf, degree);
    for (size_t q = 0; q < rule.points.size(); ++q) {
        const auto basis = wachspress_grad(poly, rule.points[q]);
        const Vec3 t_eta = coords * basis.dN_deta;
        const Vec3 t_zeta = coords * basis.dN_dzeta;
        const double dS = t_eta.cross(t_zeta).norm();
        accumulate(f.node_ids, basis.N, rule.weights[q] * dS);
    }
}

void require_boundary_face(const Mesh& mesh, int cell, int face,
                           const std::string& set_name) {
    // A boundary face's directed edges are not reversed by any other
    // cell; interior faces are shared with opposite orientation.
    const auto& ids = mesh.cells[cell].faces[face].node_ids;
    std::set<int> face_nodes(ids.begin(), ids.end());
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        if (static_cast<int>(c) == cell) continue;
        for (const auto& other : mesh.cells[c].faces) {
            std::set<int> other_nodes(other.node_ids.begin(),
                                      other.node_ids.end());
            if (other_nodes == face_nodes)
                throw InputError("face set '" + set_name +
                                 "' references interior face " +
                                 std::to_string(face) + " of cell " +
                                 std::to_string(cell));
        }
    }
}

const std::vector<std::pair<int, int>>& face_set(const ThermalSystem& system,
                                                 const std::string& name) {
    auto it = system.mesh->face_sets.find(name);
    if (it == system.mesh->face_sets.end())
        throw InputError("unknown face set '" + name + "'");
    return it->second;
}

}  // namespace

void apply_convection(ThermalSystem& system, double t) {
    std::vector<Triplet> triplets;
    for (const auto& bc : system.bc.convection) {
        if (bc.h < 0.0) throw InputError("negative convection coefficient");
        if (bc.h == 0.0) continue;
        const double t_inf = bc.t_inf.eval(t);
        for (const auto& [cell, face] : face_set(system, bc.face_set)) {
            require_boundary_face(*system.mesh, cell, face, bc.face_set);
            integrate_face(
                *system.mesh, cell, face, system.quadrature_degree,
                [&](const std::vector<int>& ids, const Eigen::VectorXd& N,
                    double w) {
                    for (size_t i = 0; i < ids.size(); ++i) {
                        system.Q(ids[i]) += bc.h * t_inf * w * N(i);
                        for (size_t j = 0; j < ids.size(); ++j)
                            triplets.emplace_back(ids[i], ids[j],
                                                  bc.h * w * N(i) * N(j));
                    }
                });
        }
    }
    if (!triplets.empty()) {
        Eigen::SparseMatrix<double> H(system.dof_map.n_dofs,
                                      system.dof_map.n_dofs);
        H.setFromTriplets(triplets.begin(), triplets.end());
        system.K += H;
    }
}

void apply_flux(ThermalSystem& system, double t) {
    for (const auto& bc : system.bc.flux) {
        const double q = bc.q.eval(t);
        if (q == 0.0) continue;
        for (const auto& [cell, face] : face_set(system, bc.face_set)) {
            require_boundary_face(*system.mesh, cell, face, bc.face_set);
            integrate_face(
                *system.mesh, cell, face, system.quadrature_degree,
                [&](const std::vector<int>& ids, const Eigen::VectorXd& N,
                    double w) {
                    // q > 0 is outflow, so it is subtracted from the load
                    for (size_t i = 0; i < ids.size(); ++i)
                        system.Q(ids[i]) -= q * w * N(i);
                });
        }
    }
}

void dirichlet_values(const ThermalSystem& system, double t,
                      std::vector<int>& nodes, Eigen::VectorXd& values) {
    std::map<int, double> fixed;
    for (const auto& bc : system.bc.dirichlet) {
        auto it = system.mesh->node_sets.find(bc.node_set);
        if (it == system.mesh->node_sets.end())
            throw InputError("unknown node set '" + bc.node_set + "'");
        const double value = bc.value.eval(t);
        for (int node : it->second) {
            auto [pos, inserted] = fixed.try_emplace(node, value);
            if (!inserted && pos->second != value)
                throw InputError("conflicting Dirichlet values at node " +
                                 std::to_string(node));
        }
    }
    nodes.clear();
    values.resize(static_cast<Eigen::Index>(fixed.size()));
    int i = 0;
    for (const auto& [node, value] : fixed) {
        nodes.push_back(node);
        values(i++) = value;
    }
}

namespace {

struct Partition {
    std::vector<int> free;        // free dof -> global dof
    std::vector<int> constrained;
    std::vector<int> global_to_free;  // -1 for constrained
};

Partition make_partition(int n_dofs, const std::vector<int>& constrained) {
    Partition p;
    p.constrained = constrained;
    p.global_to_free.assign(n_dofs, 0);
    for (int node : constrained) p.global_to_free[node] = -1;
    for (int g = 0; g < n_dofs; ++g) {
        if (p.global_to_free[g] == 0) {
            p.global_to_free[g] = static_cast<int>(p.free.size());
            p.free.push_back(g);
        }
    }
    return p;
}

Eigen::SparseMatrix<double> restrict_ff(const Eigen::SparseMatrix<double>& A,
                                        const Partition& p) {
    std::vector<Triplet> triplets;
    for (int col = 0; col < A.outerSize(); ++col) {
        const int fc = p.global_to_free[col];
        if (fc < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            const int fr = p.global_to_free[it.row()];
            if (fr >= 0) triplets.emplace_back(fr, fc, it.value());
        }
    }
    Eigen::SparseMatrix<double> out(p.free.size(), p.free.size());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

// rhs_f -= A_fc * x_c
void subtract_coupling(const Eigen::SparseMatrix<double>& A,
                       const Partition& p, const Eigen::VectorXd& x_c,
                       Eigen::VectorXd& rhs_f) {
    for (size_t ci = 0; ci < p.constrained.size(); ++ci) {
        const int col = p.constrained[ci];
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            const int fr = p.global_to_free[it.row()];
            if (fr >= 0) rhs_f(fr) -= it.value() * x_c(ci);
        }
    }
}

void check_residual(const Eigen::SparseMatrix<double>& A_ff,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
    const double rhs_norm = rhs.norm();
    const double res = (A_ff * x - rhs).norm();
    if (rhs_norm > 0.0 && res / rhs_norm > 1e-10)
        throw NumericalError("solve residual " + std::to_string(res / rhs_norm) +
                             " exceeds 1e-10");
}

}  // namespace

FieldResult solve_steady(const ThermalSystem& system) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<int> fixed_nodes;
    Eigen::VectorXd fixed_values;
    dirichlet_values(system, 0.0, fixed_nodes, fixed_values);
    if (fixed_nodes.empty() && system.bc.convection.empty())
        throw NumericalError("insufficient constraints");

    const auto part = make_partition(system.dof_map.n_dofs, fixed_nodes);
    const auto K_ff = restrict_ff(system.K, part);

    Eigen::VectorXd rhs(part.free.size());
    for (size_t i = 0; i < part.free.size(); ++i) rhs(i) = system.Q(part.free[i]);
    subtract_coupling(system.K, part, fixed_values, rhs);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K_ff);
    if (solver.info() != Eigen::Success)
        throw NumericalError("insufficient constraints");
    const Eigen::VectorXd T_f = solver.solve(rhs);
    check_residual(K_ff, T_f, rhs);

    Eigen::VectorXd T(system.dof_map.n_dofs);
    for (size_t i = 0; i < part.free.size(); ++i) T(part.free[i]) = T_f(i);
    for (size_t i = 0; i < fixed_nodes.size(); ++i)
        T(fixed_nodes[i]) = fixed_values(i);

    FieldResult result;
    result.times.push_back(0.0);
    result.fields.push_back(std::move(T));
    result.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return result;
}

namespace {

// Rebuilds the time-dependent load (flux + convection inflow part) at
// time t on top of a pristine system copy. Convection's K contribution
// is time-independent (h is constant), so only Q changes.
Eigen::VectorXd load_at(const ThermalSystem& system, double t) {
    ThermalSystem scratch;
    scratch.mesh = system.mesh;
    scratch.bc = system.bc;
    scratch.quadrature_degree = system.quadrature_degree;
    scratch.dof_map = system.dof_map;
    scratch.Q = Eigen::VectorXd::Zero(system.dof_map.n_dofs);
    scratch.K.resize(system.dof_map.n_dofs, system.dof_map.n_dofs);
    apply_flux(scratch, t);
    // convection load term only (matrix part already folded into K)
    for (const auto& bc : system.bc.convection) {
        if (bc.h == 0.0) continue;
        const double t_inf = bc.t_inf.eval(t);
        for (const auto& [cell, face] :
             system.mesh->face_sets.at(bc.face_set)) {
            const auto& f = system.mesh->cells[cell].faces[face];
            const int nf = static_cast<int>(f.node_ids.size());
            Eigen::Matrix3Xd coords(3, nf);
            for (int i = 0; i < nf; ++i)
                coords.col(i) = system.mesh->nodes[f.node_ids[i]];
            const auto poly = reference_polygon(nf);
            const auto& rule = polygon_quadrature(nf, system.quadrature_degree);
            for (size_t q = 0; q < rule.points.size(); ++q) {
                const auto basis = wachspress_grad(poly, rule.points[q]);
                const Vec3 t_eta = coords * basis.dN_deta;
                const Vec3 t_zeta = coords * basis.dN_dzeta;
                const double w = rule.weights[q] * t_eta.cross(t_zeta).norm();
                for (int i = 0; i < nf; ++i)
                    scratch.Q(f.node_ids[i]) += bc.h * t_inf * w * basis.N(i);
            }
        }
    }
    return scratch.Q;
}

struct TransientSolver {
    const ThermalSystem& system;
    double dt;
    Partition part;
    Eigen::SparseMatrix<double> A;  // K + M/dt
    Eigen::SparseMatrix<double> A_ff;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factorization;

    TransientSolver(const ThermalSystem& sys, double step)
        : system(sys), dt(step) {
        if (dt <= 0.0) throw InputError("time step must be positive");
        std::vector<int> fixed_nodes;
        Eigen::VectorXd fixed_values;
        dirichlet_values(system, 0.0, fixed_nodes, fixed_values);
        part = make_partition(system.dof_map.n_dofs, fixed_nodes);
        A = system.K + (1.0 / dt) * system.M;
        A_ff = restrict_ff(A, part);
        factorization.compute(A_ff);
        if (factorization.info() != Eigen::Success)
            throw NumericalError("insufficient constraints");
    }

    Eigen::VectorXd step(const Eigen::VectorXd& T_t, double t_next) const {
        std::vector<int> fixed_nodes;
        Eigen::VectorXd fixed_values;
        dirichlet_values(system, t_next, fixed_nodes, fixed_values);

        Eigen::VectorXd full_rhs = load_at(system, t_next);
        full_rhs.noalias() += (1.0 / dt) * (system.M * T_t);

        Eigen::VectorXd rhs(part.free.size());
        for (size_t i = 0; i < part.free.size(); ++i)
            rhs(i) = full_rhs(part.free[i]);
        subtract_coupling(A, part, fixed_values, rhs);

        const Eigen::VectorXd T_f = factorization.solve(rhs);
        check_residual(A_ff, T_f, rhs);

        Eigen::VectorXd T(system.dof_map.n_dofs);
        for (size_t i = 0; i < part.free.size(); ++i) T(part.free[i]) = T_f(i);
        for (size_t i = 0; i < fixed_nodes.size(); ++i)
            T(fixed_nodes[i]) = fixed_values(i);
        return T;
    }
};

}  // namespace

Eigen::VectorXd step_transient(const ThermalSystem& system,
                               const Eigen::VectorXd& T_t, double dt,
                               double t_next) {
    return TransientSolver(system, dt).step(T_t, t_next);
}

FieldResult run_transient(const ThermalSystem& system,
                          const TransientConfig& cfg) {
    if (cfg.dt <= 0.0 || cfg.t_end < cfg.dt)
        throw InputError("invalid transient configuration");

    Eigen::VectorXd T(system.dof_map.n_dofs);
    if (cfg.initial) {
        for (int i = 0; i < system.dof_map.n_dofs; ++i)
            T(i) = cfg.initial(system.mesh->nodes[i]);
    } else {
        T.setConstant(cfg.initial_value);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const TransientSolver solver(system, cfg.dt);
    const int n_steps =
        static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    const int stride = std::max(1, cfg.record_stride);

    FieldResult result;
    result.times.push_back(0.0);
    result.fields.push_back(T);
    for (int s = 1; s <= n_steps; ++s) {
        const double t_next = s * cfg.dt;
        T = solver.step(T, t_next);
        if (s % stride == 0 || s == n_steps) {
            result.times.push_back(t_next);
            result.fields.push_back(T);
        }
    }
    result.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return result;
}

}  // namespace psbfem
