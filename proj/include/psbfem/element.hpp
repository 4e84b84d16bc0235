#pragma once

#include "psbfem/geometry.hpp"
#include "psbfem/polygon.hpp"

#include <complex>
#include <iosfwd>
#include <optional>

namespace psbfem {

/// Coefficient matrices of one polygonal face, in face-local node
/// numbering (n_f x n_f).
struct FaceCoefficients {
    Eigen::MatrixXd E0, E1, E2, M0;
};

/// Cell-level coefficient matrices in cell-local numbering, plus the
/// local -> global node map.
struct CellCoefficients {
    Eigen::MatrixXd E0, E1, E2, M0;
    std::vector<int> node_ids;
};

/// Selected eigenpairs of the Hamiltonian matrix: the n modes with
/// positive real part, including the constant-temperature mode at
/// lambda = +0.5 whose flux column vanishes.
struct ModalBasis {
    Eigen::VectorXcd lambda;
    Eigen::MatrixXcd Phi_h1;  // temperature halves
    Eigen::MatrixXcd Phi_q1;  // flux halves
    double cond_h1 = 0.0;
};

struct ElementMatrices {
    Eigen::MatrixXd K;  // symmetric positive semidefinite, K*1 = 0
    Eigen::MatrixXd M;  // symmetric positive definite
};

struct BoundaryJacobian {
    Eigen::Matrix3d Jb;
    double det = 0.0;
};

/// Jacobian at one surface quadrature point. face_coords columns are
/// node positions relative to the scaling center. Throws
/// NumericalError if det <= 0.
BoundaryJacobian boundary_jacobian(const Eigen::Matrix3Xd& face_coords,
                                   const BasisEval& basis);

struct BVectors {
    Vec3 b1, b2, b3;  // columns of Jb^-1
};

BVectors b_vectors(const Eigen::Matrix3d& Jb, double det);

/// Surface integrals E0/E1/E2/M0 of one face, nodes relative to the
/// scaling center.
FaceCoefficients face_coefficients(const Eigen::Matrix3Xd& face_coords,
                                   const Material& mat, int degree);

/// Face blocks scattered into cell-local numbering.
CellCoefficients element_matrices_raw(const PolyhedronCell& cell,
                                      const Mesh& mesh, const Material& mat,
                                      int degree);

/// Hamiltonian matrix Zp (2n x 2n). Throws NumericalError when E0 is
/// ill-conditioned (cond > 1e12).
Eigen::MatrixXd hamiltonian(const Eigen::MatrixXd& E0,
                            const Eigen::MatrixXd& E1,
                            const Eigen::MatrixXd& E2);

/// Complex eigen decomposition of Zp with deterministic ordering
/// (ascending real part, then imaginary part). Selects the n modes
/// with positive real part and checks for the constant mode.
ModalBasis modal_decomposition(const Eigen::MatrixXd& Zp);

/// K = Phi_q1 * Phi_h1^-1, realized as the symmetrized real part.
/// Throws NumericalError if the imaginary residual exceeds 1e-8
/// relative.
Eigen::MatrixXd stiffness(const ModalBasis& basis);

/// M = Phi_h1^-T m Phi_h1^-1 with m_ij = m0_ij / (l_i + l_j + 2),
/// m0 = Phi_h1^T M0 Phi_h1.
Eigen::MatrixXd mass(const ModalBasis& basis, const Eigen::MatrixXd& M0);

/// Full per-cell pipeline: coefficients -> Zp -> modes -> (K, M).
struct CellMatrices {
    Eigen::MatrixXd K, M;
    std::vector<int> node_ids;
};

CellMatrices element_matrices(const PolyhedronCell& cell, const Mesh& mesh,
                              const Material& mat, int degree);

/// Precomputed unit-cube matrices with unit material, in canonical
/// corner order (local index = ix + 2*iy + 4*iz).
struct ParentCache {
    Eigen::MatrixXd K_par, M_par;
    int degree = 0;

    static ParentCache compute(int degree);
};

/// Edge length L and the canonical corner order of the cell's nodes,
/// when the cell is an axis-aligned hanging-node-free cube.
struct ScalableCube {
    double L = 0.0;
    std::vector<int> corner_nodes;  // global ids, canonical corner order
};

std::optional<ScalableCube> is_scalable_cube(const PolyhedronCell& cell,
                                             const Mesh& mesh);

/// K = k*L*K_par, M = rho*c*L^3*M_par (isotropic material only; callers
/// fall back to the full pipeline otherwise).
ElementMatrices map_cube(const ParentCache& cache, const Material& mat,
                         double L);

/// Introspection hook: dumps E0/E1/E2/M0, the selected eigenvalues and
/// K/M of one cell as text.
void dump_cell_report(std::ostream& out, int cell_index,
                      const PolyhedronCell& cell, const Mesh& mesh,
                      const Material& mat, int degree);

}  // namespace psbfem
