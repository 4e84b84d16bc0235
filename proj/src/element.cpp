#include "psbfem/element.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace psbfem {

BoundaryJacobian boundary_jacobian(const Eigen::Matrix3Xd& face_coords,
                                   const BasisEval& basis) {
    BoundaryJacobian out;
    out.Jb.row(0) = (face_coords * basis.N).transpose();
    out.Jb.row(1) = (face_coords * basis.dN_deta).transpose();
    out.Jb.row(2) = (face_coords * basis.dN_dzeta).transpose();
    out.det = out.Jb.determinant();
    if (out.det <= 0.0) throw NumericalError("negative boundary Jacobian");
    return out;
}

BVectors b_vectors(const Eigen::Matrix3d& Jb, double det) {
    if (det == 0.0) throw NumericalError("singular boundary Jacobian");
    const Eigen::Matrix3d inv = Jb.inverse();
    if (!inv.allFinite()) throw NumericalError("singular boundary Jacobian");
    return {inv.col(0), inv.col(1), inv.col(2)};
}

FaceCoefficients face_coefficients(const Eigen::Matrix3Xd& face_coords,
                                   const Material& mat, int degree) {
    const int nf = static_cast<int>(face_coords.cols());
    const auto poly = reference_polygon(nf);
    const auto& rule = polygon_quadrature(nf, degree);
    const Eigen::Matrix3d k = mat.conductivity();
    const double rho_c = mat.rho_c();

    FaceCoefficients fc;
    fc.E0 = Eigen::MatrixXd::Zero(nf, nf);
    fc.E1 = Eigen::MatrixXd::Zero(nf, nf);
    fc.E2 = Eigen::MatrixXd::Zero(nf, nf);
    fc.M0 = Eigen::MatrixXd::Zero(nf, nf);

    for (size_t q = 0; q < rule.points.size(); ++q) {
        const auto basis = wachspress_grad(poly, rule.points[q]);
        const auto jac = boundary_jacobian(face_coords, basis);
        const auto b = b_vectors(jac.Jb, jac.det);

        const Eigen::MatrixXd B1 = b.b1 * basis.N.transpose();
        const Eigen::MatrixXd B2 = b.b2 * basis.dN_deta.transpose() +
                                   b.b3 * basis.dN_dzeta.transpose();
        const double w = rule.weights[q] * jac.det;

        fc.E0.noalias() += w * B1.transpose() * k * B1;
        fc.E1.noalias() += w * B2.transpose() * k * B1;
        fc.E2.noalias() += w * B2.transpose() * k * B2;
        fc.M0.noalias() += (w * rho_c) * basis.N * basis.N.transpose();
    }
    return fc;
}

CellCoefficients element_matrices_raw(const PolyhedronCell& cell,
                                      const Mesh& mesh, const Material& mat,
                                      int degree) {
    CellCoefficients cc;
    cc.node_ids = cell.distinct_nodes();
    const int n = static_cast<int>(cc.node_ids.size());
    std::map<int, int> local;
    for (int i = 0; i < n; ++i) local[cc.node_ids[i]] = i;

    cc.E0 = Eigen::MatrixXd::Zero(n, n);
    cc.E1 = Eigen::MatrixXd::Zero(n, n);
    cc.E2 = Eigen::MatrixXd::Zero(n, n);
    cc.M0 = Eigen::MatrixXd::Zero(n, n);

    for (const auto& face : cell.faces) {
        const int nf = static_cast<int>(face.node_ids.size());
        Eigen::Matrix3Xd coords(3, nf);
        for (int i = 0; i < nf; ++i)
            coords.col(i) = mesh.nodes[face.node_ids[i]] - cell.scaling_center;
        const auto fc = face_coefficients(coords, mat, degree);
        for (int i = 0; i < nf; ++i) {
            const int gi = local.at(face.node_ids[i]);
            for (int j = 0; j < nf; ++j) {
                const int gj = local.at(face.node_ids[j]);
                cc.E0(gi, gj) += fc.E0(i, j);
                cc.E1(gi, gj) += fc.E1(i, j);
                cc.E2(gi, gj) += fc.E2(i, j);
                cc.M0(gi, gj) += fc.M0(i, j);
            }
        }
    }
    return cc;
}

Eigen::MatrixXd hamiltonian(const Eigen::MatrixXd& E0,
                            const Eigen::MatrixXd& E1,
                            const Eigen::MatrixXd& E2) {
    const int n = static_cast<int>(E0.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E0);
    const double smin = svd.singularValues()(n - 1);
    if (smin <= 0.0 || svd.singularValues()(0) / smin > 1e12)
        throw NumericalError("ill-conditioned E0");

    const Eigen::MatrixXd E0inv = E0.inverse();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd Zp(2 * n, 2 * n);
    Zp.topLeftCorner(n, n) = -E0inv * E1.transpose() + 0.5 * I;
    Zp.topRightCorner(n, n) = E0inv;
    Zp.bottomLeftCorner(n, n) = E2 - E1 * E0inv * E1.transpose();
    Zp.bottomRightCorner(n, n) = E1 * E0inv - 0.5 * I;
    return Zp;
}

ModalBasis modal_decomposition(const Eigen::MatrixXd& Zp) {
    const int n = static_cast<int>(Zp.rows()) / 2;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Zp);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigen decomposition of Zp failed");

    const Eigen::VectorXcd values = es.eigenvalues();
    const Eigen::MatrixXcd vectors = es.eigenvectors();

    std::vector<int> order(2 * n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values(a).real() != values(b).real())
            return values(a).real() < values(b).real();
        if (values(a).imag() != values(b).imag())
            return values(a).imag() < values(b).imag();
        return a < b;
    });

    std::vector<int> selected;
    for (int idx : order)
        if (values(idx).real() > 0.0) selected.push_back(idx);
    if (static_cast<int>(selected.size()) != n)
        throw NumericalError("unbalanced spectrum: selected " +
                             std::to_string(selected.size()) + " of " +
                             std::to_string(n) + " modes");

    ModalBasis basis;
    basis.lambda.resize(n);
    basis.Phi_h1.resize(n, n);
    basis.Phi_q1.resize(n, n);
    for (int i = 0; i < n; ++i) {
        basis.lambda(i) = values(selected[i]);
        basis.Phi_h1.col(i) = vectors.col(selected[i]).head(n);
        basis.Phi_q1.col(i) = vectors.col(selected[i]).tail(n);
    }

    double dist_const = std::abs(basis.lambda(0) - std::complex<double>(0.5, 0));
    for (int i = 1; i < n; ++i)
        dist_const = std::min(
            dist_const, std::abs(basis.lambda(i) - std::complex<double>(0.5, 0)));
    if (dist_const > 1e-8)
        throw NumericalError("constant-temperature mode missing from spectrum");

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(basis.Phi_h1);
    const double smin = svd.singularValues()(n - 1);
    basis.cond_h1 = smin > 0.0 ? svd.singularValues()(0) / smin
                               : std::numeric_limits<double>::infinity();
    if (basis.cond_h1 > 1e10)
        throw NumericalError("near-defective modal basis (cond " +
                             std::to_string(basis.cond_h1) + ")");
    return basis;
}

namespace {

// Real part under the relative imaginary-residual gate, symmetrized.
Eigen::MatrixXd realize_symmetric(const Eigen::MatrixXcd& A,
                                  const char* what) {
    const double imag_max = A.imag().cwiseAbs().maxCoeff();
    const double real_max = A.real().cwiseAbs().maxCoeff();
    if (imag_max > 1e-8 * real_max)
        throw NumericalError(std::string("non-real ") + what +
                             " (imaginary residual " +
                             std::to_string(imag_max / real_max) + ")");
    const Eigen::MatrixXd R = A.real();
    return 0.5 * (R + R.transpose());
}

}  // namespace

Eigen::MatrixXd stiffness(const ModalBasis& basis) {
    const Eigen::MatrixXcd K =
        basis.Phi_q1 * basis.Phi_h1.partialPivLu().inverse();
    return realize_symmetric(K, "stiffness");
}

Eigen::MatrixXd mass(const ModalBasis& basis, const Eigen::MatrixXd& M0) {
    const int n = static_cast<int>(M0.rows());
    const Eigen::MatrixXcd m0 =
        basis.Phi_h1.transpose() * M0 * basis.Phi_h1;

    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::complex<double> denom =
                basis.lambda(i) + basis.lambda(j) + 2.0;
            if (denom.real() <= 0.0)
                throw NumericalError("invalid modal exponent");
            m(i, j) = m0(i, j) / denom;
        }

    const Eigen::MatrixXcd Hinv = basis.Phi_h1.partialPivLu().inverse();
    const Eigen::MatrixXcd M = Hinv.transpose() * m * Hinv;
    return realize_symmetric(M, "mass");
}

CellMatrices element_matrices(const PolyhedronCell& cell, const Mesh& mesh,
                              const Material& mat, int degree) {
    const auto cc = element_matrices_raw(cell, mesh, mat, degree);
    const auto Zp = hamiltonian(cc.E0, cc.E1, cc.E2);
    const auto basis = modal_decomposition(Zp);
    CellMatrices out;
    out.K = stiffness(basis);
    out.M = mass(basis, cc.M0);
    out.node_ids = cc.node_ids;
    return out;
}

namespace {

// Canonical unit cube: corner local index ix + 2*iy + 4*iz, faces
// outward CCW.
const int kCubeFaces[6][4] = {
    {0, 2, 3, 1},  // z = 0
    {4, 5, 7, 6},  // z = 1
    {0, 1, 5, 4},  // y = 0
    {2, 6, 7, 3},  // y = 1
    {0, 4, 6, 2},  // x = 0
    {1, 3, 7, 5},  // x = 1
};

Mesh unit_cube_mesh() {
    Mesh mesh;
    for (int iz = 0; iz < 2; ++iz)
        for (int iy = 0; iy < 2; ++iy)
            for (int ix = 0; ix < 2; ++ix)
                mesh.nodes.emplace_back(ix, iy, iz);
    PolyhedronCell cell;
    for (const auto& f : kCubeFaces) {
        PolygonFace face;
        face.node_ids.assign(f, f + 4);
        cell.faces.push_back(face);
    }
    mesh.cells.push_back(cell);
    compute_scaling_centers(mesh);
    return mesh;
}

}  // namespace

ParentCache ParentCache::compute(int degree) {
    const Mesh mesh = unit_cube_mesh();
    const auto cm = element_matrices(mesh.cells[0], mesh, Material{}, degree);
    // Distinct-node order of the canonical cube happens to differ from
    // corner order; permute so row i corresponds to corner i.
    const int n = 8;
    Eigen::MatrixXd K(n, n), M(n, n);
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[cm.node_ids[i]] = i;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            K(i, j) = cm.K(pos[i], pos[j]);
            M(i, j) = cm.M(pos[i], pos[j]);
        }
    ParentCache cache;
    cache.K_par = K;
    cache.M_par = M;
    cache.degree = degree;
    return cache;
}

std::optional<ScalableCube> is_scalable_cube(const PolyhedronCell& cell,
                                             const Mesh& mesh) {
    const auto nodes = cell.distinct_nodes();
    if (nodes.size() != 8 || cell.faces.size() != 6) return std::nullopt;
    for (const auto& f : cell.faces)
        if (f.node_ids.size() != 4) return std::nullopt;

    Vec3 lo = mesh.nodes[nodes[0]];
    Vec3 hi = lo;
    for (int id : nodes) {
        lo = lo.cwiseMin(mesh.nodes[id]);
        hi = hi.cwiseMax(mesh.nodes[id]);
    }
    const Vec3 ext = hi - lo;
    const double L = ext.maxCoeff();
    if (L <= 0.0) return std::nullopt;
    const double tol = 1e-9 * L;
    if (std::abs(ext.x() - L) > tol || std::abs(ext.y() - L) > tol ||
        std::abs(ext.z() - L) > tol)
        return std::nullopt;

    // Each node must sit at a distinct corner of the bounding cube.
    ScalableCube cube;
    cube.L = L;
    cube.corner_nodes.assign(8, -1);
    for (int id : nodes) {
        const Vec3 rel = mesh.nodes[id] - lo;
        int corner = 0;
        for (int axis = 0; axis < 3; ++axis) {
            if (std::abs(rel(axis)) <= tol) {
                // low side
            } else if (std::abs(rel(axis) - L) <= tol) {
                corner += 1 << axis;
            } else {
                return std::nullopt;
            }
        }
        if (cube.corner_nodes[corner] != -1) return std::nullopt;
        cube.corner_nodes[corner] = id;
    }
    return cube;
}

ElementMatrices map_cube(const ParentCache& cache, const Material& mat,
                         double L) {
    if (!mat.isotropic())
        throw NumericalError("parent-cube mapping requires isotropic material");
    if (L <= 0.0) throw NumericalError("non-positive cube edge length");
    ElementMatrices out;
    out.K = (mat.kx * L) * cache.K_par;
    out.M = (mat.rho_c() * L * L * L) * cache.M_par;
    return out;
}

void dump_cell_report(std::ostream& out, int cell_index,
                      const PolyhedronCell& cell, const Mesh& mesh,
                      const Material& mat, int degree) {
    const Eigen::IOFormat fmt(12, 0, " ", "\n", "  ");
    const auto cc = element_matrices_raw(cell, mesh, mat, degree);
    out << "cell " << cell_index << " (" << cc.node_ids.size() << " nodes, "
        << cell.faces.size() << " faces)\n";
    out << " scaling center: " << cell.scaling_center.transpose() << "\n";
    out << " E0:\n" << cc.E0.format(fmt) << "\n";
    out << " E1:\n" << cc.E1.format(fmt) << "\n";
    out << " E2:\n" << cc.E2.format(fmt) << "\n";
    out << " M0:\n" << cc.M0.format(fmt) << "\n";
    const auto Zp = hamiltonian(cc.E0, cc.E1, cc.E2);
    const auto basis = modal_decomposition(Zp);
    out << " lambda+:";
    for (int i = 0; i < basis.lambda.size(); ++i) {
        out << " " << basis.lambda(i).real();
        if (basis.lambda(i).imag() != 0.0)
            out << (basis.lambda(i).imag() > 0 ? "+" : "")
                << basis.lambda(i).imag() << "i";
    }
    out << "\n cond(Phi_h1): " << basis.cond_h1 << "\n";
    out << " K:\n" << stiffness(basis).format(fmt) << "\n";
    out << " M:\n" << mass(basis, cc.M0).format(fmt) << "\n";
}

}  // namespace psbfem
