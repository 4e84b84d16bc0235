#include "psbfem/geometry.hpp"

#include "psbfem/element.hpp"
#include "psbfem/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace psbfem {

std::vector<int> PolyhedronCell::distinct_nodes() const {
    std::vector<int> out;
    std::set<int> seen;
    for (const auto& f : faces)
        for (int id : f.node_ids)
            if (seen.insert(id).second) out.push_back(id);
    return out;
}

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
        if (issue.cell >= 0) os << "cell " << issue.cell << ": ";
        os << issue.message << "\n";
    }
    return os.str();
}

double face_diameter(const PolygonFace& face, const Mesh& mesh) {
    double d = 0.0;
    for (size_t i = 0; i < face.node_ids.size(); ++i)
        for (size_t j = i + 1; j < face.node_ids.size(); ++j)
            d = std::max(d, (mesh.nodes[face.node_ids[i]] -
                             mesh.nodes[face.node_ids[j]]).norm());
    return d;
}

namespace {

// Newell normal; robust for near-planar polygons of any vertex count.
Vec3 face_normal(const PolygonFace& face, const Mesh& mesh) {
    Vec3 n = Vec3::Zero();
    const auto& ids = face.node_ids;
    for (size_t i = 0; i < ids.size(); ++i) {
        const Vec3& a = mesh.nodes[ids[i]];
        const Vec3& b = mesh.nodes[ids[(i + 1) % ids.size()]];
        n.x() += (a.y() - b.y()) * (a.z() + b.z());
        n.y() += (a.z() - b.z()) * (a.x() + b.x());
        n.z() += (a.x() - b.x()) * (a.y() + b.y());
    }
    return n;
}

bool check_face_geometry(const PolygonFace& face, const Mesh& mesh,
                         std::string& why) {
    const auto& ids = face.node_ids;
    const double diam = face_diameter(face, mesh);
    if (diam <= 0.0) {
        why = "zero-diameter face";
        return false;
    }
    Vec3 n = face_normal(face, mesh);
    if (n.norm() < 1e-14 * diam * diam) {
        why = "degenerate face normal";
        return false;
    }
    n.normalize();
    Vec3 centroid = Vec3::Zero();
    for (int id : ids) centroid += mesh.nodes[id];
    centroid /= static_cast<double>(ids.size());

    double max_dev = 0.0;
    for (int id : ids)
        max_dev = std::max(max_dev, std::abs(n.dot(mesh.nodes[id] - centroid)));
    if (max_dev > kPlanarTol * diam) {
        why = "non-planar face (deviation " + std::to_string(max_dev) + ")";
        return false;
    }

    // Convexity in the face plane: consecutive edge cross products must
    // all point along the face normal.
    for (size_t i = 0; i < ids.size(); ++i) {
        const Vec3& a = mesh.nodes[ids[i]];
        const Vec3& b = mesh.nodes[ids[(i + 1) % ids.size()]];
        const Vec3& c = mesh.nodes[ids[(i + 2) % ids.size()]];
        const double turn = n.dot((b - a).cross(c - b));
        if (turn < -1e-12 * diam * diam) {
            why = "non-convex face polygon";
            return false;
        }
    }
    return true;
}

}  // namespace

ValidationReport validate_mesh(const Mesh& mesh) {
    ValidationReport report;
    const int n_nodes = static_cast<int>(mesh.nodes.size());

    for (int i = 0; i < n_nodes; ++i)
        if (!mesh.nodes[i].allFinite())
            report.issues.push_back({-1, "non-finite coordinates at node " +
                                             std::to_string(i)});

    for (size_t ci = 0; ci < mesh.cells.size(); ++ci) {
        const auto& cell = mesh.cells[ci];
        const int c = static_cast<int>(ci);
        bool indices_ok = true;

        if (cell.faces.empty()) {
            report.issues.push_back({c, "cell has no faces"});
            continue;
        }
        for (size_t fi = 0; fi < cell.faces.size(); ++fi) {
            const auto& ids = cell.faces[fi].node_ids;
            if (ids.size() < 3) {
                report.issues.push_back(
                    {c, "face " + std::to_string(fi) + " has fewer than 3 nodes"});
                indices_ok = false;
                continue;
            }
            std::set<int> uniq(ids.begin(), ids.end());
            if (uniq.size() != ids.size()) {
                report.issues.push_back(
                    {c, "repeated node in face " + std::to_string(fi)});
                indices_ok = false;
            }
            for (int id : ids)
                if (id < 0 || id >= n_nodes) {
                    report.issues.push_back(
                        {c, "node index " + std::to_string(id) +
                                " out of range in face " + std::to_string(fi)});
                    indices_ok = false;
                }
        }
        if (!indices_ok) continue;

        // Closed 2-manifold: every directed edge must be matched by its
        // reverse on exactly one other face.
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& face : cell.faces) {
            const auto& ids = face.node_ids;
            for (size_t i = 0; i < ids.size(); ++i) {
                const int a = ids[i];
                const int b = ids[(i + 1) % ids.size()];
                ++edge_count[{a, b}];
            }
        }
        int unmatched = 0;
        bool duplicated = false;
        for (const auto& [edge, count] : edge_count) {
            if (count > 1) duplicated = true;
            auto rev = edge_count.find({edge.second, edge.first});
            if (rev == edge_count.end()) ++unmatched;
        }
        if (duplicated)
            report.issues.push_back({c, "directed edge used by multiple faces"});
        if (unmatched > 0)
            report.issues.push_back({c, "open surface: " +
                                            std::to_string(unmatched) +
                                            " boundary edges unmatched"});

        bool faces_ok = true;
        for (size_t fi = 0; fi < cell.faces.size(); ++fi) {
            std::string why;
            if (!check_face_geometry(cell.faces[fi], mesh, why)) {
                report.issues.push_back(
                    {c, why + " (face " + std::to_string(fi) + ")"});
                faces_ok = false;
            }
        }
        if (!faces_ok) continue;

        // Star-convexity w.r.t. the vertex centroid: |Jb| must be
        // strictly positive at every quadrature point.
        Vec3 center;
        try {
            center = scaling_center(cell, mesh);
        } catch (const NumericalError& e) {
            report.issues.push_back({c, e.what()});
            continue;
        }
        for (size_t fi = 0; fi < cell.faces.size(); ++fi) {
            const auto& ids = cell.faces[fi].node_ids;
            const int nf = static_cast<int>(ids.size());
            Eigen::Matrix3Xd coords(3, nf);
            for (int i = 0; i < nf; ++i)
                coords.col(i) = mesh.nodes[ids[i]] - center;
            const auto poly = reference_polygon(nf);
            const auto& rule = polygon_quadrature(nf, 2);
            bool negative = false;
            for (const auto& p : rule.points) {
                const auto basis = wachspress_grad(poly, p);
                Eigen::Matrix3d Jb;
                Jb.row(0) = (coords * basis.N).transpose();
                Jb.row(1) = (coords * basis.dN_deta).transpose();
                Jb.row(2) = (coords * basis.dN_dzeta).transpose();
                if (Jb.determinant() <= 0.0) negative = true;
            }
            if (negative)
                report.issues.push_back(
                    {c, "negative Jacobian on face " + std::to_string(fi)});
        }
    }
    return report;
}

Vec3 scaling_center(const PolyhedronCell& cell, const Mesh& mesh) {
    const auto nodes = cell.distinct_nodes();
    if (nodes.size() < 4) throw NumericalError("degenerate cell");

    Vec3 mean = Vec3::Zero();
    for (int id : nodes) mean += mesh.nodes[id];
    mean /= static_cast<double>(nodes.size());

    Eigen::Matrix3Xd centered(3, nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i)
        centered.col(i) = mesh.nodes[nodes[i]] - mean;
    const double diam = centered.colwise().norm().maxCoeff();
    Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
    if (diam <= 0.0 || svd.singularValues()(2) < 1e-12 * diam)
        throw NumericalError("degenerate cell");
    return mean;
}

void compute_scaling_centers(Mesh& mesh) {
    for (auto& cell : mesh.cells) cell.scaling_center = scaling_center(cell, mesh);
}

double cell_volume(const PolyhedronCell& cell, const Mesh& mesh) {
    // Planar faces make the fan of tetrahedra exact; equal to the
    // radial integration of |Jb| over each face.
    const Vec3& sc = cell.scaling_center;
    double volume = 0.0;
    for (const auto& face : cell.faces) {
        const auto& ids = face.node_ids;
        const Vec3& a = mesh.nodes[ids[0]];
        for (size_t i = 1; i + 1 < ids.size(); ++i) {
            const Vec3& b = mesh.nodes[ids[i]];
            const Vec3& c = mesh.nodes[ids[i + 1]];
            volume += (a - sc).dot((b - sc).cross(c - sc)) / 6.0;
        }
    }
    if (volume <= 0.0) throw NumericalError("inverted cell");
    return volume;
}

}  // namespace psbfem
