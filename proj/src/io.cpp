#include "psbfem/io.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace psbfem {

using nlohmann::json;

namespace {

json parse_json(std::istream& in, const std::string& origin) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(origin + ": " + e.what());
    }
}

std::ifstream open_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

}  // namespace

Mesh parse_mesh(std::istream& in, const std::string& origin) {
    const json doc = parse_json(in, origin);
    Mesh mesh;
    try {
        for (const auto& coords : doc.at("nodes")) {
            if (coords.size() != 3)
                throw InputError(origin + ": node needs 3 coordinates");
            mesh.nodes.emplace_back(coords[0].get<double>(),
                                    coords[1].get<double>(),
                                    coords[2].get<double>());
        }
        for (const auto& cell_doc : doc.at("cells")) {
            PolyhedronCell cell;
            for (const auto& face_doc : cell_doc) {
                PolygonFace face;
                for (const auto& id : face_doc)
                    face.node_ids.push_back(id.get<int>());
                cell.faces.push_back(std::move(face));
            }
            mesh.cells.push_back(std::move(cell));
        }
        if (doc.contains("node_sets"))
            for (const auto& [name, ids] : doc.at("node_sets").items())
                for (const auto& id : ids)
                    mesh.node_sets[name].push_back(id.get<int>());
        if (doc.contains("face_sets"))
            for (const auto& [name, refs] : doc.at("face_sets").items())
                for (const auto& ref : refs) {
                    if (ref.size() != 2)
                        throw InputError(origin +
                                         ": face reference needs "
                                         "[cell, local_face]");
                    mesh.face_sets[name].emplace_back(ref[0].get<int>(),
                                                      ref[1].get<int>());
                }
    } catch (const json::exception& e) {
        throw InputError(origin + ": " + e.what());
    }

    const auto report = validate_mesh(mesh);
    if (!report.ok())
        throw InputError(origin + ": mesh validation failed\n" + report.str());
    compute_scaling_centers(mesh);
    return mesh;
}

Mesh load_mesh(const std::string& path) {
    auto in = open_file(path);
    return parse_mesh(in, path);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    json doc;
    doc["nodes"] = json::array();
    for (const auto& n : mesh.nodes)
        doc["nodes"].push_back({n.x(), n.y(), n.z()});
    doc["cells"] = json::array();
    for (const auto& cell : mesh.cells) {
        json faces = json::array();
        for (const auto& face : cell.faces) faces.push_back(face.node_ids);
        doc["cells"].push_back(faces);
    }
    if (!mesh.node_sets.empty()) {
        for (const auto& [name, ids] : mesh.node_sets)
            doc["node_sets"][name] = ids;
    }
    if (!mesh.face_sets.empty()) {
        for (const auto& [name, refs] : mesh.face_sets) {
            json list = json::array();
            for (const auto& [cell, face] : refs)
                list.push_back({cell, face});
            doc["face_sets"][name] = list;
        }
    }
    out << std::setprecision(17) << doc.dump(1) << "\n";
}

void save_mesh(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_mesh(out, mesh);
}

namespace {

TimeSeries parse_time_series(const json& value, const std::string& origin) {
    TimeSeries series;
    if (value.is_number()) {
        series.points.emplace_back(0.0, value.get<double>());
        return series;
    }
    if (value.is_array()) {
        for (const auto& pair : value) {
            if (!pair.is_array() || pair.size() != 2)
                throw InputError(origin + ": time series entries are [t, value]");
            series.points.emplace_back(pair[0].get<double>(),
                                       pair[1].get<double>());
        }
        if (series.points.empty())
            throw InputError(origin + ": empty time series");
        for (size_t i = 1; i < series.points.size(); ++i)
            if (series.points[i].first <= series.points[i - 1].first)
                throw InputError(origin + ": time series must be increasing");
        return series;
    }
    throw InputError(origin + ": expected number or [t, value] list");
}

}  // namespace

SolverConfig parse_config(std::istream& in, const Mesh& mesh,
                          const std::string& origin) {
    const json doc = parse_json(in, origin);
    SolverConfig cfg;
    try {
        const std::string analysis = doc.at("analysis").get<std::string>();
        if (analysis == "transient")
            cfg.transient = true;
        else if (analysis != "steady")
            throw InputError(origin + ": analysis must be steady or transient");

        if (doc.contains("materials")) {
            cfg.materials.materials.clear();
            std::map<std::string, int> index;
            for (const auto& [name, m] : doc.at("materials").items()) {
                Material mat;
                if (m.contains("k")) {
                    mat.kx = mat.ky = mat.kz = m.at("k").get<double>();
                } else {
                    mat.kx = m.value("kx", 1.0);
                    mat.ky = m.value("ky", 1.0);
                    mat.kz = m.value("kz", 1.0);
                }
                mat.rho = m.value("rho", 1.0);
                mat.c = m.value("c", 1.0);
                if (mat.kx <= 0 || mat.ky <= 0 || mat.kz <= 0)
                    throw InputError(origin + ": conductivities must be > 0");
                index[name] = static_cast<int>(cfg.materials.materials.size());
                cfg.materials.materials.push_back(mat);
            }
            if (doc.contains("cell_materials")) {
                const auto& cm = doc.at("cell_materials");
                if (cm.is_string()) {
                    // single material for all cells: move it to slot 0
                    const int idx = index.at(cm.get<std::string>());
                    cfg.materials.materials = {cfg.materials.materials[idx]};
                } else {
                    if (cm.size() != mesh.cells.size())
                        throw InputError(origin +
                                         ": cell_materials length must match "
                                         "cell count");
                    for (const auto& name : cm)
                        cfg.materials.cell_index.push_back(
                            index.at(name.get<std::string>()));
                }
            } else if (cfg.materials.materials.size() != 1) {
                throw InputError(origin +
                                 ": cell_materials required with multiple "
                                 "materials");
            }
        }

        if (doc.contains("boundary_conditions")) {
            const auto& bc = doc.at("boundary_conditions");
            for (const auto& d : bc.value("dirichlet", json::array())) {
                const std::string set = d.at("node_set").get<std::string>();
                if (!mesh.node_sets.count(set))
                    throw InputError(origin + ": unknown node set '" + set + "'");
                cfg.bc.dirichlet.push_back(
                    {set, parse_time_series(d.at("value"), origin)});
            }
            for (const auto& f : bc.value("flux", json::array())) {
                const std::string set = f.at("face_set").get<std::string>();
                if (!mesh.face_sets.count(set))
                    throw InputError(origin + ": unknown face set '" + set + "'");
                cfg.bc.flux.push_back(
                    {set, parse_time_series(f.at("q"), origin)});
            }
            for (const auto& c : bc.value("convection", json::array())) {
                const std::string set = c.at("face_set").get<std::string>();
                if (!mesh.face_sets.count(set))
                    throw InputError(origin + ": unknown face set '" + set + "'");
                ConvectionBC conv;
                conv.face_set = set;
                conv.h = c.at("h").get<double>();
                if (conv.h < 0)
                    throw InputError(origin + ": h must be >= 0");
                conv.t_inf = parse_time_series(c.at("t_inf"), origin);
                cfg.bc.convection.push_back(std::move(conv));
            }
        }

        if (cfg.transient) {
            const auto& tr = doc.at("transient");
            cfg.transient_cfg.dt = tr.at("dt").get<double>();
            cfg.transient_cfg.t_end = tr.at("t_end").get<double>();
            if (cfg.transient_cfg.dt <= 0 ||
                cfg.transient_cfg.t_end < cfg.transient_cfg.dt)
                throw InputError(origin + ": need dt > 0 and t_end >= dt");
            cfg.transient_cfg.initial_value = tr.value("initial", 0.0);
        } else if (doc.contains("transient")) {
            throw InputError(origin +
                             ": transient block given for steady analysis");
        }

        cfg.quadrature_degree = doc.value("quadrature_degree", 4);
        cfg.use_parent_cache = doc.value("parent_cache", true);
        if (doc.contains("output")) {
            cfg.output_stride = doc.at("output").value("stride", 1);
            cfg.output_path = doc.at("output").value("path", "out");
        }
        cfg.transient_cfg.record_stride = cfg.output_stride;
    } catch (const json::exception& e) {
        throw InputError(origin + ": " + e.what());
    }
    return cfg;
}

SolverConfig load_config(const std::string& path, const Mesh& mesh) {
    auto in = open_file(path);
    return parse_config(in, mesh, path);
}

void write_vtk(std::ostream& out, const Mesh& mesh,
               const Eigen::VectorXd& temperature) {
    out << "# vtk DataFile Version 3.0\n";
    out << "psbfem temperature field\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.nodes.size() << " double\n";
    out << std::setprecision(17);
    for (const auto& n : mesh.nodes)
        out << n.x() << " " << n.y() << " " << n.z() << "\n";

    // polyhedron face streams: [length, nFaces, n0, ids..., n1, ids...]
    std::size_t total = 0;
    for (const auto& cell : mesh.cells) {
        std::size_t entry = 1;  // nFaces
        for (const auto& face : cell.faces) entry += 1 + face.node_ids.size();
        total += entry + 1;  // + leading length
    }
    out << "CELLS " << mesh.cells.size() << " " << total << "\n";
    for (const auto& cell : mesh.cells) {
        std::size_t entry = 1;
        for (const auto& face : cell.faces) entry += 1 + face.node_ids.size();
        out << entry << " " << cell.faces.size();
        for (const auto& face : cell.faces) {
            out << " " << face.node_ids.size();
            for (int id : face.node_ids) out << " " << id;
        }
        out << "\n";
    }
    out << "CELL_TYPES " << mesh.cells.size() << "\n";
    for (size_t i = 0; i < mesh.cells.size(); ++i) out << "42\n";

    out << "POINT_DATA " << mesh.nodes.size() << "\n";
    out << "SCALARS Temperature double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < temperature.size(); ++i)
        out << temperature(i) << "\n";
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const Eigen::VectorXd& temperature) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_vtk(out, mesh, temperature);
}

std::vector<std::string> write_vtk_series(const std::string& base,
                                          const Mesh& mesh,
                                          const FieldResult& result) {
    std::vector<std::string> paths;
    for (size_t i = 0; i < result.fields.size(); ++i) {
        std::ostringstream name;
        name << base << "_" << std::setw(4) << std::setfill('0') << i
             << ".vtk";
        write_vtk(name.str(), mesh, result.fields[i]);
        paths.push_back(name.str());
    }
    return paths;
}

}  // namespace psbfem
