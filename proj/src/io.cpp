#include "kvtopo/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "kvtopo/errors.hpp"

namespace kvtopo {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(const Mesh& mesh, const Eigen::VectorXd& values, std::ostream& out, const std::string& header) {
    if (values.size() != mesh.num_nodes()) throw Error("field length does not match the mesh node count");
    if (!header.empty()) out << "# " << header << '\n';
    out << "node_index,x,y,value\n";
    for (int v = 0; v < mesh.num_nodes(); ++v)
        out << v << ',' << format_double(mesh.nodes[v].x()) << ',' << format_double(mesh.nodes[v].y()) << ','
            << format_double(values[v]) << '\n';
}

void write_vtk(const Mesh& mesh, std::ostream& out, const std::string& title,
               const std::vector<VtkPointField>& point_data, const std::vector<VtkCellField>& cell_data) {
    std::string t = title.substr(0, 255);
    for (char& c : t)
        if (c == '\n' || c == '\r') c = ' ';
    out << "# vtk DataFile Version 3.0\n" << t << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_nodes() << " double\n";
    for (const Vec2& p : mesh.nodes) out << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
    out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& tri : mesh.triangles) out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    out << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (int t2 = 0; t2 < mesh.num_triangles(); ++t2) out << "5\n";
    if (!point_data.empty()) {
        out << "POINT_DATA " << mesh.num_nodes() << '\n';
        for (const auto& f : point_data) {
            if (f.values.size() != mesh.num_nodes()) throw Error("VTK point field " + f.name + " has wrong length");
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (Eigen::Index i = 0; i < f.values.size(); ++i) out << format_double(f.values[i]) << '\n';
        }
    }
    if (!cell_data.empty()) {
        out << "CELL_DATA " << mesh.num_triangles() << '\n';
        for (const auto& f : cell_data) {
            if (static_cast<int>(f.values.size()) != mesh.num_triangles())
                throw Error("VTK cell field " + f.name + " has wrong length");
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) out << format_double(v) << '\n';
        }
    }
}

std::string topgrad_summary_json(const TopGradResult& tg, const std::string& meta_json) {
    nlohmann::ordered_json j;
    if (!meta_json.empty()) j["meta"] = nlohmann::ordered_json::parse(meta_json);
    j["K_value"] = tg.K_value;
    const int a = tg.argmin_node();
    if (a >= 0) {
        j["min_deltaK"] = tg.deltaK.values[a];
        j["argmin_node"] = a;
        j["argmin_xy"] = {tg.pair.mesh->nodes[a].x(), tg.pair.mesh->nodes[a].y()};
    } else {
        j["min_deltaK"] = nullptr;
        j["argmin_node"] = nullptr;
        j["argmin_xy"] = nullptr;
    }
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace kvtopo
