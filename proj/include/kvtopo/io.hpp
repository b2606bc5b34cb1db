#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kvtopo/kv.hpp"
#include "kvtopo/mesh.hpp"

namespace kvtopo {

/// CSV `node_index,x,y,value`, preceded by a `# header` line when given.
void write_field_csv(const Mesh& mesh, const Eigen::VectorXd& values, std::ostream& out,
                     const std::string& header = {});

struct VtkPointField {
    std::string name;
    Eigen::VectorXd values;  // one per node
};
struct VtkCellField {
    std::string name;
    std::vector<double> values;  // one per triangle
};

/// Legacy ASCII unstructured grid. `title` lands on the (single-line) header.
void write_vtk(const Mesh& mesh, std::ostream& out, const std::string& title,
               const std::vector<VtkPointField>& point_data, const std::vector<VtkCellField>& cell_data = {});

/// {K_value, min_deltaK, argmin_node, argmin_xy} plus an optional metadata object.
std::string topgrad_summary_json(const TopGradResult& tg, const std::string& meta_json = {});

/// %.17g formatting, the round-trip precision used by every text output.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace kvtopo
