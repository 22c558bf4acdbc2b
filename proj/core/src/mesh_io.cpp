#include "crystal/mesh_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace crystal {

namespace {

void check_node(const Mesh& mesh, int node, int line_no) {
  if (node < 0 || node >= static_cast<int>(mesh.nodes.size())) {
    throw ConfigError("mesh line " + std::to_string(line_no) +
                      ": node id out of range");
  }
}

void check_dof(int dof, int line_no) {
  if (dof < 0 || dof > 2) {
    throw ConfigError("mesh line " + std::to_string(line_no) +
                      ": dof must be 0, 1 or 2");
  }
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;

    if (kind == "node") {
      int id;
      double x, y, z;
      if (!(ls >> id >> x >> y >> z) ||
          id != static_cast<int>(mesh.nodes.size())) {
        throw ConfigError("mesh line " + std::to_string(line_no) +
                          ": bad node record (ids must be dense, in order)");
      }
      mesh.nodes.emplace_back(x, y, z);
    } else if (kind == "hex") {
      int id;
      Hex8EAS el;
      if (!(ls >> id) || id != static_cast<int>(mesh.elements.size())) {
        throw ConfigError("mesh line " + std::to_string(line_no) +
                          ": bad hex record (ids must be dense, in order)");
      }
      for (int a = 0; a < 8; ++a) {
        if (!(ls >> el.nodes[a])) {
          throw ConfigError("mesh line " + std::to_string(line_no) +
                            ": hex needs 8 node ids");
        }
        check_node(mesh, el.nodes[a], line_no);
      }
      mesh.elements.push_back(el);
    } else if (kind == "fix" || kind == "move" || kind == "load") {
      int node, dof;
      double value;
      if (!(ls >> node >> dof >> value)) {
        throw ConfigError("mesh line " + std::to_string(line_no) +
                          ": bad " + kind + " record");
      }
      check_node(mesh, node, line_no);
      check_dof(dof, line_no);
      const Constraint c{node, dof, value};
      if (kind == "fix") {
        mesh.fixed.push_back(c);
      } else if (kind == "move") {
        mesh.moving.push_back(c);
      } else {
        mesh.loads.push_back(c);
      }
    } else {
      throw ConfigError("mesh line " + std::to_string(line_no) +
                        ": unknown record '" + kind + "'");
    }
  }
  if (mesh.nodes.empty() || mesh.elements.empty()) {
    throw ConfigError("mesh: needs at least one node and one element");
  }
  return mesh;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  return read_mesh(in);
}

}  // namespace crystal
