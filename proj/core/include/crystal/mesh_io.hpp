#pragma once

#include <iosfwd>
#include <string>

#include "crystal/fem.hpp"

namespace crystal {

/// Plain-text mesh format, one record per line, 0-based ids, '#' comments:
///   node <id> <x> <y> <z>
///   hex  <id> <n0> ... <n7>
///   fix  <node> <dof> <value>
///   move <node> <dof> <rate>
///   load <node> <dof> <force>
/// Node and element ids must be dense and in order.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

}  // namespace crystal
