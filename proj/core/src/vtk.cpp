#include "pointflow/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "pointflow/errors.hpp"

namespace pointflow {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace

void write_vtk_mesh(std::ostream& out, const TriMesh& mesh) {
  out << "# vtk DataFile Version 3.0\npointflow\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& x : mesh.nodes()) out << num(x.x()) << ' ' << num(x.y()) << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int k = 0; k < mesh.num_triangles(); ++k) out << "5\n";
}

void write_vtk_field(std::ostream& out, const FlowField& field, const char* name) {
  const auto& mesh = field.space->mesh();
  write_vtk_mesh(out, mesh);
  out << "POINT_DATA " << mesh.num_nodes() << '\n';
  out << "VECTORS " << name << " double\n";
  for (int s = 0; s < mesh.num_nodes(); ++s) {
    out << num(field.velocity[TaylorHoodSpace::vdof(s, 0)]) << ' ' << num(field.velocity[TaylorHoodSpace::vdof(s, 1)])
        << " 0\n";
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int s = 0; s < mesh.num_nodes(); ++s) out << num(field.pressure[s]) << '\n';
}

void write_vtk_field(const std::filesystem::path& path, const FlowField& field, const char* name) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_vtk_field(out, field, name);
}

}  // namespace pointflow
