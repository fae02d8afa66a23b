#pragma once

#include <filesystem>
#include <ostream>

#include "pointflow/taylor_hood.hpp"

namespace pointflow {

/// Legacy ASCII VTK unstructured grid with triangle cells.
void write_vtk_mesh(std::ostream& out, const TriMesh& mesh);

/// Same grid plus point data: velocity (vector) and pressure (scalar) at the
/// mesh nodes.
void write_vtk_field(std::ostream& out, const FlowField& field, const char* name = "velocity");

void write_vtk_field(const std::filesystem::path& path, const FlowField& field, const char* name = "velocity");

}  // namespace pointflow
