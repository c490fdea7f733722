// VTK legacy ASCII output (UNSTRUCTURED_GRID, linear tets) and CSV dumps.
#pragma once

#include <string>
#include <vector>

#include "vvflow/fespace.hpp"

namespace vvflow {

struct NamedField {
  std::string name;
  const Field* field;
};

// Mesh-only export, cell type 10.
void write_vtk_mesh(const std::string& path, const Mesh& m);

// Mesh plus point data: fields are sampled at mesh vertices (scalar fields
// as SCALARS, vector fields as VECTORS).
void write_vtk_fields(const std::string& path, const Mesh& m, const std::vector<NamedField>& fields);

// Coefficient dump, one line per dof: index,value.
void write_coefficients_csv(const std::string& path, const Field& f);

}  // namespace vvflow
