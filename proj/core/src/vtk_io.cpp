#include "vvflow/vtk_io.hpp"

#include <cstdio>
#include <fstream>

#include "vvflow/errors.hpp"

namespace vvflow {

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  return os;
}

void write_header_and_mesh(std::ostream& os, const Mesh& m) {
  char buf[128];
  os << "# vtk DataFile Version 3.0\n";
  os << "vvflow output\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.n_vertices() << " double\n";
  for (int v = 0; v < m.n_vertices(); ++v) {
    const auto& p = m.vertex(v);
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    os << buf;
  }
  os << "CELLS " << m.n_cells() << " " << 5 * m.n_cells() << "\n";
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto& cell = m.cell(c);
    os << "4 " << cell[0] << " " << cell[1] << " " << cell[2] << " " << cell[3] << "\n";
  }
  os << "CELL_TYPES " << m.n_cells() << "\n";
  for (int c = 0; c < m.n_cells(); ++c) os << "10\n";
}

}  // namespace

void write_vtk_mesh(const std::string& path, const Mesh& m) {
  auto os = open_or_throw(path);
  write_header_and_mesh(os, m);
}

void write_vtk_fields(const std::string& path, const Mesh& m,
                      const std::vector<NamedField>& fields) {
  auto os = open_or_throw(path);
  write_header_and_mesh(os, m);
  os << "POINT_DATA " << m.n_vertices() << "\n";
  char buf[128];
  for (const auto& nf : fields) {
    const Field& f = *nf.field;
    if (f.space->is_vector()) {
      os << "VECTORS " << nf.name << " double\n";
      for (int v = 0; v < m.n_vertices(); ++v) {
        const Eigen::Vector3d val = evaluate_vector(f, m.vertex(v));
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", val.x(), val.y(), val.z());
        os << buf;
      }
    } else {
      os << "SCALARS " << nf.name << " double 1\n";
      os << "LOOKUP_TABLE default\n";
      for (int v = 0; v < m.n_vertices(); ++v) {
        std::snprintf(buf, sizeof buf, "%.17g\n", evaluate_scalar(f, m.vertex(v)));
        os << buf;
      }
    }
  }
}

void write_coefficients_csv(const std::string& path, const Field& f) {
  auto os = open_or_throw(path);
  os << "dof,value\n";
  char buf[64];
  for (int i = 0; i < f.coeffs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", i, f.coeffs[i]);
    os << buf;
  }
}

}  // namespace vvflow
