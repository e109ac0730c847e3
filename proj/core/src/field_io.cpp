#include "renormlab/field_io.hpp"

#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "json.hpp"
#include "renormlab/error.hpp"

namespace renormlab {

using nlohmann::json;

FieldFile to_field_file(const GridScalar& f) { return {f.grid(), 1, {0.0}, f.values()}; }

FieldFile to_field_file(const GridVector& v) {
  FieldFile out{v.grid(), v.dim(), {0.0}, {}};
  for (int d = 0; d < v.dim(); ++d) out.data.insert(out.data.end(), v[d].values().begin(), v[d].values().end());
  return out;
}

FieldFile to_field_file(const TimeGridVector& v) {
  FieldFile out{v.grid(), v.grid().dim, v.times(), {}};
  for (const auto& slice : v.slices())
    for (int d = 0; d < slice.dim(); ++d) out.data.insert(out.data.end(), slice[d].values().begin(), slice[d].values().end());
  return out;
}

GridScalar scalar_from(const FieldFile& file) {
  if (file.components != 1) fail(ErrorCode::Io, "field file holds a vector, not a scalar");
  const auto n = file.grid.size();
  return GridScalar(file.grid, std::vector<double>(file.data.begin(), file.data.begin() + static_cast<std::ptrdiff_t>(n)));
}

GridVector vector_from(const FieldFile& file, std::size_t time_index) {
  if (file.components != file.grid.dim) fail(ErrorCode::Io, "component count does not match grid dimension");
  if (time_index >= file.times.size()) fail(ErrorCode::Io, "time index out of range");
  const auto n = file.grid.size();
  std::vector<GridScalar> comps;
  for (int d = 0; d < file.components; ++d) {
    const auto off = static_cast<std::ptrdiff_t>((time_index * static_cast<std::size_t>(file.components) + static_cast<std::size_t>(d)) * n);
    comps.emplace_back(file.grid, std::vector<double>(file.data.begin() + off, file.data.begin() + off + static_cast<std::ptrdiff_t>(n)));
  }
  return GridVector(file.grid, std::move(comps));
}

TimeGridVector time_vector_from(const FieldFile& file, double T) {
  if (file.times.size() == 1) return TimeGridVector::constant(vector_from(file, 0), T);
  std::vector<GridVector> slices;
  for (std::size_t k = 0; k < file.times.size(); ++k) slices.push_back(vector_from(file, k));
  return TimeGridVector(file.times, std::move(slices));
}

void write_fld(const std::filesystem::path& path, const FieldFile& file) {
  const std::size_t expected = file.grid.size() * static_cast<std::size_t>(file.components) * file.times.size();
  if (file.data.size() != expected) fail(ErrorCode::Io, "field data size does not match header");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  const json header = {{"dim", file.grid.dim},
                       {"L", file.grid.length},
                       {"N", file.grid.points},
                       {"components", file.components},
                       {"times", file.times}};
  os << header.dump() << '\n';
  detail::write_doubles_le(os, file.data);
  if (!os) fail(ErrorCode::Io, "write failed for " + path.string());
}

FieldFile read_fld(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  FieldFile out;
  try {
    const json header = json::parse(line);
    out.grid = build_grid(header.at("dim").get<int>(), header.at("L").get<double>(), header.at("N").get<int>());
    out.components = header.at("components").get<int>();
    out.times = header.at("times").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, "malformed .fld header in " + path.string() + ": " + e.what());
  }
  if (out.components < 1 || out.times.empty()) fail(ErrorCode::Io, "invalid .fld header in " + path.string());
  out.data.resize(out.grid.size() * static_cast<std::size_t>(out.components) * out.times.size());
  if (!detail::read_doubles_le(is, out.data)) fail(ErrorCode::Io, "truncated data in " + path.string());
  return out;
}

}  // namespace renormlab
