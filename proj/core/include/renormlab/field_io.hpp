#pragma once

#include <filesystem>
#include <vector>

#include "renormlab/grid.hpp"

namespace renormlab {

/// Contents of a `.fld` file: one JSON header line {dim, L, N, components, times}
/// followed by little-endian float64 values laid out as [time][component][node].
struct FieldFile {
  Grid grid{};
  int components = 1;
  std::vector<double> times{0.0};
  std::vector<double> data;
};

FieldFile to_field_file(const GridScalar& f);
FieldFile to_field_file(const GridVector& v);
FieldFile to_field_file(const TimeGridVector& v);

GridScalar scalar_from(const FieldFile& file);
GridVector vector_from(const FieldFile& file, std::size_t time_index = 0);
/// A single-instant file becomes a static field on [0, T].
TimeGridVector time_vector_from(const FieldFile& file, double T);

void write_fld(const std::filesystem::path& path, const FieldFile& file);
FieldFile read_fld(const std::filesystem::path& path);

}  // namespace renormlab
