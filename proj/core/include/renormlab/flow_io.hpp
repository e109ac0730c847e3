#pragma once

#include <filesystem>
#include <string>

#include "renormlab/flow.hpp"

namespace renormlab {

/// `.flo` files: one JSON header line (config, grid, seeds, times, array table) followed by the
/// little-endian float64 arrays increments, positions, jacobians, logdets in that order.
void write_flo(const std::filesystem::path& path, const FlowEnsemble& ensemble);
FlowEnsemble read_flo(const std::filesystem::path& path);

/// Header of a `.flo` file as pretty-printed JSON.
std::string flo_header(const std::filesystem::path& path);

}  // namespace renormlab
