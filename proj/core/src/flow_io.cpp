#include "renormlab/flow_io.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "json.hpp"
#include "renormlab/error.hpp"

namespace renormlab {

using nlohmann::json;

void write_flo(const std::filesystem::path& path, const FlowEnsemble& e) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  std::vector<double> times(static_cast<std::size_t>(e.steps) + 1);
  for (int s = 0; s <= e.steps; ++s) times[s] = e.time(s);
  const json header = {
      {"format", "renormlab-flo"},
      {"version", 1},
      {"config",
       {{"dt", e.dt},
        {"T", e.path.final_time},
        {"path_steps", e.path.steps},
        {"start_step", e.start_step},
        {"steps", e.steps},
        {"k_count", e.path.k_count},
        {"stream", e.path.stream}}},
      {"grid", {{"dim", e.grid.dim}, {"L", e.grid.length}, {"N", e.grid.points}}},
      {"seeds", "grid_nodes"},
      {"times", times},
      {"arrays",
       json::array({{{"name", "increments"}, {"count", e.path.increments.size()}},
                    {{"name", "positions"}, {"count", e.positions.size()}},
                    {{"name", "jacobians"}, {"count", e.jacobians.size()}},
                    {{"name", "logdets"}, {"count", e.logdets.size()}}})}};
  os << header.dump() << '\n';
  detail::write_doubles_le(os, e.path.increments);
  detail::write_doubles_le(os, e.positions);
  detail::write_doubles_le(os, e.jacobians);
  detail::write_doubles_le(os, e.logdets);
  if (!os) fail(ErrorCode::Io, "write failed for " + path.string());
}

namespace {
json read_header(std::istream& is, const std::filesystem::path& path) {
  std::string line;
  std::getline(is, line);
  try {
    json h = json::parse(line);
    if (h.at("format") != "renormlab-flo") fail(ErrorCode::Io, path.string() + " is not a .flo file");
    return h;
  } catch (const json::exception& ex) {
    fail(ErrorCode::Io, "malformed .flo header in " + path.string() + ": " + ex.what());
  }
}
}  // namespace

FlowEnsemble read_flo(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path.string());
  const json h = read_header(is, path);
  FlowEnsemble e;
  try {
    const auto& c = h.at("config");
    const auto& g = h.at("grid");
    e.grid = build_grid(g.at("dim").get<int>(), g.at("L").get<double>(), g.at("N").get<int>());
    e.dt = c.at("dt").get<double>();
    e.start_step = c.at("start_step").get<int>();
    e.steps = c.at("steps").get<int>();
    e.path.final_time = c.at("T").get<double>();
    e.path.dt = e.dt;
    e.path.steps = c.at("path_steps").get<int>();
    e.path.k_count = c.at("k_count").get<int>();
    e.path.stream = c.at("stream").get<std::uint64_t>();
    const auto& arrays = h.at("arrays");
    e.path.increments.resize(arrays.at(0).at("count").get<std::size_t>());
    e.positions.resize(arrays.at(1).at("count").get<std::size_t>());
    e.jacobians.resize(arrays.at(2).at("count").get<std::size_t>());
    e.logdets.resize(arrays.at(3).at("count").get<std::size_t>());
  } catch (const json::exception& ex) {
    fail(ErrorCode::Io, "incomplete .flo header in " + path.string() + ": " + ex.what());
  }
  for (auto* v : {&e.path.increments, &e.positions, &e.jacobians, &e.logdets})
    if (!detail::read_doubles_le(is, *v)) fail(ErrorCode::Io, "truncated data in " + path.string());
  return e;
}

std::string flo_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path.string());
  json h = read_header(is, path);
  const auto steps = h["times"].size();
  if (steps > 6) {
    json t = json::array({h["times"][0], h["times"][1], "...", h["times"][steps - 1]});
    h["times"] = t;
  }
  return h.dump(2);
}

}  // namespace renormlab
