// renormlab command-line front end.
//   renormlab run <config.json>       run one experiment, write artifacts under output_dir
//   renormlab accept <config.json>    run the acceptance suite
//   renormlab inspect <file.fld|.flo> print a field or flow file summary
// Exit codes: 0 ok, 1 check failure or runtime error, 2 invalid config or input.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "renormlab/acceptance.hpp"
#include "renormlab/config.hpp"
#include "renormlab/error.hpp"
#include "renormlab/experiments.hpp"
#include "renormlab/field_io.hpp"
#include "renormlab/flow_io.hpp"

namespace {

using namespace renormlab;

constexpr int kOk = 0;
constexpr int kCheckFail = 1;
constexpr int kConfigError = 2;

int report_error(const Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  return e.code() == ErrorCode::Config ? kConfigError : kCheckFail;
}

int cmd_run(const std::string& path) {
  const ExperimentConfig config = load_config(path);
  const ExperimentOutput out = run_experiment(config);
  for (const auto& f : out.files) std::cout << f.string() << '\n';
  return out.checks_passed ? kOk : kCheckFail;
}

int cmd_accept(const std::string& path, const std::string& flip_term, bool no_rerun) {
  ExperimentConfig config = load_config(path);
  if (!flip_term.empty()) config.flip_term = flip_term;
  if (no_rerun) config.determinism_rerun = false;
  const RunReport report = acceptance_suite(config, [](const CriterionSummary& s) {
    std::cout << format_criterion(s) << std::endl;
  });
  std::filesystem::create_directories(config.output_dir);
  const auto csv = config.output_dir / "acceptance.csv";
  std::ofstream os(csv, std::ios::binary);
  write_report_csv(os, report);
  std::cout << report.environment() << '\n'
            << (report.passed() ? "ACCEPTED" : "REJECTED") << ": " << report.criteria.size() << " criteria, "
            << report.check_count() << " checks; report " << csv.string() << '\n';
  return report.passed() ? kOk : kCheckFail;
}

void print_fld(const std::filesystem::path& path) {
  const FieldFile f = read_fld(path);
  std::printf("field file %s\n", path.string().c_str());
  std::printf("  grid: dim=%d L=%.17g N=%d\n", f.grid.dim, f.grid.length, f.grid.points);
  std::printf("  components: %d, instants: %zu (t0=%.6g, t_end=%.6g)\n", f.components, f.times.size(), f.times.front(),
              f.times.back());
  const std::size_t nodes = f.grid.size();
  for (std::size_t t : {std::size_t{0}, f.times.size() - 1}) {
    for (int c = 0; c < f.components; ++c) {
      const double* v = f.data.data() + (t * static_cast<std::size_t>(f.components) + static_cast<std::size_t>(c)) * nodes;
      double lo = v[0], hi = v[0], sum = 0.0;
      for (std::size_t k = 0; k < nodes; ++k) {
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
        sum += v[k];
      }
      std::printf("  t=%-10.6g comp %d: min=% .6e max=% .6e integral=% .6e\n", f.times[t], c, lo, hi,
                  sum * f.grid.cell_volume());
    }
    if (f.times.size() == 1) break;
  }
}

void print_flo(const std::filesystem::path& path) {
  std::printf("flow file %s\n%s\n", path.string().c_str(), flo_header(path).c_str());
  const FlowEnsemble e = read_flo(path);
  std::printf("  nodes=%zu steps=%d dt=%.6g wiener=%d jacobians=%s logdets=%s\n", e.nodes(), e.steps, e.dt,
              e.path.k_count, e.jacobians.empty() ? "no" : "yes", e.logdets.empty() ? "no" : "yes");
}

int cmd_inspect(const std::string& file) {
  const std::filesystem::path path = file;
  if (!std::filesystem::exists(path)) fail(ErrorCode::Config, "no such file: " + file);
  const std::string ext = path.extension().string();
  if (ext == ".fld") {
    print_fld(path);
  } else if (ext == ".flo") {
    print_flo(path);
  } else {
    fail(ErrorCode::Config, "inspect expects a .fld or .flo file, got '" + file + "'");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"renormlab: stochastic transport and renormalization numerics"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", run_config, "Experiment config (JSON)")->required();

  std::string accept_config, flip_term;
  bool no_rerun = false;
  auto* accept = app.add_subcommand("accept", "Run the acceptance suite");
  accept->add_option("config", accept_config, "Config supplying master_seed, threads and output_dir")->required();
  accept->add_option("--flip-term", flip_term, "Debug: reverse the sign of one renormalized ledger term");
  accept->add_flag("--no-rerun", no_rerun, "Skip the determinism rerun at 1 and 8 workers");

  std::string inspect_file;
  auto* inspect = app.add_subcommand("inspect", "Summarize a .fld or .flo file");
  inspect->add_option("file", inspect_file, "Field (.fld) or flow (.flo) file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_config);
    if (*accept) return cmd_accept(accept_config, flip_term, no_rerun);
    if (*inspect) return cmd_inspect(inspect_file);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFail;
  }
  return kOk;
}
