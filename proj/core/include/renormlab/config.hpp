#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "renormlab/grid.hpp"
#include "renormlab/renormalizer.hpp"

namespace renormlab {

enum class ExperimentTag {
  CommutatorStudy,
  ParabolicDecay,
  FlowConservation,
  RenormResidual,
  ZvonkinRelaxation,
  AcceptanceAll,
};

std::string to_string(ExperimentTag tag);
const std::vector<std::string>& experiment_tag_names();

/// A coefficient given either by preset name and amplitude or by `.fld` files.
struct FieldSource {
  std::string preset;
  double amplitude = 1.0;
  std::vector<std::filesystem::path> files;  ///< resolved against the config file's directory

  bool from_file() const { return !files.empty(); }
};

struct ExperimentConfig {
  ExperimentTag experiment = ExperimentTag::AcceptanceAll;

  int dim = 1;
  double length = 2.0 * std::numbers::pi;
  int points = 64;

  double final_time = 0.5;
  double dt = 1e-3;

  FieldSource drift{"trig", 1.0, {}};
  FieldSource diffusion{"trig", 1.0, {}};
  FieldSource initial{"wave", 1.0, {}};

  std::vector<double> lambdas{4.0, 16.0, 64.0};
  std::vector<double> epsilons;  ///< empty: L/8, L/16, L/32
  double p = 8.0;
  double q = 4.0;
  double r = 2.0;
  int mc_members = 16;
  std::uint64_t master_seed = 20240601;

  RenormalizerTag renormalizer = RenormalizerTag::Tanh;
  double renormalizer_parameter = 1.0;

  int threads = 1;
  std::filesystem::path output_dir = "renormlab_out";

  /// Debug: ledger term whose sign the renormalized residual reverses.
  std::string flip_term;
  /// Acceptance: rerun the suite at 1 and 8 workers and compare every measured value.
  bool determinism_rerun = true;

  Grid grid() const;
  std::vector<double> epsilon_list() const;
  int steps() const;
};

/// Parses JSON text. `base_dir` resolves relative `file:` references. Every problem found is listed in
/// the message of the thrown Error (code Config); missing referenced files are reported the same way.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Config as canonical JSON (the acceptance report embeds it).
std::string config_json(const ExperimentConfig& config);

TimeGridVector resolve_drift(const ExperimentConfig& config, const Grid& grid);
std::vector<TimeGridVector> resolve_diffusion(const ExperimentConfig& config, const Grid& grid);
GridScalar resolve_initial(const ExperimentConfig& config, const Grid& grid);

/// Worker-pool size: RENORMLAB_THREADS when set to a positive integer, else the config value.
int effective_threads(const ExperimentConfig& config);

}  // namespace renormlab
