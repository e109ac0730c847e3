#pragma once

#include <filesystem>
#include <vector>

#include "renormlab/config.hpp"

namespace renormlab {

struct ExperimentOutput {
  std::vector<std::filesystem::path> files;  ///< artifacts written, in creation order
  bool checks_passed = true;                 ///< false only when acceptance_all has a failing criterion
};

/// Runs the configured experiment and writes its CSV and field files under config.output_dir.
/// Module errors are rethrown with the experiment name prepended.
ExperimentOutput run_experiment(const ExperimentConfig& config);

}  // namespace renormlab
