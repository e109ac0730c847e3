#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "renormlab/config.hpp"

namespace renormlab {

/// One measured quantity of a criterion. Informational checks are reported but never fail a run.
struct CheckResult {
  int criterion = 0;
  std::string name;
  double measured = 0.0;
  std::string relation;  ///< "<=", ">=", "<", ">", "=="
  double threshold = 0.0;
  bool pass = false;
  bool informational = false;
};

struct CriterionSummary {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<CheckResult> checks;
};

struct RunReport {
  std::vector<CriterionSummary> criteria;
  std::string version;
  std::uint64_t master_seed = 0;
  std::string flip_term;
  int workers = 1;

  bool passed() const;
  std::size_t check_count() const;
  /// "version=... seed=... workers=..." (no timestamps, so reports are reproducible).
  std::string environment() const;
};

const std::string& renormlab_version();

/// Criterion titles in order (15 entries).
const std::vector<std::string>& acceptance_titles();

/// Runs every acceptance criterion with parameters pinned in the suite; the config supplies master_seed,
/// the worker count, the debug flip_term and whether criterion 15 reruns the suite at 1 and 8 workers.
/// `on_criterion` is called as each criterion finishes.
RunReport acceptance_suite(const ExperimentConfig& config,
                           const std::function<void(const CriterionSummary&)>& on_criterion = {});

/// Runs a single criterion (1-14) at the current worker count.
CriterionSummary run_criterion(int id, std::uint64_t master_seed, const std::string& flip_term = "");

/// "[PASS] 6 push-forward weak solution: name=value <= threshold; ..."
std::string format_criterion(const CriterionSummary& summary);

/// CSV: criterion,check,measured,relation,threshold,pass,informational.
void write_report_csv(std::ostream& os, const RunReport& report);

}  // namespace renormlab
