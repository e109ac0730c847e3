// Acceptance suite runner: one pass/fail line per criterion, nonzero exit on any failure.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "renormlab/acceptance.hpp"
#include "renormlab/config.hpp"
#include "renormlab/error.hpp"

int main(int argc, char** argv) {
  renormlab::ExperimentConfig config;
  config.experiment = renormlab::ExperimentTag::AcceptanceAll;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--no-rerun") == 0) {
      config.determinism_rerun = false;
    } else if (std::strcmp(argv[i], "--flip-term") == 0 && i + 1 < argc) {
      config.flip_term = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      config.master_seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--no-rerun] [--only CRITERION] [--flip-term NAME] [--seed N]\n", argv[0]);
      return 2;
    }
  }
  try {
    if (only > 0) {
      const auto s = renormlab::run_criterion(only, config.master_seed, config.flip_term);
      std::printf("%s\n", renormlab::format_criterion(s).c_str());
      return s.pass ? 0 : 1;
    }
    const auto report = renormlab::acceptance_suite(config, [](const renormlab::CriterionSummary& s) {
      std::printf("%s\n", renormlab::format_criterion(s).c_str());
      std::fflush(stdout);
    });
    std::printf("%s\n", report.environment().c_str());
    std::printf("%s: %zu criteria, %zu checks\n", report.passed() ? "ACCEPTED" : "REJECTED", report.criteria.size(),
                report.check_count());
    return report.passed() ? 0 : 1;
  } catch (const renormlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
