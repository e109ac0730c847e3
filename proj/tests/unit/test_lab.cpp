#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "renormlab/acceptance.hpp"
#include "renormlab/config.hpp"
#include "renormlab/error.hpp"
#include "renormlab/experiments.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/stats.hpp"

using namespace renormlab;

namespace {

std::string config_error(const std::string& text, const std::filesystem::path& base = ".") {
  try {
    parse_config(text, base);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig c = parse_config(R"({"experiment": "commutator_study"})");
  CHECK(c.experiment == ExperimentTag::CommutatorStudy);
  CHECK(c.length == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(c.epsilon_list().size() == 3);
  CHECK(c.steps() == 500);
  const ExperimentConfig again = parse_config(config_json(c));
  CHECK(config_json(again) == config_json(c));

  const ExperimentConfig d = parse_config(R"({
    "experiment": "flow_conservation",
    "grid": {"dim": 2, "L": 6.283185307179586, "N": 32},
    "time": {"T": 0.2, "dt": 0.001},
    "coefficients": {"drift": "rotation", "diffusion": {"preset": "unit", "amplitude": 0.5}, "initial": "positive"},
    "scalars": {"p": 2, "mc_members": 4, "master_seed": 7},
    "threads": 2
  })");
  CHECK(d.dim == 2);
  CHECK(d.diffusion.preset == "unit");
  CHECK(d.diffusion.amplitude == 0.5);
  CHECK(d.master_seed == 7);
  CHECK(d.steps() == 200);
}

TEST_CASE("config errors are itemized") {
  const std::string unknown = config_error(R"({"experiment": "warp_drive"})");
  CHECK(unknown.find("valid tags") != std::string::npos);
  for (const auto& tag : experiment_tag_names()) CHECK(unknown.find(tag) != std::string::npos);

  const std::string many = config_error(R"({"experiment": "commutator_study", "grid": {"N": 7, "dim": 3}, "bogus": 1})");
  CHECK(many.find("3 problems") != std::string::npos);
  CHECK(many.find("bogus") != std::string::npos);

  CHECK(config_error(R"({"experiment": "flow_conservation", "time": {"T": 0.5, "dt": 0.3}})").find("dt") != std::string::npos);
  CHECK(config_error(R"({"experiment": "commutator_study", "scalars": {"epsilon": [0.01]}})").find("epsilon") !=
        std::string::npos);
  CHECK(config_error(R"({"experiment": "commutator_study", "coefficients": {"drift": "file:nope.fld"}})").find("nope.fld") !=
        std::string::npos);
  CHECK(config_error("{not json").find("JSON") != std::string::npos);
}

TEST_CASE("thread override from the environment") {
  ExperimentConfig c;
  c.threads = 3;
  ::unsetenv("RENORMLAB_THREADS");
  CHECK(effective_threads(c) == 3);
  ::setenv("RENORMLAB_THREADS", "5", 1);
  CHECK(effective_threads(c) == 5);
  ::unsetenv("RENORMLAB_THREADS");
}

TEST_CASE("statistics helpers") {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  const std::vector<double> y = {3.0, 3.0 / std::sqrt(2.0), 1.5, 3.0 / std::sqrt(8.0)};
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
  const MeanEstimate m = mean_and_stderr(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  // Simpson integrates cubics exactly: int_0^1 t^3 = 1/4, so the L^1 norm is 1/4.
  std::vector<double> cube;
  for (int k = 0; k <= 10; ++k) cube.push_back(std::pow(k / 10.0, 3));
  CHECK(time_norm(cube, 0.1, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(time_norm(cube, 0.1, INFINITY) == 1.0);
}

TEST_CASE("parallel loops are deterministic and rethrow the lowest failure") {
  const int saved = worker_count();
  for (int w : {1, 3, 8}) {
    set_worker_count(w);
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = std::sin(double(i)); });
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == std::sin(double(i)));
    try {
      parallel_for(100, [](std::size_t i) {
        if (i == 10 || i == 90) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "10");
    }
  }
  set_worker_count(saved);
}

TEST_CASE("experiments are byte-identical across runs and worker counts") {
  TempDir dir("renormlab_test_lab");
  ExperimentConfig c = parse_config(R"({"experiment": "commutator_study"})");
  std::vector<std::string> first;
  for (int threads : {1, 4}) {
    c.threads = threads;
    c.output_dir = dir.path / ("run" + std::to_string(threads));
    const ExperimentOutput out = run_experiment(c);
    REQUIRE(out.files.size() == 2);
    CHECK(out.checks_passed);
    std::vector<std::string> contents;
    for (const auto& f : out.files) contents.push_back(slurp(f));
    CHECK(contents[0].rfind("# renormlab v1\n", 0) == 0);
    // one header comment, one column header and one row per epsilon
    CHECK(std::count(contents[0].begin(), contents[0].end(), '\n') == 5);
    if (first.empty()) first = contents;
    else CHECK(contents == first);
  }
}

TEST_CASE("flow experiment writes readable artifacts") {
  TempDir dir("renormlab_test_flow_exp");
  ExperimentConfig c = parse_config(R"({
    "experiment": "flow_conservation",
    "grid": {"N": 32}, "time": {"T": 0.05, "dt": 0.001},
    "scalars": {"p": 2, "mc_members": 2}
  })");
  c.output_dir = dir.path;
  const ExperimentOutput a = run_experiment(c);
  CHECK(a.files.size() == 4);
  for (const auto& f : a.files) CHECK(std::filesystem::file_size(f) > 0);
  const std::string csv = slurp(dir.path / "flow_conservation.csv");
  run_experiment(c);
  CHECK(slurp(dir.path / "flow_conservation.csv") == csv);
}

TEST_CASE("acceptance plumbing") {
  CHECK(acceptance_titles().size() == 15);
  const CriterionSummary s = run_criterion(1, 20240601, "");
  CHECK(s.pass);
  CHECK(s.checks.size() == 4);
  const std::string line = format_criterion(s);
  CHECK(line.rfind("[PASS] 1 mollifier certification:", 0) == 0);
  RunReport r;
  r.criteria.push_back(s);
  std::ostringstream os;
  write_report_csv(os, r);
  CHECK(os.str().rfind("# renormlab v1\n", 0) == 0);
  CHECK(r.passed());
  CHECK(r.check_count() == 4);
  CHECK_THROWS_AS(run_criterion(16, 1, ""), Error);
}
