#include "renormlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "renormlab/acceptance.hpp"
#include "renormlab/commutator.hpp"
#include "renormlab/error.hpp"
#include "renormlab/field_io.hpp"
#include "renormlab/flow.hpp"
#include "renormlab/flow_io.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/parabolic.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/weakform.hpp"
#include "renormlab/zvonkin.hpp"

namespace renormlab {

namespace {

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  template <class Writer>
  void csv(const std::string& name, Writer&& write) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    write(os);
    if (!os) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
    out_.files.push_back(path);
  }
  void field(const std::string& name, const FieldFile& f) {
    write_fld(dir_ / name, f);
    out_.files.push_back(dir_ / name);
  }
  void flow(const std::string& name, const FlowEnsemble& e) {
    write_flo(dir_ / name, e);
    out_.files.push_back(dir_ / name);
  }
  ExperimentOutput& output() { return out_; }

 private:
  std::filesystem::path dir_;
  ExperimentOutput out_;
};

void commutator_study(const ExperimentConfig& c, Artifacts& art) {
  const Grid g = c.grid();
  const auto sigmas = resolve_diffusion(c, g);
  if (sigmas.empty()) fail(ErrorCode::Config, "commutator_study needs a non-zero diffusion field");
  const GridVector sigma = sigmas.front().slice(0);
  const GridScalar f = resolve_initial(c, g);
  const auto eps = c.epsilon_list();
  const CommutatorStudy t =
      convergence_study(CommutatorOp::T, sigma, f, eps, {c.p, c.q, 1.0 / (1.0 / c.q + 1.0 / c.p)});
  const CommutatorStudy s =
      convergence_study(CommutatorOp::S, sigma, f, eps, {c.p, c.q, 1.0 / (2.0 / c.q + 1.0 / c.p)});
  art.csv("commutator_T.csv", [&](std::ostream& os) { write_csv(os, t); });
  art.csv("commutator_S.csv", [&](std::ostream& os) { write_csv(os, s); });
}

void parabolic_decay(const ExperimentConfig& c, Artifacts& art) {
  const Grid g = c.grid();
  const TimeGridVector b = resolve_drift(c, g);
  for (int alpha : {0, 1}) {
    const DecayStudy st = decay_study(b, c.lambdas, alpha, c.r, c.p, c.q);
    art.csv("decay_alpha" + std::to_string(alpha) + ".csv", [&](std::ostream& os) { write_csv(os, st); });
  }
  std::vector<ParabolicSolution> sols;
  for (double lambda : c.lambdas) sols.push_back(mild_solve(b, lambda));
  art.csv("relaxation_residuals.csv", [&](std::ostream& os) {
    os << "# renormlab v1\nlambda,drift_residual,divergence_residual,iterations,contraction_estimate\n";
    os.precision(17);
    for (const auto& sol : sols) {
      const RelaxationResiduals r = relaxation_residuals(sol, b, c.p);
      os << sol.lambda << ',' << r.drift << ',' << r.divergence << ',' << sol.iterations << ','
         << sol.contraction_estimate << '\n';
    }
  });
  art.field("u_lambda.fld", to_field_file(sols.front().u));
}

void flow_conservation(const ExperimentConfig& c, Artifacts& art) {
  const Grid g = c.grid();
  const TimeGridVector b = resolve_drift(c, g);
  const auto sigmas = resolve_diffusion(c, g);
  const GridScalar f0 = resolve_initial(c, g);
  const SdeConfig sde{c.dt, c.mc_members, c.master_seed};
  const auto members = static_cast<std::size_t>(c.mc_members);
  const int stride = std::max(1, c.steps() / 50);
  struct Row {
    int step;
    double mass, lp_ratio, logdet_gap;
  };
  std::vector<std::vector<Row>> rows(members);
  std::vector<double> sup_norm(members);
  FlowEnsemble first;
  const double m0 = f0.integral(), n0 = lp_norm(f0, c.p);
  parallel_for(members, [&](std::size_t m) {
    FlowEnsemble e = simulate_member(b, sigmas, sde, m);
    for (int k = 0; k <= e.steps; k += stride) {
      const GridScalar f = k == 0 ? f0 : pushforward_solution(f0, e, k);
      double gap = 0.0;
      for (std::size_t node = 0; node < e.nodes(); ++node)
        gap = std::max(gap, std::abs(e.log_det_exponential(k, node) - e.log_det_variational(k, node)));
      const double norm = lp_norm(f, c.p);
      rows[m].push_back({k, f.integral(), norm / n0, gap});
      sup_norm[m] = std::max(sup_norm[m], norm);
    }
    if (m == 0) first = std::move(e);
  });
  art.csv("flow_conservation.csv", [&](std::ostream& os) {
    os << "# renormlab v1\nmember,step,time,mass_error,lp_ratio,logdet_gap\n";
    os.precision(17);
    for (std::size_t m = 0; m < members; ++m)
      for (const auto& r : rows[m])
        os << m << ',' << r.step << ',' << r.step * c.dt << ',' << r.mass - m0 << ',' << r.lp_ratio << ','
           << r.logdet_gap << '\n';
  });
  art.csv("moment_bound.csv", [&](std::ostream& os) {
    os << "# renormlab v1\np,members,moment_mean,moment_stderr,gronwall_bound\n";
    os.precision(17);
    const double bound = moment_bound_constant(b, sigmas, c.p, c.steps()) * std::pow(n0, 2.0 * c.p);
    if (members >= 2) {
      const MeanEstimate est = ensemble_moment(sup_norm, 2.0 * c.p);
      os << c.p << ',' << members << ',' << est.mean << ',' << est.stderr_ << ',' << bound << '\n';
    } else {
      os << c.p << ',' << members << ',' << std::pow(sup_norm[0], 2.0 * c.p) << ",nan," << bound << '\n';
    }
  });
  art.flow("member0.flo", first);
  art.field("f_final_member0.fld", to_field_file(pushforward_solution(f0, first, first.steps)));
}

void renorm_residual(const ExperimentConfig& c, Artifacts& art) {
  const Renormalizer gamma = make_renormalizer(c.renormalizer, c.renormalizer_parameter);
  RenormalizedOptions opts;
  opts.flipped_term = c.flip_term;
  const auto members = static_cast<std::size_t>(c.mc_members);
  struct Level {
    int points;
    int steps;
  };
  const Level levels[2] = {{c.points, c.steps()}, {2 * c.points, 4 * c.steps()}};
  std::vector<std::array<double, 4>> res(members);  // original and renormalized, base and fine
  // Field files fix the grid, so only the base level runs then.
  const bool files = c.drift.from_file() || c.diffusion.from_file() || c.initial.from_file();
  const int wiener = static_cast<int>(resolve_diffusion(c, c.grid()).size());
  WeakFormLedger first_original, first_renormalized;
  parallel_for(members, [&](std::size_t m) {
    const BrownianPath fine_path = sample_brownian_steps(c.final_time, levels[1].steps, wiener, stream_id(c.master_seed, m));
    for (int level = 0; level < (files ? 1 : 2); ++level) {
      const Level lv = levels[level];
      const Grid g = build_grid(c.dim, c.length, lv.points);
      const TimeGridVector b = resolve_drift(c, g);
      const auto sigmas = resolve_diffusion(c, g);
      const GridScalar f0 = resolve_initial(c, g);
      const BrownianPath p = level == 0 ? fine_path.coarsen(4) : fine_path;
      FlowEnsemble e = simulate_flow(b, sigmas, SdeConfig{p.dt, c.mc_members, c.master_seed}, p);
      variational_jacobian(e, b, sigmas);
      std::vector<GridScalar> fp{f0};
      for (int n = 1; n <= p.steps; ++n) fp.push_back(pushforward_solution(f0, e, n));
      const Point center{g.center(), g.dim == 2 ? g.center() : 0.0};
      const TestFunction phi = bump_test_function(g, center, g.length / 4.0);
      const WeakFormLedger lo = residual_original(fp, b, sigmas, phi, p);
      const WeakFormLedger lr = residual_renormalized(fp, b, sigmas, phi, gamma, p, opts);
      res[m][static_cast<std::size_t>(2 * level)] = lo.residual;
      res[m][static_cast<std::size_t>(2 * level + 1)] = lr.residual;
      if (m == 0 && level == 0) {
        first_original = lo;
        first_renormalized = lr;
      }
    }
  });
  art.csv("ledger_original.csv", [&](std::ostream& os) { write_csv(os, first_original); });
  art.csv("ledger_renormalized.csv", [&](std::ostream& os) { write_csv(os, first_renormalized); });
  art.csv("residuals.csv", [&](std::ostream& os) {
    os << "# renormlab v1\nmember,residual_original,residual_renormalized\n";
    os.precision(17);
    for (std::size_t m = 0; m < members; ++m) os << m << ',' << res[m][0] << ',' << res[m][1] << '\n';
  });
  auto rms = [&](std::size_t k) {
    double s = 0.0;
    for (const auto& r : res) s += r[k] * r[k];
    return std::sqrt(s / static_cast<double>(members));
  };
  std::vector<RefinementRow> rows;
  for (int level = 0; level < (files ? 1 : 2); ++level) {
    const Level lv = levels[level];
    rows.push_back({c.final_time / lv.steps, c.length / lv.points, 0.0, rms(static_cast<std::size_t>(2 * level + 1))});
  }
  art.csv("refinement.csv", [&](std::ostream& os) { write_refinement_csv(os, rows); });
}

void zvonkin_relaxation(const ExperimentConfig& c, Artifacts& art) {
  const Grid g = c.grid();
  const TimeGridVector b = resolve_drift(c, g);
  std::vector<RelaxationMetrics> metrics;
  std::vector<Diffeo> diffeos;
  for (double lambda : c.lambdas) {
    diffeos.push_back(build_diffeo(mild_solve(b, lambda).u));
    metrics.push_back(relaxation_metrics(transform_coeffs(diffeos.back(), lambda), b, c.q, c.p, c.r));
  }
  art.csv("relaxation.csv", [&](std::ostream& os) { write_relaxation_csv(os, c.lambdas, metrics); });
  art.csv("diffeo.csv", [&](std::ostream& os) {
    os << "# renormlab v1\nlambda,lip,det_min,det_max,det_lo,det_hi,brackets\n";
    os.precision(17);
    for (std::size_t k = 0; k < diffeos.size(); ++k) {
      const Diffeo& d = diffeos[k];
      os << c.lambdas[k] << ',' << d.lip << ',' << d.det_min << ',' << d.det_max << ',' << d.det_lo << ','
         << d.det_hi << ',' << (d.brackets_determinant() ? 1 : 0) << '\n';
    }
  });
}

void acceptance_all(const ExperimentConfig& c, Artifacts& art) {
  const RunReport report = acceptance_suite(c);
  art.csv("acceptance.csv", [&](std::ostream& os) { write_report_csv(os, report); });
  art.csv("acceptance.txt", [&](std::ostream& os) {
    os << report.environment() << '\n';
    for (const auto& cr : report.criteria) os << format_criterion(cr) << '\n';
  });
  art.output().checks_passed = report.passed();
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  const int previous = worker_count();
  set_worker_count(effective_threads(config));
  Artifacts art(config.output_dir);
  try {
    switch (config.experiment) {
      case ExperimentTag::CommutatorStudy: commutator_study(config, art); break;
      case ExperimentTag::ParabolicDecay: parabolic_decay(config, art); break;
      case ExperimentTag::FlowConservation: flow_conservation(config, art); break;
      case ExperimentTag::RenormResidual: renorm_residual(config, art); break;
      case ExperimentTag::ZvonkinRelaxation: zvonkin_relaxation(config, art); break;
      case ExperimentTag::AcceptanceAll: acceptance_all(config, art); break;
    }
  } catch (const Error& e) {
    set_worker_count(previous);
    throw Error(e.code(), to_string(config.experiment) + ": " + e.what());
  }
  set_worker_count(previous);
  return art.output();
}

}  // namespace renormlab
