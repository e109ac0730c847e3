#include "renormlab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "renormlab/error.hpp"
#include "renormlab/field_io.hpp"
#include "renormlab/presets.hpp"

namespace renormlab {

namespace {

using json = nlohmann::json;

struct TagName {
  ExperimentTag tag;
  const char* name;
};

constexpr TagName kTags[] = {
    {ExperimentTag::CommutatorStudy, "commutator_study"},
    {ExperimentTag::ParabolicDecay, "parabolic_decay"},
    {ExperimentTag::FlowConservation, "flow_conservation"},
    {ExperimentTag::RenormResidual, "renorm_residual"},
    {ExperimentTag::ZvonkinRelaxation, "zvonkin_relaxation"},
    {ExperimentTag::AcceptanceAll, "acceptance_all"},
};

struct RenormName {
  RenormalizerTag tag;
  const char* name;
};

constexpr RenormName kRenorms[] = {
    {RenormalizerTag::Tanh, "tanh"},
    {RenormalizerTag::AbsEps, "abs_eps"},
    {RenormalizerTag::Linear, "linear"},
    {RenormalizerTag::Constant, "constant"},
};

/// Collects every problem before failing once.
class Diagnostics {
 public:
  void add(const std::string& msg) { items_.push_back(msg); }
  bool empty() const { return items_.empty(); }
  [[noreturn]] void raise() const {
    std::ostringstream os;
    os << "invalid config (" << items_.size() << (items_.size() == 1 ? " problem" : " problems") << "):";
    for (const auto& m : items_) os << "\n  - " << m;
    fail(ErrorCode::Config, os.str());
  }

 private:
  std::vector<std::string> items_;
};

const json* member(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed, Diagnostics& diag) {
  if (!obj.is_object()) {
    diag.add(where + ": expected an object");
    return;
  }
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) diag.add(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void read_number(const json& obj, const char* key, const std::string& where, T& out, Diagnostics& diag) {
  const json* v = member(obj, key);
  if (!v) return;
  if (!v->is_number()) {
    diag.add(where + "." + key + ": expected a number");
    return;
  }
  if constexpr (std::is_integral_v<T>) {
    if (!v->is_number_integer()) {
      diag.add(where + "." + key + ": expected an integer");
      return;
    }
    if constexpr (std::is_unsigned_v<T>) {
      if (v->is_number_unsigned()) {
        out = v->get<T>();
      } else {
        const auto s = v->get<std::int64_t>();
        if (s < 0) {
          diag.add(where + "." + key + ": expected a non-negative integer");
          return;
        }
        out = static_cast<T>(s);
      }
    } else {
      out = v->get<T>();
    }
  } else {
    out = v->get<T>();
  }
}

void read_list(const json& obj, const char* key, const std::string& where, std::vector<double>& out, Diagnostics& diag) {
  const json* v = member(obj, key);
  if (!v) return;
  if (!v->is_array()) {
    diag.add(where + "." + key + ": expected an array of numbers");
    return;
  }
  std::vector<double> vals;
  for (const auto& e : *v) {
    if (!e.is_number()) {
      diag.add(where + "." + key + ": expected an array of numbers");
      return;
    }
    vals.push_back(e.get<double>());
  }
  out = vals;
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t k = 0; k < names.size(); ++k) s += (k ? ", " : "") + names[k];
  return s;
}

void read_source(const json& coeffs, const char* key, const std::filesystem::path& base, FieldSource& out,
                 const std::vector<std::string>& presets, Diagnostics& diag) {
  const json* v = member(coeffs, key);
  if (!v) return;
  const std::string where = std::string("coefficients.") + key;
  auto from_string = [&](const std::string& s, FieldSource& src) {
    if (s.rfind("file:", 0) == 0) {
      std::filesystem::path p = s.substr(5);
      if (p.is_relative()) p = base / p;
      if (!std::filesystem::exists(p)) diag.add(where + ": referenced file '" + p.string() + "' does not exist");
      src.files.push_back(p);
      src.preset.clear();
    } else {
      bool known = false;
      for (const auto& n : presets) known = known || n == s;
      if (!known) diag.add(where + ": unknown preset '" + s + "'; valid: " + join(presets));
      src.preset = s;
    }
  };
  FieldSource src;
  if (v->is_string()) {
    from_string(v->get<std::string>(), src);
  } else if (v->is_array()) {
    for (const auto& e : *v) {
      if (!e.is_string() || e.get<std::string>().rfind("file:", 0) != 0) {
        diag.add(where + ": arrays must list 'file:' references");
        return;
      }
      from_string(e.get<std::string>(), src);
    }
    if (src.files.empty()) diag.add(where + ": empty file list");
  } else if (v->is_object()) {
    check_keys(*v, where, {"preset", "amplitude"}, diag);
    const json* name = member(*v, "preset");
    if (!name || !name->is_string()) {
      diag.add(where + ".preset: expected a string");
      return;
    }
    from_string(name->get<std::string>(), src);
    read_number(*v, "amplitude", where, src.amplitude, diag);
    if (!std::isfinite(src.amplitude)) diag.add(where + ".amplitude: must be finite");
  } else {
    diag.add(where + ": expected a preset name, 'file:' reference, array of references or {preset, amplitude}");
    return;
  }
  out = src;
}

void validate(ExperimentConfig& c, Diagnostics& diag) {
  if (c.dim != 1 && c.dim != 2) diag.add("grid.dim: must be 1 or 2");
  if (!(c.length > 0.0) || !std::isfinite(c.length)) diag.add("grid.L: must be positive");
  if (c.points < 8 || c.points % 2 != 0) diag.add("grid.N: must be even and at least 8");
  if (!(c.final_time > 0.0)) diag.add("time.T: must be positive");
  if (!(c.dt > 0.0)) {
    diag.add("time.dt: must be positive");
  } else if (c.final_time > 0.0) {
    const double ratio = c.final_time / c.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || ratio < 1.0)
      diag.add("time: T / dt must be a positive integer");
  }
  for (double l : c.lambdas)
    if (!(l > 0.0)) diag.add("scalars.lambda: every lambda must be positive");
  if (c.points >= 8 && c.length > 0.0) {
    const double h = c.length / c.points;
    // Defaults scale with L and only matter to the commutator study.
    const bool uses_defaults = c.experiment == ExperimentTag::CommutatorStudy;
    for (double e : uses_defaults ? c.epsilon_list() : c.epsilons)
      if (e < 2.0 * h * (1.0 - 1e-12) || e > 0.25 * c.length * (1.0 + 1e-12))
        diag.add("scalars.epsilon: each epsilon must lie in [2h, L/4] = [" + std::to_string(2.0 * h) + ", " +
                 std::to_string(0.25 * c.length) + "]");
  }
  if (!(c.p >= 1.0)) diag.add("scalars.p: must be >= 1");
  if (!(c.q >= 1.0)) diag.add("scalars.q: must be >= 1");
  if (!(c.r >= 1.0)) diag.add("scalars.r: must be >= 1");
  if (c.mc_members < 1) diag.add("scalars.mc_members: must be >= 1");
  if (c.threads < 1) diag.add("threads: must be >= 1");
  if (c.output_dir.empty()) diag.add("output_dir: must not be empty");
  if (c.renormalizer == RenormalizerTag::AbsEps && !(c.renormalizer_parameter > 0.0))
    diag.add("renormalizer.parameter: abs_eps needs a positive parameter");

  switch (c.experiment) {
    case ExperimentTag::CommutatorStudy:
      if (c.epsilon_list().size() < 3) diag.add("scalars.epsilon: commutator_study needs at least three values");
      if (c.diffusion.preset == "zero") diag.add("coefficients.diffusion: commutator_study needs a diffusion field");
      break;
    case ExperimentTag::ParabolicDecay:
      if (c.lambdas.size() < 3) diag.add("scalars.lambda: parabolic_decay needs at least three values");
      if (!(2.0 / c.q + c.dim / c.p < 1.0)) diag.add("scalars: parabolic_decay needs 2/q + n/p < 1");
      if (!(c.r <= c.p)) diag.add("scalars.r: parabolic_decay needs r <= p");
      break;
    case ExperimentTag::FlowConservation:
    case ExperimentTag::RenormResidual:
      if (c.mc_members < 2) diag.add("scalars.mc_members: ensemble statistics need at least 2 members");
      break;
    case ExperimentTag::ZvonkinRelaxation:
      if (c.lambdas.size() < 2) diag.add("scalars.lambda: zvonkin_relaxation needs at least two values");
      if (!(c.r < c.p)) diag.add("scalars.r: zvonkin_relaxation needs r < p");
      break;
    case ExperimentTag::AcceptanceAll:
      break;
  }

  auto check_file_grid = [&](const FieldSource& src, const char* what, int components) {
    for (const auto& f : src.files) {
      if (!std::filesystem::exists(f)) continue;
      try {
        const FieldFile ff = read_fld(f);
        if (ff.grid.dim != c.dim || ff.grid.points != c.points || std::abs(ff.grid.length - c.length) > 1e-12 * c.length)
          diag.add(std::string("coefficients.") + what + ": grid of '" + f.string() + "' differs from the config grid");
        if (components > 0 && ff.components != components)
          diag.add(std::string("coefficients.") + what + ": '" + f.string() + "' has " + std::to_string(ff.components) +
                   " components, expected " + std::to_string(components));
      } catch (const Error& e) {
        diag.add(std::string("coefficients.") + what + ": " + e.what());
      }
    }
  };
  check_file_grid(c.drift, "drift", c.dim);
  check_file_grid(c.diffusion, "diffusion", c.dim);
  check_file_grid(c.initial, "initial", 1);
}

}  // namespace

std::string to_string(ExperimentTag tag) {
  for (const auto& t : kTags)
    if (t.tag == tag) return t.name;
  return "unknown";
}

const std::vector<std::string>& experiment_tag_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& t : kTags) v.emplace_back(t.name);
    return v;
  }();
  return names;
}

Grid ExperimentConfig::grid() const { return build_grid(dim, length, points); }

std::vector<double> ExperimentConfig::epsilon_list() const {
  if (!epsilons.empty()) return epsilons;
  return {length / 8.0, length / 16.0, length / 32.0};
}

int ExperimentConfig::steps() const { return static_cast<int>(std::lround(final_time / dt)); }

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Config, std::string("invalid config: JSON parse error: ") + e.what());
  }
  Diagnostics diag;
  ExperimentConfig c;
  if (!doc.is_object()) {
    diag.add("top level: expected an object");
    diag.raise();
  }
  check_keys(doc, "config",
             {"experiment", "grid", "time", "coefficients", "scalars", "renormalizer", "threads", "output_dir", "debug"},
             diag);

  if (const json* e = member(doc, "experiment"); !e) {
    diag.add("experiment: missing; valid tags: " + join(experiment_tag_names()));
  } else if (!e->is_string()) {
    diag.add("experiment: expected a string; valid tags: " + join(experiment_tag_names()));
  } else {
    bool found = false;
    for (const auto& t : kTags)
      if (e->get<std::string>() == t.name) {
        c.experiment = t.tag;
        found = true;
      }
    if (!found)
      diag.add("experiment: unknown tag '" + e->get<std::string>() + "'; valid tags: " + join(experiment_tag_names()));
  }

  if (const json* g = member(doc, "grid")) {
    check_keys(*g, "grid", {"dim", "L", "N"}, diag);
    read_number(*g, "dim", "grid", c.dim, diag);
    read_number(*g, "L", "grid", c.length, diag);
    read_number(*g, "N", "grid", c.points, diag);
  }
  if (const json* t = member(doc, "time")) {
    check_keys(*t, "time", {"T", "dt"}, diag);
    read_number(*t, "T", "time", c.final_time, diag);
    read_number(*t, "dt", "time", c.dt, diag);
  }
  if (const json* co = member(doc, "coefficients")) {
    check_keys(*co, "coefficients", {"drift", "diffusion", "initial"}, diag);
    read_source(*co, "drift", base_dir, c.drift, drift_preset_names(), diag);
    read_source(*co, "diffusion", base_dir, c.diffusion, diffusion_preset_names(), diag);
    read_source(*co, "initial", base_dir, c.initial, scalar_preset_names(), diag);
  }
  if (const json* s = member(doc, "scalars")) {
    check_keys(*s, "scalars", {"lambda", "epsilon", "p", "q", "r", "mc_members", "master_seed"}, diag);
    read_list(*s, "lambda", "scalars", c.lambdas, diag);
    read_list(*s, "epsilon", "scalars", c.epsilons, diag);
    read_number(*s, "p", "scalars", c.p, diag);
    read_number(*s, "q", "scalars", c.q, diag);
    read_number(*s, "r", "scalars", c.r, diag);
    read_number(*s, "mc_members", "scalars", c.mc_members, diag);
    read_number(*s, "master_seed", "scalars", c.master_seed, diag);
  }
  if (const json* r = member(doc, "renormalizer")) {
    check_keys(*r, "renormalizer", {"name", "parameter"}, diag);
    if (const json* n = member(*r, "name")) {
      bool found = false;
      std::vector<std::string> names;
      for (const auto& k : kRenorms) {
        names.emplace_back(k.name);
        if (n->is_string() && n->get<std::string>() == k.name) {
          c.renormalizer = k.tag;
          found = true;
        }
      }
      if (!found) diag.add("renormalizer.name: expected one of " + join(names));
    }
    read_number(*r, "parameter", "renormalizer", c.renormalizer_parameter, diag);
  }
  read_number(doc, "threads", "config", c.threads, diag);
  if (const json* o = member(doc, "output_dir")) {
    if (!o->is_string()) {
      diag.add("output_dir: expected a string");
    } else {
      std::filesystem::path p = o->get<std::string>();
      c.output_dir = (p.is_relative() ? base_dir / p : p).lexically_normal();
    }
  }
  if (const json* d = member(doc, "debug")) {
    check_keys(*d, "debug", {"flip_term", "determinism_rerun"}, diag);
    if (const json* f = member(*d, "flip_term")) {
      if (!f->is_string()) diag.add("debug.flip_term: expected a string");
      else c.flip_term = f->get<std::string>();
    }
    if (const json* f = member(*d, "determinism_rerun")) {
      if (!f->is_boolean()) diag.add("debug.determinism_rerun: expected a boolean");
      else c.determinism_rerun = f->get<bool>();
    }
  }

  validate(c, diag);
  if (!diag.empty()) diag.raise();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "invalid config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string config_json(const ExperimentConfig& c) {
  auto source = [](const FieldSource& s) {
    if (!s.from_file()) return json{{"preset", s.preset}, {"amplitude", s.amplitude}};
    json files = json::array();
    for (const auto& f : s.files) files.push_back("file:" + f.generic_string());
    return files;
  };
  std::string renorm;
  for (const auto& k : kRenorms)
    if (k.tag == c.renormalizer) renorm = k.name;
  json doc = {
      {"experiment", to_string(c.experiment)},
      {"grid", {{"dim", c.dim}, {"L", c.length}, {"N", c.points}}},
      {"time", {{"T", c.final_time}, {"dt", c.dt}}},
      {"coefficients", {{"drift", source(c.drift)}, {"diffusion", source(c.diffusion)}, {"initial", source(c.initial)}}},
      {"scalars",
       {{"lambda", c.lambdas},
        {"epsilon", c.epsilons},
        {"p", c.p},
        {"q", c.q},
        {"r", c.r},
        {"mc_members", c.mc_members},
        {"master_seed", c.master_seed}}},
      {"renormalizer", {{"name", renorm}, {"parameter", c.renormalizer_parameter}}},
      {"threads", c.threads},
      {"output_dir", c.output_dir.generic_string()},
      {"debug", {{"flip_term", c.flip_term}, {"determinism_rerun", c.determinism_rerun}}},
  };
  return doc.dump(2);
}

TimeGridVector resolve_drift(const ExperimentConfig& c, const Grid& grid) {
  if (!c.drift.from_file()) return drift_preset(c.drift.preset, grid, c.final_time, c.drift.amplitude);
  const FieldFile f = read_fld(c.drift.files.front());
  require_same_grid(f.grid, grid, "drift file");
  return time_vector_from(f, c.final_time);
}

std::vector<TimeGridVector> resolve_diffusion(const ExperimentConfig& c, const Grid& grid) {
  if (!c.diffusion.from_file()) return diffusion_preset(c.diffusion.preset, grid, c.final_time, c.diffusion.amplitude);
  std::vector<TimeGridVector> out;
  for (const auto& path : c.diffusion.files) {
    const FieldFile f = read_fld(path);
    require_same_grid(f.grid, grid, "diffusion file");
    out.push_back(time_vector_from(f, c.final_time));
  }
  return out;
}

GridScalar resolve_initial(const ExperimentConfig& c, const Grid& grid) {
  if (!c.initial.from_file()) {
    GridScalar f = scalar_preset(c.initial.preset, grid);
    f *= c.initial.amplitude;
    return f;
  }
  const FieldFile f = read_fld(c.initial.files.front());
  require_same_grid(f.grid, grid, "initial file");
  return scalar_from(f);
}

int effective_threads(const ExperimentConfig& c) {
  if (const char* env = std::getenv("RENORMLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
  }
  return c.threads;
}

}  // namespace renormlab
