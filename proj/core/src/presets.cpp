#include "renormlab/presets.hpp"

#include <cmath>
#include <numbers>

#include "renormlab/error.hpp"

namespace renormlab {

namespace {

[[noreturn]] void unknown(const std::string& kind, const std::string& name, const std::vector<std::string>& valid) {
  std::string msg = "unknown " + kind + " preset '" + name + "'; valid:";
  for (const auto& v : valid) msg += " " + v;
  fail(ErrorCode::Config, msg);
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

const std::vector<std::string>& drift_preset_names() {
  static const std::vector<std::string> v = {"zero", "constant", "trig", "rotation", "step", "pulsed"};
  return v;
}

const std::vector<std::string>& diffusion_preset_names() {
  static const std::vector<std::string> v = {"zero", "unit", "trig", "rotation"};
  return v;
}

const std::vector<std::string>& scalar_preset_names() {
  static const std::vector<std::string> v = {"zero", "one", "bump", "cos", "wave", "positive"};
  return v;
}

TimeGridVector drift_preset(const std::string& name, const Grid& g, double T, double a) {
  const bool two = g.dim == 2;
  if (name == "zero") return TimeGridVector::constant(GridVector(g), T);
  if (name == "constant") return TimeGridVector::constant(GridVector::constant(g, {a, two ? -0.5 * a : 0.0}), T);
  if (name == "trig")
    return TimeGridVector::constant(GridVector::sample(g, [&](const Point& x) -> Point {
      if (!two) return {a * (0.6 * std::sin(x[0]) + 0.4 * std::cos(2.0 * x[0])), 0.0};
      return {a * (0.6 * std::sin(x[0]) + 0.3 * std::cos(x[1])), a * 0.5 * std::cos(x[0]) * std::sin(x[1])};
    }), T);
  if (name == "rotation")
    return TimeGridVector::constant(GridVector::sample(g, [&](const Point& x) -> Point {
      if (!two) return {a, 0.0};
      return {a * std::sin(x[0]) * std::cos(x[1]), -a * std::cos(x[0]) * std::sin(x[1])};
    }), T);
  if (name == "step")
    return TimeGridVector::constant(
        GridVector::sample(g, [&](const Point& x) -> Point { return {a * sgn(std::sin(x[0])), 0.0}; }), T);
  if (name == "pulsed") {
    const GridVector shape = GridVector::sample(g, [&](const Point& x) -> Point { return {a * std::sin(x[0]), 0.0}; });
    return TimeGridVector::uniform(T, 64, [&](double t) {
      return (1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * t / T)) * shape;
    });
  }
  unknown("drift", name, drift_preset_names());
}

std::vector<TimeGridVector> diffusion_preset(const std::string& name, const Grid& g, double T, double a) {
  const bool two = g.dim == 2;
  std::vector<TimeGridVector> out;
  if (name == "zero") return out;
  if (name == "unit") {
    for (int k = 0; k < g.dim; ++k) {
      Point e{0.0, 0.0};
      e[k] = a;
      out.push_back(TimeGridVector::constant(GridVector::constant(g, e), T));
    }
    return out;
  }
  if (name == "trig") {
    if (!two) {
      out.push_back(TimeGridVector::constant(
          GridVector::sample(g, [&](const Point& x) -> Point { return {a * (0.8 + 0.3 * std::sin(x[0])), 0.0}; }), T));
      return out;
    }
    out.push_back(TimeGridVector::constant(GridVector::sample(g, [&](const Point& x) -> Point {
      return {a * (0.8 + 0.3 * std::sin(x[0])), a * 0.2 * std::cos(x[1])};
    }), T));
    out.push_back(TimeGridVector::constant(GridVector::sample(g, [&](const Point& x) -> Point {
      return {a * 0.2 * std::sin(x[0] + x[1]), a * (0.8 + 0.3 * std::sin(x[1]))};
    }), T));
    return out;
  }
  if (name == "rotation") {
    out.push_back(TimeGridVector::constant(GridVector::sample(g, [&](const Point& x) -> Point {
      if (!two) return {a, 0.0};
      return {a * std::cos(x[1]), a * std::sin(x[0])};
    }), T));
    return out;
  }
  unknown("diffusion", name, diffusion_preset_names());
}

GridScalar scalar_preset(const std::string& name, const Grid& g) {
  const double c = g.center();
  const double radius = g.length / 8.0;
  auto bump = [&](const Point& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) r2 += (x[d] - c) * (x[d] - c);
    r2 /= radius * radius;
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  };
  if (name == "zero") return GridScalar(g);
  if (name == "one") return GridScalar(g, 1.0);
  if (name == "bump") return GridScalar::sample(g, bump);
  if (name == "cos") return GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]); });
  if (name == "wave")
    return GridScalar::sample(g, [&](const Point& x) { return bump(x) * (1.0 + 0.5 * std::cos(3.0 * x[0])); });
  if (name == "positive")
    return GridScalar::sample(g, [&](const Point& x) {
      return 1.0 + 0.5 * std::cos(x[0]) * (g.dim == 2 ? std::cos(x[1]) : 1.0);
    });
  unknown("scalar", name, scalar_preset_names());
}

}  // namespace renormlab
