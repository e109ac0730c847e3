#include "renormlab/renormalizer.hpp"

#include <cmath>
#include <sstream>

#include "renormlab/error.hpp"

namespace renormlab {

double ParabolicAbs::value(double z) const {
  const double a = std::abs(z);
  return a < eps ? z * z / (2.0 * eps) + 0.5 * eps : a;
}

double ParabolicAbs::d1(double z) const {
  if (std::abs(z) < eps) return z / eps;
  return z > 0.0 ? 1.0 : -1.0;
}

double ParabolicAbs::d2(double z) const { return std::abs(z) < eps ? 1.0 / eps : 0.0; }

namespace {
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smoothstep_d2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }
}  // namespace

double PlateauCutoff::value(double z) const {
  const double t = (std::abs(z) - 1.0 / eps) * eps;
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - smoothstep(t);
}

double PlateauCutoff::d1(double z) const {
  const double t = (std::abs(z) - 1.0 / eps) * eps;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -(z > 0.0 ? 1.0 : -1.0) * eps * smoothstep_d1(t);
}

double PlateauCutoff::d2(double z) const {
  const double t = (std::abs(z) - 1.0 / eps) * eps;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -eps * eps * smoothstep_d2(t);
}

Renormalizer::Renormalizer(RenormalizerTag tag, double parameter) : tag_(tag), parameter_(parameter) {}

std::string Renormalizer::name() const {
  std::ostringstream os;
  switch (tag_) {
    case RenormalizerTag::Tanh: return "tanh";
    case RenormalizerTag::AbsEps: os << "abs_eps(" << parameter_ << ")"; return os.str();
    case RenormalizerTag::Linear: return "linear";
    case RenormalizerTag::Constant: os << "constant(" << parameter_ << ")"; return os.str();
  }
  return "unknown";
}

double Renormalizer::gamma(double z) const {
  switch (tag_) {
    case RenormalizerTag::Tanh: return std::tanh(z);
    case RenormalizerTag::AbsEps: return ParabolicAbs{parameter_}.value(z) * PlateauCutoff{parameter_}.value(z);
    case RenormalizerTag::Linear: return z;
    case RenormalizerTag::Constant: return parameter_;
  }
  return 0.0;
}

double Renormalizer::d1(double z) const {
  switch (tag_) {
    case RenormalizerTag::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case RenormalizerTag::AbsEps: {
      const ParabolicAbs a{parameter_};
      const PlateauCutoff b{parameter_};
      return a.d1(z) * b.value(z) + a.value(z) * b.d1(z);
    }
    case RenormalizerTag::Linear: return 1.0;
    case RenormalizerTag::Constant: return 0.0;
  }
  return 0.0;
}

double Renormalizer::d2(double z) const {
  switch (tag_) {
    case RenormalizerTag::Tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case RenormalizerTag::AbsEps: {
      const ParabolicAbs a{parameter_};
      const PlateauCutoff b{parameter_};
      return a.d2(z) * b.value(z) + 2.0 * a.d1(z) * b.d1(z) + a.value(z) * b.d2(z);
    }
    case RenormalizerTag::Linear:
    case RenormalizerTag::Constant: return 0.0;
  }
  return 0.0;
}

GridScalar Renormalizer::gamma(const GridScalar& f) const { return f.map([this](double z) { return gamma(z); }); }
GridScalar Renormalizer::d1(const GridScalar& f) const { return f.map([this](double z) { return d1(z); }); }
GridScalar Renormalizer::d2(const GridScalar& f) const { return f.map([this](double z) { return d2(z); }); }
GridScalar Renormalizer::g(const GridScalar& f) const { return f.map([this](double z) { return g(z); }); }
GridScalar Renormalizer::h(const GridScalar& f) const { return f.map([this](double z) { return h(z); }); }

Renormalizer make_renormalizer(RenormalizerTag tag, double parameter) {
  if (tag == RenormalizerTag::AbsEps && !(parameter > 0.0))
    fail(ErrorCode::BadRenormalizer, "abs_eps renormalizer needs eps > 0");
  if (tag == RenormalizerTag::Tanh || tag == RenormalizerTag::Linear) parameter = 0.0;
  return Renormalizer(tag, parameter);
}

}  // namespace renormlab
