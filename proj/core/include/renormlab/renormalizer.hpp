#pragma once

#include <string>

#include "renormlab/grid.hpp"

namespace renormlab {

enum class RenormalizerTag { Tanh, AbsEps, Linear, Constant };

/// Gamma with closed-form first and second derivatives, plus
/// G(z) = z Gamma'(z) - Gamma(z) and H(z) = z G'(z) - G(z).
class Renormalizer {
 public:
  Renormalizer(RenormalizerTag tag, double parameter);

  RenormalizerTag tag() const { return tag_; }
  double parameter() const { return parameter_; }
  std::string name() const;

  double gamma(double z) const;
  double d1(double z) const;
  double d2(double z) const;
  double g(double z) const { return z * d1(z) - gamma(z); }
  double g_prime(double z) const { return z * d2(z); }
  double h(double z) const { return z * g_prime(z) - g(z); }

  GridScalar gamma(const GridScalar& f) const;
  GridScalar d1(const GridScalar& f) const;
  GridScalar d2(const GridScalar& f) const;
  GridScalar g(const GridScalar& f) const;
  GridScalar h(const GridScalar& f) const;

 private:
  RenormalizerTag tag_;
  double parameter_;
};

/// tanh; abs_eps (parameter = eps > 0): A_eps * B_eps; linear: z; constant (parameter = c): c.
Renormalizer make_renormalizer(RenormalizerTag tag, double parameter = 1.0);

/// Parabolic smoothing of |z|: z^2/(2 eps) + eps/2 on |z| < eps, |z| outside.
struct ParabolicAbs {
  double eps;
  double value(double z) const;
  double d1(double z) const;
  double d2(double z) const;
};

/// C^2 plateau cutoff: 1 on |z| <= 1/eps, 0 on |z| >= 2/eps, quintic smoothstep in between.
struct PlateauCutoff {
  double eps;
  double value(double z) const;
  double d1(double z) const;
  double d2(double z) const;
};

}  // namespace renormlab
