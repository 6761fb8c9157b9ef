#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace porous {

struct CoefficientError : std::runtime_error {
  explicit CoefficientError(const std::string& what) : std::runtime_error(what) {}
};

/// One-argument coefficient function (moisture content b, mobility a,
/// dispersion D_w). Families:
///
///   constant value=c
///   linear   offset=o slope=s
///   linclamp lo= hi= z0= z1=      piecewise linear, clamped outside [z0,z1]
///   logistic lo= hi= [rate=1] [center=0]
///   atan     lo= hi= [rate=1] [center=0]
///   vg       amin= amax= alpha= [m=1] [center=0]
///            amin + (amax-amin) / (1 + (alpha (z-center))^2)^m
///   exp      scale= rate=
class ScalarCoeff {
public:
  enum class Family { Constant, Linear, LinClamp, Logistic, Atan, VanGenuchten, Exponential };

  static ScalarCoeff parse(const std::string& spec, const std::string& role);

  double eval(double z) const;
  double deriv(double z) const;

  /// Definite integral over [from, to], closed form when the family has one,
  /// adaptive quadrature otherwise.
  double integral(double from, double to) const;

  bool has_closed_integral() const;

  Family family() const { return family_; }
  const std::string& spec() const { return spec_; }

private:
  double integral_closed(double from, double to) const;

  Family family_ = Family::Constant;
  std::string spec_;
  // Parameter slots; meaning depends on the family.
  double p0_ = 0, p1_ = 0, p2_ = 0, p3_ = 0, p4_ = 0;
};

/// Two-argument thermal conductivity lambda(theta, u). Families:
///
///   constant value=c
///   affine   l0= [ktheta=0] [ku=0]
///   expprod  l0= [ktheta=0] [ku=0]     l0 * exp(ktheta*theta + ku*u)
///   bounded  lo= hi= [ktheta=0] [ku=0] lo + (hi-lo)*sigmoid(ktheta*theta + ku*u)
class LambdaCoeff {
public:
  enum class Family { Constant, Affine, ExpProduct, Bounded };

  static LambdaCoeff parse(const std::string& spec);

  double eval(double theta, double u) const;
  double dtheta(double theta, double u) const;
  double du(double theta, double u) const;

  Family family() const { return family_; }
  const std::string& spec() const { return spec_; }

private:
  Family family_ = Family::Constant;
  std::string spec_;
  double p0_ = 0, p1_ = 0, p2_ = 0, p3_ = 0;
};

/// The coefficient functions of the transport system together with the
/// structural constants b2 (upper bound of b) and rho (constant heat
/// capacity). Immutable after construction; evaluations are pure.
struct CoefficientSet {
  ScalarCoeff b;
  ScalarCoeff a;
  ScalarCoeff dw;
  LambdaCoeff lambda;
  double b2 = 0.0;
  double rho = 0.0;

  double eval_b(double z) const { return b.eval(z); }
  double eval_b_prime(double z) const { return b.deriv(z); }
  double eval_a(double z) const { return a.eval(z); }
  double eval_dw(double z) const { return dw.eval(z); }
  double eval_lambda(double theta, double u) const { return lambda.eval(theta, u); }

  /// Legendre-transform energy density B(z) = int_0^z (b(z) - b(s)) ds.
  double eval_B(double z) const;

  /// B recentered at the Dirichlet level g: int_g^z (b(z) - b(s)) ds.
  double eval_B_centered(double z, double g) const;
};

/// Binds families from a config-section key-value map. No validation beyond
/// parsing; call validate_assumptions for the structural checks.
CoefficientSet make_coefficient_set(const std::map<std::string, std::string>& section);

struct ValidationClause {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationClause> clauses;
  bool pass = false;
};

/// Samples the assumption (i)-(iii) clauses on a uniform grid over
/// [probe_lo, probe_hi] with `samples` points (>= 2).
ValidationReport validate_assumptions(const CoefficientSet& cs, double probe_lo, double probe_hi,
                                      int samples);

} // namespace porous
