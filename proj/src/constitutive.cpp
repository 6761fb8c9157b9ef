#include "porous/constitutive.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace porous {

namespace {

constexpr double kPi = 3.14159265358979323846;

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

// --- adaptive Gauss(7)/Kronrod(15) quadrature -------------------------------

constexpr double kron_x[8] = {0.0,
                              0.2077849550078985,
                              0.4058451513773972,
                              0.5860872354676911,
                              0.7415311855993945,
                              0.8648644233597691,
                              0.9491079123427585,
                              0.9914553711208126};
constexpr double kron_w[8] = {0.2094821410847278, 0.2044329400752989, 0.1903505780647854,
                              0.1690047266392679, 0.1406532597155259, 0.1047900103222502,
                              0.0630920926299786, 0.0229353220105292};
constexpr double gauss_w[4] = {0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
                               0.1294849661688697};

void gk15(const std::function<double(double)>& f, double a, double b, double& kronrod,
          double& gauss) {
  double h = 0.5 * (b - a);
  double c = 0.5 * (a + b);
  double fc = f(c);
  kronrod = kron_w[0] * fc;
  gauss = gauss_w[0] * fc;
  for (int i = 1; i < 8; ++i) {
    double fp = f(c + h * kron_x[i]);
    double fm = f(c - h * kron_x[i]);
    kronrod += kron_w[i] * (fp + fm);
    if (i % 2 == 0) gauss += gauss_w[i / 2] * (fp + fm);
  }
  kronrod *= h;
  gauss *= h;
}

double adaptive_gk(const std::function<double(double)>& f, double a, double b, double tol_abs,
                   int depth) {
  if (depth > 40)
    throw CoefficientError("quadrature did not converge within the depth cap of 40");
  double k, g;
  gk15(f, a, b, k, g);
  if (std::fabs(k - g) <= tol_abs || std::fabs(b - a) < 1e-15 * (std::fabs(a) + std::fabs(b)))
    return k;
  double m = 0.5 * (a + b);
  return adaptive_gk(f, a, m, 0.5 * tol_abs, depth + 1) +
         adaptive_gk(f, m, b, 0.5 * tol_abs, depth + 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b) {
  if (a == b) return 0.0;
  double k, g;
  gk15(f, a, b, k, g);
  double tol = 1e-10 * std::max(std::fabs(k), 1e-30);
  return adaptive_gk(f, a, b, tol, 0);
}

// --- family spec parsing -----------------------------------------------------

struct FamilySpec {
  std::string family;
  std::map<std::string, double> params;
};

FamilySpec tokenize_family(const std::string& spec, const std::string& role) {
  std::istringstream in(spec);
  FamilySpec out;
  if (!(in >> out.family))
    throw CoefficientError("empty coefficient spec for " + role);
  std::string tok;
  while (in >> tok) {
    size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw CoefficientError("malformed parameter '" + tok + "' for " + role +
                             " (expected key=value)");
    std::string key = tok.substr(0, eq);
    std::string val = tok.substr(eq + 1);
    try {
      size_t pos = 0;
      double v = std::stod(val, &pos);
      if (pos != val.size() || !std::isfinite(v)) throw std::invalid_argument("bad");
      if (!out.params.emplace(key, v).second)
        throw CoefficientError("repeated parameter '" + key + "' for " + role);
    } catch (const CoefficientError&) {
      throw;
    } catch (const std::exception&) {
      throw CoefficientError("unparsable parameter '" + tok + "' for " + role);
    }
  }
  return out;
}

class ParamReader {
public:
  ParamReader(FamilySpec spec, std::string role) : spec_(std::move(spec)), role_(std::move(role)) {}

  double required(const std::string& key) {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end())
      throw CoefficientError("missing parameter '" + key + "' for " + role_ + " family '" +
                             spec_.family + "'");
    used_.insert(key);
    return it->second;
  }

  double optional(const std::string& key, double fallback) {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  void finish() const {
    for (const auto& [k, v] : spec_.params) {
      if (used_.count(k) == 0)
        throw CoefficientError("unknown parameter '" + k + "' for " + role_ + " family '" +
                               spec_.family + "'");
    }
  }

private:
  FamilySpec spec_;
  std::string role_;
  std::set<std::string> used_;
};

} // namespace

// --- ScalarCoeff -------------------------------------------------------------

ScalarCoeff ScalarCoeff::parse(const std::string& spec, const std::string& role) {
  FamilySpec fs = tokenize_family(spec, role);
  ScalarCoeff c;
  c.spec_ = spec;
  ParamReader pr(fs, role);
  if (fs.family == "constant") {
    c.family_ = Family::Constant;
    c.p0_ = pr.required("value");
  } else if (fs.family == "linear") {
    c.family_ = Family::Linear;
    c.p0_ = pr.required("offset");
    c.p1_ = pr.required("slope");
  } else if (fs.family == "linclamp") {
    c.family_ = Family::LinClamp;
    c.p0_ = pr.required("lo");
    c.p1_ = pr.required("hi");
    c.p2_ = pr.required("z0");
    c.p3_ = pr.required("z1");
    if (!(c.p2_ < c.p3_))
      throw CoefficientError("linclamp needs z0 < z1 for " + role);
  } else if (fs.family == "logistic") {
    c.family_ = Family::Logistic;
    c.p0_ = pr.required("lo");
    c.p1_ = pr.required("hi");
    c.p2_ = pr.optional("rate", 1.0);
    c.p3_ = pr.optional("center", 0.0);
  } else if (fs.family == "atan") {
    c.family_ = Family::Atan;
    c.p0_ = pr.required("lo");
    c.p1_ = pr.required("hi");
    c.p2_ = pr.optional("rate", 1.0);
    c.p3_ = pr.optional("center", 0.0);
  } else if (fs.family == "vg") {
    c.family_ = Family::VanGenuchten;
    c.p0_ = pr.required("amin");
    c.p1_ = pr.required("amax");
    c.p2_ = pr.required("alpha");
    c.p3_ = pr.optional("m", 1.0);
    c.p4_ = pr.optional("center", 0.0);
  } else if (fs.family == "exp") {
    c.family_ = Family::Exponential;
    c.p0_ = pr.required("scale");
    c.p1_ = pr.required("rate");
  } else {
    throw CoefficientError("unknown family '" + fs.family + "' for " + role);
  }
  pr.finish();
  return c;
}

double ScalarCoeff::eval(double z) const {
  switch (family_) {
    case Family::Constant: return p0_;
    case Family::Linear: return p0_ + p1_ * z;
    case Family::LinClamp: {
      if (z <= p2_) return p0_;
      if (z >= p3_) return p1_;
      return p0_ + (p1_ - p0_) * (z - p2_) / (p3_ - p2_);
    }
    case Family::Logistic: return p0_ + (p1_ - p0_) * stable_sigmoid(p2_ * (z - p3_));
    case Family::Atan:
      return p0_ + (p1_ - p0_) * (std::atan(p2_ * (z - p3_)) / kPi + 0.5);
    case Family::VanGenuchten: {
      double x = p2_ * (z - p4_);
      return p0_ + (p1_ - p0_) * std::pow(1.0 + x * x, -p3_);
    }
    case Family::Exponential: return p0_ * std::exp(p1_ * z);
  }
  return 0.0;
}

double ScalarCoeff::deriv(double z) const {
  switch (family_) {
    case Family::Constant: return 0.0;
    case Family::Linear: return p1_;
    case Family::LinClamp: {
      if (z <= p2_ || z >= p3_) return 0.0;
      return (p1_ - p0_) / (p3_ - p2_);
    }
    case Family::Logistic: {
      double s = stable_sigmoid(p2_ * (z - p3_));
      return (p1_ - p0_) * p2_ * s * (1.0 - s);
    }
    case Family::Atan: {
      double x = p2_ * (z - p3_);
      return (p1_ - p0_) * p2_ / (kPi * (1.0 + x * x));
    }
    case Family::VanGenuchten: {
      double x = p2_ * (z - p4_);
      return (p1_ - p0_) * (-p3_) * std::pow(1.0 + x * x, -p3_ - 1.0) * 2.0 * x * p2_;
    }
    case Family::Exponential: return p0_ * p1_ * std::exp(p1_ * z);
  }
  return 0.0;
}

bool ScalarCoeff::has_closed_integral() const {
  if (family_ == Family::VanGenuchten) return p3_ == 1.0;
  return true;
}

double ScalarCoeff::integral_closed(double from, double to) const {
  switch (family_) {
    case Family::Constant: return p0_ * (to - from);
    case Family::Linear: return p0_ * (to - from) + 0.5 * p1_ * (to * to - from * from);
    case Family::LinClamp: {
      if (from > to) return -integral_closed(to, from);
      double s = (p1_ - p0_) / (p3_ - p2_);
      double total = 0.0;
      // left flat piece
      double c = std::min(to, p2_);
      if (from < c) total += p0_ * (c - from);
      // ramp piece
      double r0 = std::max(from, p2_);
      double r1 = std::min(to, p3_);
      if (r0 < r1) {
        total += p0_ * (r1 - r0) + 0.5 * s * ((r1 - p2_) * (r1 - p2_) - (r0 - p2_) * (r0 - p2_));
      }
      // right flat piece
      double d = std::max(from, p3_);
      if (d < to) total += p1_ * (to - d);
      return total;
    }
    case Family::Logistic: {
      double k = p2_;
      auto anti = [&](double z) { return softplus(k * (z - p3_)) / k; };
      return p0_ * (to - from) + (p1_ - p0_) * (anti(to) - anti(from));
    }
    case Family::Atan: {
      double k = p2_;
      auto g = [&](double z) {
        double x = z - p3_;
        return x * std::atan(k * x) - std::log1p(k * k * x * x) / (2.0 * k);
      };
      return p0_ * (to - from) + (p1_ - p0_) * ((g(to) - g(from)) / kPi + 0.5 * (to - from));
    }
    case Family::VanGenuchten: {
      // closed form only for m = 1
      auto anti = [&](double z) { return std::atan(p2_ * (z - p4_)) / p2_; };
      return p0_ * (to - from) + (p1_ - p0_) * (anti(to) - anti(from));
    }
    case Family::Exponential: {
      if (p1_ == 0.0) return p0_ * (to - from);
      return p0_ * (std::exp(p1_ * to) - std::exp(p1_ * from)) / p1_;
    }
  }
  return 0.0;
}

double ScalarCoeff::integral(double from, double to) const {
  if (has_closed_integral()) return integral_closed(from, to);
  return integrate_adaptive([this](double z) { return eval(z); }, from, to);
}

// --- LambdaCoeff ---------------------------------------------------------------

LambdaCoeff LambdaCoeff::parse(const std::string& spec) {
  FamilySpec fs = tokenize_family(spec, "lambda");
  LambdaCoeff c;
  c.spec_ = spec;
  ParamReader pr(fs, "lambda");
  if (fs.family == "constant") {
    c.family_ = Family::Constant;
    c.p0_ = pr.required("value");
  } else if (fs.family == "affine") {
    c.family_ = Family::Affine;
    c.p0_ = pr.required("l0");
    c.p1_ = pr.optional("ktheta", 0.0);
    c.p2_ = pr.optional("ku", 0.0);
  } else if (fs.family == "expprod") {
    c.family_ = Family::ExpProduct;
    c.p0_ = pr.required("l0");
    c.p1_ = pr.optional("ktheta", 0.0);
    c.p2_ = pr.optional("ku", 0.0);
  } else if (fs.family == "bounded") {
    c.family_ = Family::Bounded;
    c.p0_ = pr.required("lo");
    c.p1_ = pr.required("hi");
    c.p2_ = pr.optional("ktheta", 0.0);
    c.p3_ = pr.optional("ku", 0.0);
  } else {
    throw CoefficientError("unknown family '" + fs.family + "' for lambda");
  }
  pr.finish();
  return c;
}

double LambdaCoeff::eval(double theta, double u) const {
  switch (family_) {
    case Family::Constant: return p0_;
    case Family::Affine: return p0_ + p1_ * theta + p2_ * u;
    case Family::ExpProduct: return p0_ * std::exp(p1_ * theta + p2_ * u);
    case Family::Bounded: return p0_ + (p1_ - p0_) * stable_sigmoid(p2_ * theta + p3_ * u);
  }
  return 0.0;
}

double LambdaCoeff::dtheta(double theta, double u) const {
  switch (family_) {
    case Family::Constant: return 0.0;
    case Family::Affine: return p1_;
    case Family::ExpProduct: return p1_ * eval(theta, u);
    case Family::Bounded: {
      double s = stable_sigmoid(p2_ * theta + p3_ * u);
      return (p1_ - p0_) * p2_ * s * (1.0 - s);
    }
  }
  return 0.0;
}

double LambdaCoeff::du(double theta, double u) const {
  switch (family_) {
    case Family::Constant: return 0.0;
    case Family::Affine: return p2_;
    case Family::ExpProduct: return p2_ * eval(theta, u);
    case Family::Bounded: {
      double s = stable_sigmoid(p2_ * theta + p3_ * u);
      return (p1_ - p0_) * p3_ * s * (1.0 - s);
    }
  }
  return 0.0;
}

// --- CoefficientSet ------------------------------------------------------------

double CoefficientSet::eval_B(double z) const { return eval_B_centered(z, 0.0); }

double CoefficientSet::eval_B_centered(double z, double g) const {
  if (!std::isfinite(z)) throw CoefficientError("eval_B requires a finite argument");
  return b.eval(z) * (z - g) - b.integral(g, z);
}

CoefficientSet make_coefficient_set(const std::map<std::string, std::string>& section) {
  auto require = [&](const std::string& key) -> const std::string& {
    auto it = section.find(key);
    if (it == section.end())
      throw CoefficientError("missing key '" + key + "' in [coefficients]");
    return it->second;
  };
  CoefficientSet cs;
  cs.b = ScalarCoeff::parse(require("b"), "b");
  cs.a = ScalarCoeff::parse(require("a"), "a");
  cs.dw = ScalarCoeff::parse(require("dw"), "dw");
  cs.lambda = LambdaCoeff::parse(require("lambda"));
  auto parse_pos = [&](const std::string& key) {
    const std::string& raw = require(key);
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(raw, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != raw.size() || !std::isfinite(v))
      throw CoefficientError("unparsable value for '" + key + "': '" + raw + "'");
    if (v <= 0.0) throw CoefficientError("'" + key + "' must be positive, got " + raw);
    return v;
  };
  cs.b2 = parse_pos("b2");
  cs.rho = parse_pos("rho");
  for (const auto& [key, val] : section) {
    if (key != "b" && key != "a" && key != "dw" && key != "lambda" && key != "b2" && key != "rho")
      throw CoefficientError("unknown key '" + key + "' in [coefficients]");
  }
  return cs;
}

ValidationReport validate_assumptions(const CoefficientSet& cs, double probe_lo, double probe_hi,
                                      int samples) {
  if (!(probe_lo < probe_hi))
    throw CoefficientError("validation probe interval is empty");
  if (samples < 2) throw CoefficientError("validation needs at least 2 samples");

  ValidationReport report;
  auto grid = [&](int i) {
    return probe_lo + (probe_hi - probe_lo) * static_cast<double>(i) / (samples - 1);
  };

  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.clauses.push_back({name, pass, detail});
  };

  {
    bool ok = true;
    std::string detail = "0 < b(z) <= b2 on the probe grid";
    for (int i = 0; i < samples && ok; ++i) {
      double z = grid(i);
      double v = cs.eval_b(z);
      if (!(v > 0.0) || v > cs.b2 * (1.0 + 1e-14)) {
        ok = false;
        detail = "violated at z = " + std::to_string(z) + ": b = " + std::to_string(v) +
                 ", b2 = " + std::to_string(cs.b2);
      }
    }
    add("(i) positivity and upper bound of b", ok, detail);
  }
  {
    bool ok = true;
    std::string detail = "(b(z1)-b(z2))(z1-z2) > 0 on consecutive grid pairs";
    double prev = cs.eval_b(grid(0));
    for (int i = 1; i < samples && ok; ++i) {
      double cur = cs.eval_b(grid(i));
      if (!((cur - prev) * (grid(i) - grid(i - 1)) > 0.0)) {
        ok = false;
        detail = "monotonicity fails between z = " + std::to_string(grid(i - 1)) + " and z = " +
                 std::to_string(grid(i));
      }
      prev = cur;
    }
    add("(i) strict monotonicity of b", ok, detail);
  }
  auto positivity = [&](const ScalarCoeff& c, const std::string& name) {
    bool ok = true;
    std::string detail = name + "(z) > 0 on the probe grid";
    for (int i = 0; i < samples && ok; ++i) {
      double z = grid(i);
      if (!(c.eval(z) > 0.0)) {
        ok = false;
        detail = name + " nonpositive at z = " + std::to_string(z);
      }
    }
    add("(ii) positivity of " + name, ok, detail);
  };
  positivity(cs.a, "a");
  positivity(cs.dw, "D_w");
  {
    bool ok = true;
    std::string detail = "lambda(theta, u) > 0 on the probe grid";
    int m = static_cast<int>(std::sqrt(static_cast<double>(samples))) + 1;
    for (int i = 0; i < m && ok; ++i) {
      double xi = probe_lo + (probe_hi - probe_lo) * static_cast<double>(i) / (m - 1);
      for (int j = 0; j < m && ok; ++j) {
        double zeta = probe_lo + (probe_hi - probe_lo) * static_cast<double>(j) / (m - 1);
        if (!(cs.eval_lambda(xi, zeta) > 0.0)) {
          ok = false;
          detail = "lambda nonpositive at (theta, u) = (" + std::to_string(xi) + ", " +
                   std::to_string(zeta) + ")";
        }
      }
    }
    add("(ii) positivity of lambda", ok, detail);
  }
  {
    // The textbook bound B(z) <= b(z) z presumes b(0) = 0; with a merely
    // positive b the convexity argument gives B(z) <= (b(z) - b(0)) z, which
    // coincides with the former in the shifted setting and holds for all z.
    bool ok = true;
    std::string detail = "0 <= B(z) <= (b(z) - b(0)) z on the probe grid";
    double b0 = cs.eval_b(0.0);
    for (int i = 0; i < samples && ok; ++i) {
      double z = grid(i);
      double B = cs.eval_B(z);
      double bound = (cs.eval_b(z) - b0) * z;
      double tol = 1e-12 * (1.0 + std::fabs(bound));
      if (B < -tol || B > bound + tol) {
        ok = false;
        detail = "B property fails at z = " + std::to_string(z) + ": B = " + std::to_string(B) +
                 ", (b(z) - b(0)) z = " + std::to_string(bound);
      }
    }
    add("Legendre transform bounds", ok, detail);
  }

  report.pass = true;
  for (const auto& c : report.clauses) report.pass = report.pass && c.pass;
  return report;
}

} // namespace porous
