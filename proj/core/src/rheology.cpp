#include "nsv/rheology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsv/error.hpp"

namespace nsv {

double RheologyParams::q_min() const { return std::max(2.0 * p_conjugate(), 3.0); }

void RheologyParams::validate() const {
  std::ostringstream os;
  os.precision(17);
  if (!(p > 1.0)) {
    os << "power-law index condition violated: p=" << p << " must exceed 2d/(d+2) = 1 in two dimensions";
    throw ConfigError(os.str());
  }
  if (!(kappa > 0.0)) {
    os << "relaxation condition violated: kappa=" << kappa << " must be positive";
    throw ConfigError(os.str());
  }
  if (!(nu >= 0.0)) {
    os << "viscosity condition violated: nu=" << nu << " must be non-negative";
    throw ConfigError(os.str());
  }
  if (!(alpha >= 0.0)) {
    os << "stabilizer weight condition violated: alpha=" << alpha << " must be non-negative";
    throw ConfigError(os.str());
  }
  if (!(q > 1.0)) {
    os << "stabilizer exponent condition violated: q=" << q << " must exceed 1";
    throw ConfigError(os.str());
  }
  if (alpha > 0.0 && q < q_min()) {
    os << "stabilizer exponent condition violated: q=" << q << " < max{2p', 3} = " << q_min()
       << " (p'=" << p_conjugate() << ")";
    throw ConfigError(os.str());
  }
}

SymTensorField power_law_stress(const SymTensorField& D, const RheologyParams& params) {
  if (!D.is_symmetric(0.0)) throw ValidationError("power_law_stress: input tensor field is not symmetric");
  SymTensorField A(D.n);
  for (std::size_t i = 0; i < D.xx.size(); ++i) {
    power_law_point(D.xx[i], D.xy[i], D.yy[i], params.p, A.xx[i], A.xy[i], A.yy[i]);
    A.yx[i] = A.xy[i];
  }
  return A;
}

GridVector stabilizer(const GridVector& u, const RheologyParams& params) {
  GridVector a(u.n);
  for (std::size_t i = 0; i < u.x.size(); ++i) {
    const double s = params.alpha * stabilizer_factor(u.x[i], u.y[i], params.q);
    a.x[i] = s * u.x[i];
    a.y[i] = s * u.y[i];
  }
  return a;
}

namespace {

double frob(const Mat2& m) { return std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]); }

Mat2 apply_power_law(const Mat2& m, double p) {
  const double r = frob(m);
  const double s = r > 0.0 ? pow_abs(r, p - 2.0) : 0.0;
  return {s * m[0], s * m[1], s * m[2], s * m[3]};
}

void require_symmetric(const Mat2& m) {
  if (m[1] != m[2]) throw ValidationError("monotonicity_gap: matrix is not symmetric");
}

}  // namespace

MonotonicityReport monotonicity_gap(const Mat2& M, const Mat2& N, double p) {
  require_symmetric(M);
  require_symmetric(N);
  if (!(p > 1.0)) throw ValidationError("monotonicity_gap: p must exceed 1");
  const Mat2 am = apply_power_law(M, p), an = apply_power_law(N, p);
  Mat2 d{};
  double prod = 0.0;
  for (int i = 0; i < 4; ++i) {
    d[i] = M[i] - N[i];
    prod += (am[i] - an[i]) * d[i];
  }
  const double dn = frob(d);
  MonotonicityReport r;
  r.product = prod;
  if (p >= 2.0) {
    r.lhs = std::pow(2.0, 1.0 - p) * pow_abs(dn, p);
    r.rhs = prod;
  } else {
    const double w = pow_abs(frob(M), p) + pow_abs(frob(N), p);
    r.lhs = (p - 1.0) * dn * dn;
    r.rhs = w > 0.0 ? prod * std::pow(w, (2.0 - p) / p) : 0.0;
  }
  const double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
  r.holds = r.rhs >= r.lhs - 1e-12 * scale;
  return r;
}

}  // namespace nsv
