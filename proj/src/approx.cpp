#include "eebeam/approx.hpp"

#include <cmath>
#include <stdexcept>

namespace eebeam {

double qol_bound(const cvec& h, const cvec& w, double beta, const cvec& w0, double beta0) {
  if (beta0 <= 0.0) throw std::domain_error("qol_bound: beta0 must be positive");
  const cplx g = h.dot(w);    // h^H w
  const cplx g0 = h.dot(w0);  // h^H w0
  const double slope = std::abs(g0) / beta0;
  return 2.0 * std::real(std::conj(g0) * g) / beta0 - slope * slope * beta;
}

double ratio_bound(double r, double z, double r0, double z0) {
  if (z0 <= 0.0) throw std::domain_error("ratio_bound: z0 must be positive");
  const double q = r0 / z0;
  return 2.0 * q * r - q * q * z;
}

double inv1p_tangent(double gamma, double gamma0) {
  const double d = 1.0 + gamma0;
  return 1.0 / d - (gamma - gamma0) / (d * d);
}

double log_quadratic_bound(double gamma, double gamma0) {
  if (gamma < 0.0 || gamma0 < 0.0)
    throw std::domain_error("log_quadratic_bound: arguments must be nonnegative");
  const double step = gamma - gamma0;
  return std::log1p(gamma0) + step / (1.0 + gamma0) - 0.5 * step * step;
}

}  // namespace eebeam
