#pragma once

#include "eebeam/common.hpp"

namespace eebeam {

/// Tangent lower bound on the quadratic-over-linear form |h^H w|^2 / beta,
/// expanded at (w0, beta0): 2 Re(w0^H h h^H w)/beta0 - (|h^H w0|/beta0)^2 beta.
/// Exact at the expansion point; a global lower bound for beta > 0.
double qol_bound(const cvec& h, const cvec& w, double beta, const cvec& w0, double beta0);

/// Tangent lower bound on r^2/z at (r0, z0): (2 r0/z0) r - (r0/z0)^2 z.
double ratio_bound(double r, double z, double r0, double z0);

/// Tangent of the convex map 1/(1+gamma) at gamma0; a lower bound for gamma >= 0.
double inv1p_tangent(double gamma, double gamma0);

/// Concave quadratic lower bound on ln(1+gamma) at gamma0 (Lipschitz-gradient
/// construction, L = 1): ln(1+gamma0) + (gamma-gamma0)/(1+gamma0) - (gamma-gamma0)^2/2.
double log_quadratic_bound(double gamma, double gamma0);

}  // namespace eebeam
