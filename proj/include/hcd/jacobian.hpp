#pragma once

#include <utility>
#include <vector>

#include "hcd/heisenberg.hpp"

namespace hcd {

// Finite-difference sample of the exponential-map Jacobian at (cov, t),
// assembled as the cofactor expansion along the z-row.
struct JacobianSample {
    Covector cov;
    double t = 0.0;
    double J = 0.0;         // |dz_domega detM1 - dz_dphi detM2 + dz_dr detM3|
    double J_direct = 0.0;  // same 3x3 determinant expanded along the x-row
    double detM1 = 0.0;     // d(x,y)/d(r,phi)
    double detM2 = 0.0;     // d(x,y)/d(r,omega)
    double detM3 = 0.0;     // d(x,y)/d(phi,omega)
    double dz_dphi = 0.0;
    double dz_domega = 0.0;
    double dz_dr = 0.0;
    double step_phi = 0.0, step_omega = 0.0, step_r = 0.0;
};

JacobianSample exp_jacobian(const Heisenberg& H, const Covector& cov, double t);

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<double> t_grid;
};

// least-squares slope of log v against log t; needs >= 6 positive samples
ExponentFit scaling_exponent(const std::vector<std::pair<double, double>>& samples);

// |det| of q -> t_midpoint(e, q, 1/2) at q = exp_map(cov, t), central
// differences; equals J(cov, t/2)/J(cov, t) up to stencil error
double midpoint_jacobian(const Heisenberg& H, const Covector& cov, double t);

// default dyadic grid 2^-4 .. 2^-10
std::vector<double> dyadic_grid(int hi_pow = 4, int lo_pow = 10);

}  // namespace hcd
