#include "hcd/jacobian.hpp"

#include <cmath>

namespace hcd {

namespace {

// columns of the difference stencil: d(exp)/d(coordinate)
struct Column {
    double x, y, z;
};

Column central(const Heisenberg& H, const Covector& cov, double t, int coord, double h) {
    Covector up = cov, dn = cov;
    if (coord == 0) {
        up.r += h;
        dn.r -= h;
    } else if (coord == 1) {
        up.phi += h;
        dn.phi -= h;
    } else {
        up.omega += h;
        dn.omega -= h;
    }
    const HPoint a = H.exp_map(up, t);
    const HPoint b = H.exp_map(dn, t);
    return {(a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h), (a.z - b.z) / (2.0 * h)};
}

void guard_dual_corners(const Heisenberg& H, const Covector& cov, double t, double h) {
    const auto& corners = H.dual().corner_angles();
    if (corners.empty()) return;
    const double P = H.dual().period();
    const double lo = std::min(cov.phi - h, cov.phi + cov.omega * t - h * (1.0 + std::abs(t)));
    const double hi = std::max(cov.phi + h, cov.phi + cov.omega * t + h * (1.0 + std::abs(t)));
    for (double c : corners) {
        // does any lift of the corner angle land in [lo, hi]?
        const double k0 = std::floor((lo - c) / P);
        for (int k = -1; k <= 2; ++k) {
            const double lift = c + (k0 + k) * P;
            if (lift >= lo && lift <= hi)
                throw CornerEncountered("finite-difference stencil crosses a dual corner angle");
        }
    }
}

}  // namespace

JacobianSample exp_jacobian(const Heisenberg& H, const Covector& cov, double t) {
    if (cov.r <= 0.0) throw ZeroSpeed("exp_jacobian requires r > 0");
    if (cov.omega == 0.0) throw Error("exp_jacobian requires omega != 0");
    if (!(std::abs(t) < H.cut_time(cov))) throw Error("exp_jacobian requires |t| < cut time");

    const double h = std::max(1e-6, 1e-4 * std::abs(t));
    guard_dual_corners(H, cov, t, h);

    const Column cr = central(H, cov, t, 0, h);
    const Column cphi = central(H, cov, t, 1, h);
    const Column comega = central(H, cov, t, 2, h);

    JacobianSample s;
    s.cov = cov;
    s.t = t;
    s.step_r = s.step_phi = s.step_omega = h;
    s.detM1 = cr.x * cphi.y - cr.y * cphi.x;
    s.detM2 = cr.x * comega.y - cr.y * comega.x;
    s.detM3 = cphi.x * comega.y - cphi.y * comega.x;
    s.dz_dr = cr.z;
    s.dz_dphi = cphi.z;
    s.dz_domega = comega.z;
    s.J = std::abs(s.dz_domega * s.detM1 - s.dz_dphi * s.detM2 + s.dz_dr * s.detM3);
    // same matrix expanded along the x-row
    s.J_direct = std::abs(cr.x * (cphi.y * comega.z - cphi.z * comega.y) -
                          cphi.x * (cr.y * comega.z - cr.z * comega.y) +
                          comega.x * (cr.y * cphi.z - cr.z * cphi.y));
    return s;
}

ExponentFit scaling_exponent(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 6) throw Error("scaling_exponent needs at least 6 samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(samples.size());
    ExponentFit fit;
    for (const auto& [t, v] : samples) {
        if (!(v > 0.0)) throw NonPositiveValue("scaling_exponent needs positive values");
        if (!(t > 0.0)) throw NonPositiveValue("scaling_exponent needs positive times");
        const double lx = std::log(t), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
        fit.t_grid.push_back(t);
    }
    const double vx = sxx - sx * sx / n;
    const double cxy = sxy - sx * sy / n;
    const double vy = syy - sy * sy / n;
    fit.slope = cxy / vx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r2 = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
    return fit;
}

double midpoint_jacobian(const Heisenberg& H, const Covector& cov, double t) {
    if (cov.r <= 0.0) throw ZeroSpeed("midpoint_jacobian requires r > 0");
    if (cov.omega == 0.0) throw Error("midpoint_jacobian requires omega != 0");
    if (!(t > 0.0 && t < H.cut_time(cov))) throw Error("midpoint_jacobian requires 0 < t < cut");

    const HPoint q = H.exp_map(cov, t);
    const HPoint e = identity();
    double col[3][3];
    const double base[3] = {q.x, q.y, q.z};
    for (int c = 0; c < 3; ++c) {
        const double h = std::max(1e-9, 1e-5 * std::abs(base[c])) +
                         1e-6 * (std::abs(q.x) + std::abs(q.y));
        HPoint up = q, dn = q;
        (c == 0 ? up.x : c == 1 ? up.y : up.z) += h;
        (c == 0 ? dn.x : c == 1 ? dn.y : dn.z) -= h;
        const HPoint a = H.t_midpoint(e, up, 0.5);
        const HPoint b = H.t_midpoint(e, dn, 0.5);
        col[c][0] = (a.x - b.x) / (2.0 * h);
        col[c][1] = (a.y - b.y) / (2.0 * h);
        col[c][2] = (a.z - b.z) / (2.0 * h);
    }
    const double det = col[0][0] * (col[1][1] * col[2][2] - col[1][2] * col[2][1]) -
                       col[1][0] * (col[0][1] * col[2][2] - col[0][2] * col[2][1]) +
                       col[2][0] * (col[0][1] * col[1][2] - col[0][2] * col[1][1]);
    return std::abs(det);
}

std::vector<double> dyadic_grid(int hi_pow, int lo_pow) {
    std::vector<double> g;
    for (int k = hi_pow; k <= lo_pow; ++k) g.push_back(std::ldexp(1.0, -k));
    return g;
}

}  // namespace hcd
