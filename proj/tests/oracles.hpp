// Test-side oracles, independent of the library's evaluation paths.
#pragma once

#include <cmath>
#include <functional>

#include "hcd/heisenberg.hpp"

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m);
    const double right = simpson(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    return adaptive_simpson(f, a, b, simpson(f, a, b), tol, 48);
}

// area of the unit lp ball: 4 * int_0^1 (1-x^p)^(1/p) dx
inline double lp_ball_area(double p) {
    return 4.0 * integrate([p](double x) { return std::pow(1.0 - std::pow(x, p), 1.0 / p); }, 0.0,
                           1.0, 1e-13);
}

// area of the lens: two circular segments of radius R cut at height c
inline double lens_area(double c, double R) {
    const double xc = std::sqrt(R * R - c * c);
    return 2.0 * R * R * std::asin(xc / R) - 2.0 * c * xc;
}

// RK4 of the control system xdot = u1, ydot = u2, zdot = (x u2 - y u1)/2
// with the geodesic control u(t) = r * P_Omega(C_sub(phi + omega t)). The
// control is piecewise analytic but loses smoothness where the dual angle
// crosses an axis point of the dual sphere, so the integration is split at
// those times to keep full fourth-order accuracy.
inline hcd::HPoint rk4_geodesic(const hcd::Heisenberg& H, const hcd::Covector& cov, double t_end,
                                int steps) {
    struct State {
        double x, y, z;
    };
    auto control = [&](double t) -> hcd::Vec2 {
        const double psi = cov.phi + cov.omega * t;
        const double theta = H.dual_to_primal_angle(psi);
        const hcd::Vec2 P = H.primal().trig_eval(theta);
        return {cov.r * P.x, cov.r * P.y};
    };
    auto deriv = [&](const State& s, double t) -> State {
        const hcd::Vec2 u = control(t);
        return {u.x, u.y, 0.5 * (s.x * u.y - s.y * u.x)};
    };

    // split times: dual angle hits an axis point of the dual sphere
    std::vector<double> cuts{0.0, t_end};
    if (cov.omega != 0.0) {
        const double P = H.dual().period();
        for (const hcd::Vec2 dir :
             {hcd::Vec2{1, 0}, hcd::Vec2{0, 1}, hcd::Vec2{-1, 0}, hcd::Vec2{0, -1}}) {
            double b;
            try {
                const double g = H.dual().gauge(dir);
                b = H.dual().angle_of({dir.x / g, dir.y / g});
            } catch (const hcd::Error&) {
                continue;
            }
            const double k0 = std::floor((cov.phi - b) / P);
            for (int k = -2; k < 4 + static_cast<int>(std::abs(cov.omega) * t_end / P); ++k) {
                const double t = (b + (k0 + k) * P - cov.phi) / cov.omega;
                if (t > 1e-12 && t < t_end - 1e-12) cuts.push_back(t);
            }
        }
        std::sort(cuts.begin(), cuts.end());
    }

    State s{0.0, 0.0, 0.0};
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double a = cuts[seg], b = cuts[seg + 1];
        if (b - a < 1e-15) continue;
        const int n = std::max(4, static_cast<int>(std::ceil(steps * (b - a) / t_end)));
        const double h = (b - a) / n;
        for (int k = 0; k < n; ++k) {
            const double t = a + h * k;
            const State k1 = deriv(s, t);
            const State s2{s.x + 0.5 * h * k1.x, s.y + 0.5 * h * k1.y, s.z + 0.5 * h * k1.z};
            const State k2 = deriv(s2, t + 0.5 * h);
            const State s3{s.x + 0.5 * h * k2.x, s.y + 0.5 * h * k2.y, s.z + 0.5 * h * k2.z};
            const State k3 = deriv(s3, t + 0.5 * h);
            const State s4{s.x + h * k3.x, s.y + h * k3.y, s.z + h * k3.z};
            const State k4 = deriv(s4, t + h);
            s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
            s.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
            s.z += h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
        }
    }
    return {s.x, s.y, s.z};
}

}  // namespace oracle
