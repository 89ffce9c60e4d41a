#include "hcd/heisenberg.hpp"

#include <algorithm>
#include <cmath>

namespace hcd {

namespace {
// below this sweep the closed forms lose too many digits to cancellation
constexpr double kSweepSwitch = 1e-4;
}  // namespace

Heisenberg::Heisenberg(const NormSpec& spec) : spec_(spec) {
    spec_.validate();
    primal_ = std::make_shared<const ConvexBody>(unit_ball(spec_));
}

double Heisenberg::dual_to_primal_angle(double psi) const { return correspond(dual(), psi); }

double Heisenberg::primal_to_dual_angle(double theta) const {
    return correspond(primal(), theta);
}

double Heisenberg::dual_correspondence_derivative(double psi) const {
    const double h = 1e-5 * dual().period();
    const double a = dual_to_primal_angle(psi + h);
    double b = dual_to_primal_angle(psi - h);
    // unwrap across the period seam
    const double P = primal().period();
    double d = a - b;
    d = std::fmod(d, P);
    if (d < -0.5 * P) d += P;
    if (d > 1.5 * P) d -= P;
    return d / (2.0 * h);
}

HPoint Heisenberg::exp_small_sweep(const Covector& cov, double t) const {
    const double theta = dual_to_primal_angle(cov.phi);
    const Vec2 P = primal().trig_eval(theta);
    const Vec2 Q = dual().trig_eval(cov.phi);
    const double k = dual_correspondence_derivative(cov.phi);
    const double dl = cov.omega * t;
    const double rt = cov.r * t;
    return {rt * (P.x - 0.5 * dl * k * Q.y), rt * (P.y + 0.5 * dl * k * Q.x),
            k * cov.r * cov.r * cov.omega * t * t * t / 12.0};
}

HPoint Heisenberg::exp_map(const Covector& cov, double t) const {
    if (cov.r == 0.0) return {};
    if (cov.omega == 0.0) {
        const double theta = dual_to_primal_angle(cov.phi);
        const Vec2 P = primal().trig_eval(theta);
        return {cov.r * P.x * t, cov.r * P.y * t, 0.0};
    }
    const double dl = cov.omega * t;
    if (std::abs(dl) < kSweepSwitch) return exp_small_sweep(cov, t);
    const Vec2 Q0 = dual().trig_eval(cov.phi);
    const Vec2 Q1 = dual().trig_eval(cov.phi + dl);
    const double s = cov.r / cov.omega;
    return {s * (Q1.y - Q0.y), -s * (Q1.x - Q0.x),
            0.5 * s * (cov.r / cov.omega) * (dl + Q1.x * Q0.y - Q1.y * Q0.x)};
}

double Heisenberg::cut_time(const Covector& cov) const {
    if (cov.r <= 0.0) throw ZeroSpeed("cut time undefined for the constant curve");
    if (cov.omega == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * S_dual() / std::abs(cov.omega);
}

GeodesicArc Heisenberg::arc(const Covector& cov, double horizon) const {
    GeodesicArc a;
    a.start = identity();
    a.cov = cov;
    a.horizon = horizon;
    a.minimal = horizon < cut_time(cov);
    return a;
}

Covector Heisenberg::log_map(const HPoint& q) const {
    const double planar = std::hypot(q.x, q.y);
    if (planar == 0.0)
        throw OnVerticalAxis("no unique geodesic onto the vertical axis {x=y=0}");

    const ConvexBody& D = dual();
    Covector cov;
    bool solved = false;
    if (q.z == 0.0) {
        // straight geodesic: zero swept area
        const double r = primal().gauge({q.x, q.y});
        const double theta = primal().angle_of({q.x / r, q.y / r}, 1e-6);
        cov = {primal_to_dual_angle(theta), 0.0, r};
        solved = true;
    } else if (std::abs(q.z) < 1e-3 * planar * planar) {
        // nearly straight target: the cap/chord ratio is numerically dead,
        // solve through the same small-sweep expansion exp_map evaluates
        try {
            Vec2 w{q.x, q.y};
            Covector trial;
            double kappa = 0.0;
            for (int it = 0; it < 8; ++it) {
                const double r = primal().gauge(w);
                const double theta = primal().angle_of({w.x / r, w.y / r}, 1e-5);
                const double phi = primal_to_dual_angle(theta);
                kappa = dual_correspondence_derivative(phi);
                if (!(kappa > 1e-9)) break;
                const double delta = 12.0 * q.z / (kappa * r * r);
                const Vec2 Q = D.trig_eval(phi);
                const Vec2 next{q.x + 0.5 * r * delta * kappa * Q.y,
                                q.y - 0.5 * r * delta * kappa * Q.x};
                trial = {phi, delta, r};
                if (norm_eu(next - w) < 1e-14 * planar) {
                    w = next;
                    break;
                }
                w = next;
            }
            if (kappa > 1e-9 && std::abs(trial.omega) < 0.95 * kSweepSwitch) {
                cov = trial;
                solved = true;
            }
        } catch (const Error&) {
            // fall through to the geometric solve
        }
    }
    if (!solved) {
        // The planar projection is a scaled rotated chord of the dual sphere
        // and z is the area of the matching cap, so cap/len^2 depends only on
        // the line cutting the chord. Bisect the offset of the line family
        // with direction rot90_ccw(x, y); the ratio is strictly monotone in
        // the offset (level-line monotonicity), which the bracket verifies.
        const Vec2 n = Vec2{q.x, q.y} / planar;
        const double target = std::abs(q.z) / (planar * planar);
        const auto [smin, smax] = D.support_range(n);
        const double span = smax - smin;

        // The cap shrinks to zero at the smax tangency and fills the whole
        // body at smin, so a numerically degenerate chord still has a
        // definite score sign given by which end it sits at.
        const double mid_s = 0.5 * (smin + smax);
        auto score = [&](double s) {
            Chord ch;
            try {
                ch = D.chord_at(n, s);
            } catch (const Error&) {
                return s > mid_s ? -1e30 : 1e30;
            }
            if (!(ch.len > 0.0) || !(ch.cap > 0.0)) return s > mid_s ? -1e30 : 1e30;
            const double v = std::log(ch.cap / (ch.len * ch.len)) - std::log(target);
            return std::isfinite(v) ? v : (s > mid_s ? -1e30 : 1e30);
        };

        double lo = smin + 1e-9 * span;
        double hi = smax - 1e-9 * span;
        double flo = score(lo);
        double fhi = score(hi);
        if (flo * fhi > 0.0) {
            // scan for a sign-change bracket before giving up
            bool found = false;
            const int kScan = 512;
            double prev_s = lo, prev_f = flo;
            for (int i = 1; i <= kScan; ++i) {
                const double s = lo + (hi - lo) * i / kScan;
                const double f = score(s);
                if (prev_f * f <= 0.0) {
                    lo = prev_s;
                    hi = s;
                    flo = prev_f;
                    fhi = f;
                    found = true;
                    break;
                }
                prev_s = s;
                prev_f = f;
            }
            if (!found)
                throw NoConvergence("log_map: no bracket for the area/chord ratio", lo, hi,
                                    std::numeric_limits<double>::quiet_NaN());
        }

        // bisection with secant acceleration inside a verified bracket
        double s_best = 0.5 * (lo + hi);
        double best_abs = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 200; ++it) {
            double s;
            const bool huge = std::abs(flo) > 1e20 || std::abs(fhi) > 1e20;
            if (!huge && fhi != flo) {
                s = lo - flo * (hi - lo) / (fhi - flo);
                const double guard = 1e-3 * (hi - lo);
                if (!(s > lo + guard && s < hi - guard)) s = 0.5 * (lo + hi);
            } else {
                s = 0.5 * (lo + hi);
            }
            const double f = score(s);
            if (std::abs(f) < best_abs) {
                best_abs = std::abs(f);
                s_best = s;
            }
            if (std::abs(f) < 1e-14 || (hi - lo) < 4e-16 * span) break;
            if ((f < 0.0) == (flo < 0.0)) {
                lo = s;
                flo = f;
            } else {
                hi = s;
                fhi = f;
            }
        }

        const Chord ch = D.chord_at(n, s_best);
        if (q.z > 0.0) {
            cov.phi = ch.theta_a;
            cov.omega = ch.sweep;
        } else {
            cov.phi = ch.theta_b;
            cov.omega = -ch.sweep;
        }
        cov.r = std::abs(cov.omega) * planar / ch.len;
    }

    const HPoint e = exp_map(cov, 1.0);
    const double qn = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    const double res = std::sqrt((e.x - q.x) * (e.x - q.x) + (e.y - q.y) * (e.y - q.y) +
                                 (e.z - q.z) * (e.z - q.z));
    if (!(res <= 1e-8 * (1.0 + qn)))
        throw NoConvergence("log_map: residual above tolerance", cov.phi, cov.omega, res);
    return cov;
}

double Heisenberg::distance(const HPoint& p, const HPoint& q) const {
    const HPoint v = mul(inverse(p), q);
    if (std::hypot(v.x, v.y) == 0.0) return 2.0 * std::sqrt(S_dual() * std::abs(v.z));
    return log_map(v).r;
}

HPoint Heisenberg::t_midpoint(const HPoint& p, const HPoint& q, double t) const {
    const HPoint v = mul(inverse(p), q);
    const Covector cov = log_map(v);
    return mul(p, exp_map(cov, t));
}

HPoint Heisenberg::inverse_geodesic(const HPoint& m, const HPoint& q) const {
    const HPoint v = mul(inverse(m), q);
    const Covector cov = log_map(v);
    return mul(m, exp_map(cov, -1.0));
}

double Heisenberg::swept_area_residual(const Covector& cov, double t, int grid) const {
    if (cov.r <= 0.0) throw ZeroSpeed("swept area undefined for the constant curve");
    const HPoint end = exp_map(cov, t);
    double area = 0.0;
    Vec2 prev{0.0, 0.0};
    for (int k = 1; k <= grid; ++k) {
        const HPoint g = exp_map(cov, t * k / grid);
        const Vec2 cur{g.x, g.y};
        area += 0.5 * cross(prev, cur);
        prev = cur;
    }
    return std::abs(end.z - area);
}

}  // namespace hcd
