#pragma once

#include <limits>
#include <memory>

#include "hcd/convex_body.hpp"

namespace hcd {

// Group element of H = (R^3, *)
struct HPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline HPoint mul(const HPoint& p, const HPoint& q) {
    return {p.x + q.x, p.y + q.y, p.z + q.z + 0.5 * (p.x * q.y - q.x * p.y)};
}
inline HPoint inverse(const HPoint& p) { return {-p.x, -p.y, -p.z}; }
inline HPoint identity() { return {}; }

// Initial datum of a normal extremal: dual angle phi on the polar unit ball,
// sweep rate omega, speed r >= 0.
struct Covector {
    double phi = 0.0;
    double omega = 0.0;
    double r = 0.0;
};

struct GeodesicArc {
    HPoint start;
    Covector cov;
    double horizon = 1.0;  // defined on [0, horizon]
    bool minimal = false;  // horizon < cut time
    double length() const { return cov.r * horizon; }
};

// Sub-Finsler Heisenberg group over a strictly convex planar norm. Immutable
// and safe to share across threads.
class Heisenberg {
  public:
    explicit Heisenberg(const NormSpec& spec);

    const ConvexBody& primal() const { return *primal_; }
    const ConvexBody& dual() const { return primal_->polar_body(); }
    double S() const { return primal().total_area(); }
    double S_dual() const { return dual().total_area(); }
    const NormSpec& norm_spec() const { return spec_; }

    HPoint exp_map(const Covector& cov, double t) const;
    double cut_time(const Covector& cov) const;  // throws ZeroSpeed
    GeodesicArc arc(const Covector& cov, double horizon) const;

    // Unique covector with exp_map(cov, 1) = q and cut_time(cov) > 1.
    // Throws OnVerticalAxis when (x, y) = (0, 0), NoConvergence on solver
    // failure.
    Covector log_map(const HPoint& q) const;

    double distance(const HPoint& p, const HPoint& q) const;
    HPoint t_midpoint(const HPoint& p, const HPoint& q, double t) const;
    HPoint inverse_geodesic(const HPoint& m, const HPoint& q) const;

    // |z(t) - oriented shoelace area of the planar projection| on a fine grid
    double swept_area_residual(const Covector& cov, double t, int grid = 10000) const;

    // correspondence between dual and primal angles (C-sub / C-degree)
    double dual_to_primal_angle(double psi) const;
    double primal_to_dual_angle(double theta) const;
    // derivative of dual_to_primal_angle, central difference
    double dual_correspondence_derivative(double psi) const;

  private:
    NormSpec spec_;
    std::shared_ptr<const ConvexBody> primal_;

    HPoint exp_small_sweep(const Covector& cov, double t) const;
};

}  // namespace hcd
