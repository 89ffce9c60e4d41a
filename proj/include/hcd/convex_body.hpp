#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "hcd/errors.hpp"
#include "hcd/geometry.hpp"

namespace hcd {

enum class NormFamily { Euclidean, Lp, Lens, LensPolar, Table };

// Declarative description of a planar norm. Grammar accepted by parse():
//   euclidean | lp:<p> | lens:<c>,<R> | table:@<path-to-csv>
struct NormSpec {
    NormFamily family = NormFamily::Euclidean;
    double p = 2.0;                 // Lp
    double lens_c = 1.0;            // Lens / LensPolar
    double lens_R = 2.0;
    std::vector<Vec2> table;        // Table, counterclockwise
    int resolution = 16384;

    static NormSpec parse(const std::string& text);
    std::string label() const;
    void validate() const;  // throws InvalidSpec
};

struct Regularity {
    bool strictly_convex = false;
    bool c1 = false;
    bool c11 = false;
    bool smooth = false;
};

// Maximal straight run on a boundary. psi_end may exceed the period when the
// run wraps past the angle origin; psi_start is always reduced.
struct FlatSegment {
    double psi_start = 0.0;
    double psi_end = 0.0;
    Vec2 a;            // endpoint at psi_start
    Vec2 b;            // endpoint at psi_end
    Vec2 outward;      // unit outward normal of the supporting line
    double xbar = 0.0; // offset of the supporting line: dot(p, outward) = xbar on the run
};

// Chord of the boundary cut by a line; `a` sits on the stretch where
// dot(p, n) increases counterclockwise, `b` on the decreasing stretch, so the
// counterclockwise arc a -> b is the cap on the +n side.
struct Chord {
    Vec2 a, b;
    double theta_a = 0.0;
    double theta_b = 0.0;
    double sweep = 0.0;  // theta_b - theta_a reduced into (0, period)
    double len = 0.0;    // Euclidean |b - a|
    double cap = 0.0;    // area between the chord and the ccw arc a -> b
};

namespace detail {
// Analytic boundary curve; params live on [0, period) with the convention
// that param 0 is the crossing of the positive x-axis.
struct Curve {
    virtual ~Curve() = default;
    virtual double period() const = 0;
    virtual Vec2 point(double s) const = 0;
    virtual Vec2 tangent(double s) const = 0;
    // gradient of the gauge at point(s); undefined at corner params
    virtual Vec2 gradient(double s) const = 0;
    // params where the integrand loses smoothness (corners, arc junctions)
    virtual std::vector<double> breakpoints() const { return {}; }
    virtual std::vector<double> corner_params() const { return {}; }
};

}  // namespace detail

class ConvexBody;

namespace detail {
ConvexBody body_from_curve(std::shared_ptr<const Curve> curve, int n, NormFamily fam,
                           Regularity reg, double p, double c, double R,
                           std::function<double(Vec2)> gauge_fn);
ConvexBody body_from_polyline(std::vector<Vec2> v, Regularity reg);
}  // namespace detail

class ConvexBody {
  public:
    ConvexBody() = default;

    double total_area() const { return area_; }   // S
    double period() const { return 2.0 * area_; } // trig period 2S
    std::size_t resolution() const { return pts_.size(); }
    const std::vector<Vec2>& boundary() const { return pts_; }
    Regularity regularity() const { return reg_; }
    NormFamily family() const { return family_; }

    // reduce into [0, period); idempotent
    double reduce_angle(double theta) const;

    // P_theta = (cos_O(theta), sin_O(theta))
    Vec2 trig_eval(double theta) const;

    // inverse of trig_eval; throws NotOnBoundary
    double angle_of(Vec2 p, double tol = 1e-6) const;

    // Minkowski functional of the body
    double gauge(Vec2 v) const;

    // gauge gradient at P_theta; throws CornerAngle at corners
    Vec2 gradient_at(double theta) const;

    const std::vector<double>& corner_angles() const { return corner_thetas_; }
    bool is_corner(double theta, double tol = 1e-12) const;
    const std::vector<FlatSegment>& flat_runs() const { return flats_; }

    // one-sided gauge gradients just before/after a corner angle
    std::pair<Vec2, Vec2> corner_gradients(double theta) const;

    // chord cut by the line {p : dot(p, n_unit) = s}; s must lie strictly
    // inside the support range of n_unit
    Chord chord_at(Vec2 n_unit, double s) const;
    std::pair<double, double> support_range(Vec2 n_unit) const;

    // polar body, built on first use and cached (bodies are immutable)
    const ConvexBody& polar_body() const;

    friend ConvexBody unit_ball(const NormSpec& spec);
    friend ConvexBody polar(const ConvexBody& body);
    friend ConvexBody detail::body_from_curve(std::shared_ptr<const detail::Curve>, int,
                                              NormFamily, Regularity, double, double, double,
                                              std::function<double(Vec2)>);
    friend ConvexBody detail::body_from_polyline(std::vector<Vec2>, Regularity);

  private:
    struct Cache;

    std::vector<Vec2> pts_;        // N samples, ccw, pts_[0] on the +x axis
    std::vector<double> theta_;    // N+1 cumulative angles, theta_[N] = 2S
    std::vector<double> param_;    // N+1 curve params
    std::vector<double> cap3_;     // per-edge cubic cap coefficient
    std::vector<double> cap4_;     // per-edge quartic cap coefficient
    std::vector<double> az_;       // N+1 unwrapped azimuths for ray lookup
    double area_ = 0.0;
    Regularity reg_;
    NormFamily family_ = NormFamily::Table;
    double fam_p_ = 2.0, fam_c_ = 0.0, fam_R_ = 0.0;
    std::shared_ptr<const detail::Curve> curve_;  // null => polyline body
    std::function<double(Vec2)> gauge_fn_;        // analytic gauge when known
    std::vector<double> corner_thetas_;
    std::vector<double> corner_params_;
    std::vector<FlatSegment> flats_;
    std::shared_ptr<Cache> cache_;

    void build(std::shared_ptr<const detail::Curve> curve, std::vector<double> params,
               bool closed_params_given);
    void finalize_metadata();
    std::size_t locate_theta(double theta_reduced) const;
    Vec2 point_on_edge(std::size_t i, double u) const;
    double theta_within_edge(std::size_t i, double u) const;  // includes cap poly
    // boundary hit of the ray through direction dir (unit not required);
    // returns (edge index, u within edge, point)
    struct RayHit {
        std::size_t edge;
        double u;
        Vec2 p;
    };
    RayHit ray_hit(Vec2 dir) const;
    struct CrossHit {
        std::size_t edge;
        double u;
        Vec2 p;
        double theta;
    };
    CrossHit cross_hit(Vec2 n, double s, std::size_t edge) const;
    std::size_t extremum_index(Vec2 n, bool want_max) const;
};

// Operations of the convex trigonometry module.
ConvexBody unit_ball(const NormSpec& spec);
ConvexBody polar(const ConvexBody& body);

// C-degree correspondence: angle theta on the body -> angle psi on the polar
// body such that the Pythagorean-type identity holds. Throws CornerAngle at
// corners with the interval endpoints as payload.
double correspond(const ConvexBody& body, double theta);

// (sin_O'(theta), cos_O'(theta)) = (cos_O°(psi), -sin_O°(psi))
std::pair<double, double> trig_derivative(const ConvexBody& body, double theta);

// maximal straight runs of the boundary; empty for strictly convex bodies
std::vector<FlatSegment> flat_parts(const ConvexBody& body);

}  // namespace hcd
