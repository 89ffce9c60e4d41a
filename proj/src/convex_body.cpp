#include "hcd/convex_body.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hcd {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// 8-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double kGlW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

double gl8_sector(const detail::Curve& c, double s0, double s1) {
    const double mid = 0.5 * (s0 + s1);
    const double half = 0.5 * (s1 - s0);
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double s = mid + half * kGlX[k];
        acc += kGlW[k] * 0.5 * cross(c.point(s), c.tangent(s));
    }
    return acc * half;
}

double adaptive_sector(const detail::Curve& c, double s0, double s1, double whole, int depth) {
    const double mid = 0.5 * (s0 + s1);
    const double left = gl8_sector(c, s0, mid);
    const double right = gl8_sector(c, mid, s1);
    const double two = left + right;
    if (depth <= 0 || std::abs(two - whole) <= 1e-16 * std::abs(two) + 1e-20) return two;
    return adaptive_sector(c, s0, mid, left, depth - 1) +
           adaptive_sector(c, mid, s1, right, depth - 1);
}

// sector area swept along the curve between params
double sector_area(const detail::Curve& c, double s0, double s1) {
    if (s1 <= s0) return 0.0;
    return adaptive_sector(c, s0, s1, gl8_sector(c, s0, s1), 32);
}

double snap_small(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

struct CircleCurve final : detail::Curve {
    double period() const override { return 2.0 * kPi; }
    Vec2 point(double s) const override { return {snap_small(std::cos(s)), snap_small(std::sin(s))}; }
    Vec2 tangent(double s) const override { return {-std::sin(s), std::cos(s)}; }
    Vec2 gradient(double s) const override { return point(s); }
};

struct LpCurve final : detail::Curve {
    double p;
    explicit LpCurve(double p_) : p(p_) {}
    double period() const override { return 2.0 * kPi; }

    static double spow(double v, double e) {
        return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), e), v);
    }

    Vec2 point(double s) const override {
        const double c = snap_small(std::cos(s));
        const double sn = snap_small(std::sin(s));
        const double g = std::pow(std::pow(std::abs(c), p) + std::pow(std::abs(sn), p), 1.0 / p);
        return {c / g, sn / g};
    }
    Vec2 tangent(double s) const override {
        const double c = snap_small(std::cos(s));
        const double sn = snap_small(std::sin(s));
        const double G = std::pow(std::abs(c), p) + std::pow(std::abs(sn), p);
        const double g = std::pow(G, 1.0 / p);
        const double gp = std::pow(G, 1.0 / p - 1.0) *
                          (spow(sn, p - 1.0) * c - spow(c, p - 1.0) * sn);
        // d/ds of (c, sn)/g
        return {(-sn * g - c * gp) / (g * g), (c * g - sn * gp) / (g * g)};
    }
    Vec2 gradient(double s) const override {
        const Vec2 v = point(s);
        return {spow(v.x, p - 1.0), spow(v.y, p - 1.0)};
    }
    std::vector<double> breakpoints() const override {
        return {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
    }
};

// Intersection of the disks of radius R centered at (0, +-c); corners on the
// x-axis at (+-sqrt(R^2-c^2), 0).
struct LensCurve final : detail::Curve {
    double c, R, xc, t0, L;  // L = angular length of one arc
    LensCurve(double c_, double R_) : c(c_), R(R_) {
        xc = std::sqrt(R * R - c * c);
        t0 = std::atan2(c, xc);
        L = kPi - 2.0 * t0;
    }
    double period() const override { return 2.0 * L; }
    Vec2 point(double s) const override {
        if (s < L) {  // upper arc, center (0,-c)
            const double t = t0 + s;
            return {R * std::cos(t), -c + R * std::sin(t)};
        }
        const double t = kPi + t0 + (s - L);  // lower arc, center (0,c)
        return {R * std::cos(t), c + R * std::sin(t)};
    }
    Vec2 tangent(double s) const override {
        const double t = s < L ? t0 + s : kPi + t0 + (s - L);
        return {-R * std::sin(t), R * std::cos(t)};
    }
    Vec2 gradient(double s) const override {
        const Vec2 p = point(s);
        const Vec2 center = s < L ? Vec2{0.0, -c} : Vec2{0.0, c};
        const Vec2 n = (p - center) / R;
        return n / dot(n, p);
    }
    std::vector<double> breakpoints() const override { return {0.0, L}; }
    std::vector<double> corner_params() const override { return {0.0, L}; }
};

// Polar of the lens: two ellipse arcs joined by two vertical segments at
// x = +-1/xc, |y| <= c/xc^2.
struct LensPolarCurve final : detail::Curve {
    double c, R, xc, xb, yb, bb;  // xb = 1/xc, yb = c/xc^2, bb = R/xc^2
    double s1, s2, s3, s4, s5;    // piece ends
    LensPolarCurve(double c_, double R_) : c(c_), R(R_) {
        xc = std::sqrt(R * R - c * c);
        xb = 1.0 / xc;
        yb = c / (xc * xc);
        bb = R / (xc * xc);
        s1 = yb;              // right flat, upper half
        s2 = s1 + kPi;        // upper ellipse arc
        s3 = s2 + 2.0 * yb;   // left flat
        s4 = s3 + kPi;        // lower ellipse arc
        s5 = s4 + yb;         // right flat, lower half
    }
    double period() const override { return s5; }
    Vec2 point(double s) const override {
        if (s < s1) return {xb, s};
        if (s < s2) {
            const double w = s - s1;
            return {xb * std::cos(w), yb + bb * snap_small(std::sin(w))};
        }
        if (s < s3) return {-xb, yb - (s - s2)};
        if (s < s4) {
            const double w = kPi + (s - s3);
            return {xb * std::cos(w), -yb + bb * snap_small(std::sin(w))};
        }
        return {xb, -yb + (s - s4)};
    }
    Vec2 tangent(double s) const override {
        if (s < s1) return {0.0, 1.0};
        if (s < s2) {
            const double w = s - s1;
            return {-xb * std::sin(w), bb * std::cos(w)};
        }
        if (s < s3) return {0.0, -1.0};
        if (s < s4) {
            const double w = kPi + (s - s3);
            return {-xb * std::sin(w), bb * std::cos(w)};
        }
        return {0.0, 1.0};
    }
    Vec2 gradient(double s) const override {
        if (s < s1 || s >= s4) return {xc, 0.0};
        if (s < s2) {  // corresponding point on the upper arc of the lens
            const Vec2 v = point(s);
            return Vec2{0.0, -c} + R * (v / norm_eu(v));
        }
        if (s < s3) return {-xc, 0.0};
        const Vec2 v = point(s);
        return Vec2{0.0, c} + R * (v / norm_eu(v));
    }
    std::vector<double> breakpoints() const override { return {0.0, s1, s2, s3, s4}; }
};

struct PolylineCurve final : detail::Curve {
    std::vector<Vec2> v;  // closed implicitly, param = index
    double period() const override { return static_cast<double>(v.size()); }
    Vec2 at(double s) const {
        const auto n = v.size();
        double is;
        double u = std::modf(s, &is);
        std::size_t i = static_cast<std::size_t>(is) % n;
        return v[i] + u * (v[(i + 1) % n] - v[i]);
    }
    Vec2 point(double s) const override { return at(s); }
    Vec2 tangent(double s) const override {
        const auto n = v.size();
        std::size_t i = static_cast<std::size_t>(std::floor(s)) % n;
        return v[(i + 1) % n] - v[i];
    }
    Vec2 gradient(double s) const override {
        const auto n = v.size();
        std::size_t i = static_cast<std::size_t>(std::floor(s)) % n;
        const Vec2 a = v[i], b = v[(i + 1) % n];
        const double cr = cross(a, b);
        return {(b.y - a.y) / cr, (a.x - b.x) / cr};
    }
};

std::vector<double> piecewise_params(double period, std::vector<double> mandatory, int n) {
    std::sort(mandatory.begin(), mandatory.end());
    mandatory.erase(std::unique(mandatory.begin(), mandatory.end(),
                                [&](double a, double b) { return std::abs(a - b) < 1e-12 * period; }),
                    mandatory.end());
    if (mandatory.empty() || mandatory.front() > 1e-12 * period)
        mandatory.insert(mandatory.begin(), 0.0);
    mandatory.push_back(period);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) + mandatory.size());
    for (std::size_t k = 0; k + 1 < mandatory.size(); ++k) {
        const double a = mandatory[k], b = mandatory[k + 1];
        const int m = std::max(1, static_cast<int>(std::lround(n * (b - a) / period)));
        for (int j = 0; j < m; ++j) out.push_back(a + (b - a) * j / m);
    }
    out.push_back(period);
    return out;
}

double turn_angle(Vec2 e0, Vec2 e1) { return std::atan2(cross(e0, e1), dot(e0, e1)); }

}  // namespace

// ---------------------------------------------------------------------------
// NormSpec

NormSpec NormSpec::parse(const std::string& text) {
    NormSpec spec;
    auto bad = [&](const std::string& why) -> InvalidSpec {
        return InvalidSpec("bad norm spec '" + text + "': " + why);
    };
    if (text == "euclidean") {
        spec.family = NormFamily::Euclidean;
    } else if (text.rfind("lp:", 0) == 0) {
        spec.family = NormFamily::Lp;
        try {
            spec.p = std::stod(text.substr(3));
        } catch (const std::exception&) {
            throw bad("expected lp:<p>");
        }
    } else if (text.rfind("lens:", 0) == 0) {
        spec.family = NormFamily::Lens;
        const std::string rest = text.substr(5);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) throw bad("expected lens:<c>,<R>");
        try {
            spec.lens_c = std::stod(rest.substr(0, comma));
            spec.lens_R = std::stod(rest.substr(comma + 1));
        } catch (const std::exception&) {
            throw bad("expected lens:<c>,<R>");
        }
    } else if (text.rfind("table:@", 0) == 0) {
        spec.family = NormFamily::Table;
        const std::string path = text.substr(7);
        std::ifstream in(path);
        if (!in) throw bad("cannot open table file " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            double x, y;
            char comma;
            if (!(ls >> x >> comma >> y) || comma != ',') throw bad("malformed csv line: " + line);
            spec.table.push_back({x, y});
        }
    } else {
        throw bad("expected euclidean | lp:<p> | lens:<c>,<R> | table:@<path>");
    }
    spec.validate();
    return spec;
}

void NormSpec::validate() const {
    if (resolution < 32) throw InvalidSpec("resolution must be at least 32");
    switch (family) {
        case NormFamily::Euclidean:
            break;
        case NormFamily::Lp:
            if (!(p > 1.0)) throw InvalidSpec("lp requires p > 1");
            break;
        case NormFamily::Lens:
        case NormFamily::LensPolar:
            if (!(lens_c > 0.0)) throw InvalidSpec("lens requires c > 0");
            if (!(lens_R > lens_c)) throw InvalidSpec("lens requires R > c");
            if (std::abs(lens_R - lens_c - 1.0) > 1e-9)
                throw InvalidSpec("lens requires the normalization R - c = 1");
            break;
        case NormFamily::Table: {
            if (table.size() < 8) throw InvalidSpec("table requires at least 8 points");
            const std::size_t n = table.size();
            double scale = 0.0;
            for (const auto& v : table) scale = std::max(scale, norm_eu(v));
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 a = table[i], b = table[(i + 1) % n], c2 = table[(i + 2) % n];
                if (cross(a, b) <= 0.0)
                    throw InvalidSpec("table must wind counterclockwise around an interior origin");
                if (cross(b - a, c2 - b) < -1e-12 * scale * scale)
                    throw InvalidSpec("table points are not convex");
            }
            break;
        }
    }
}

std::string NormSpec::label() const {
    char buf[64];
    switch (family) {
        case NormFamily::Euclidean:
            return "euclidean";
        case NormFamily::Lp:
            std::snprintf(buf, sizeof buf, "lp:%g", p);
            return buf;
        case NormFamily::Lens:
            std::snprintf(buf, sizeof buf, "lens:%g,%g", lens_c, lens_R);
            return buf;
        case NormFamily::LensPolar:
            std::snprintf(buf, sizeof buf, "lens-polar:%g,%g", lens_c, lens_R);
            return buf;
        case NormFamily::Table:
            std::snprintf(buf, sizeof buf, "table:%zupts", table.size());
            return buf;
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ConvexBody

struct ConvexBody::Cache {
    std::once_flag polar_once;
    std::shared_ptr<const ConvexBody> polar;
};

double ConvexBody::reduce_angle(double theta) const {
    const double P = period();
    double r = std::fmod(theta, P);
    if (r < 0.0) r += P;
    if (r >= P) r = 0.0;  // guards fmod rounding at the seam
    return r;
}

std::size_t ConvexBody::locate_theta(double red) const {
    auto it = std::upper_bound(theta_.begin(), theta_.end(), red);
    std::size_t i = static_cast<std::size_t>(it - theta_.begin());
    if (i == 0) return 0;
    i -= 1;
    if (i >= pts_.size()) i = pts_.size() - 1;
    return i;
}

Vec2 ConvexBody::point_on_edge(std::size_t i, double u) const {
    if (u <= 0.0) return pts_[i];
    const std::size_t nxt = (i + 1) % pts_.size();
    if (u >= 1.0) return pts_[nxt];
    if (curve_) {
        const double s = param_[i] + u * (param_[i + 1] - param_[i]);
        return curve_->point(s);
    }
    return pts_[i] + u * (pts_[nxt] - pts_[i]);
}

double ConvexBody::theta_within_edge(std::size_t i, double u) const {
    const Vec2 p = point_on_edge(i, u);
    const double capc = cap3_[i] * u * u * u + cap4_[i] * u * u * u * u;
    return theta_[i] + cross(pts_[i], p) + 2.0 * capc;
}

Vec2 ConvexBody::trig_eval(double theta) const {
    const double red = reduce_angle(theta);
    const std::size_t i = locate_theta(red);
    const double d0 = red - theta_[i];
    const double span = theta_[i + 1] - theta_[i];
    double u = span > 0.0 ? d0 / span : 0.0;
    if (curve_) {
        const double h = param_[i + 1] - param_[i];
        for (int it = 0; it < 3; ++it) {
            const Vec2 p = point_on_edge(i, u);
            const double f = cross(pts_[i], p) +
                             2.0 * (cap3_[i] * u * u * u + cap4_[i] * u * u * u * u) - d0;
            const double s = param_[i] + u * h;
            const double fp = cross(pts_[i], curve_->tangent(s)) * h +
                              2.0 * (3.0 * cap3_[i] * u * u + 4.0 * cap4_[i] * u * u * u);
            if (fp <= 0.0) break;
            u -= f / fp;
            if (u < 0.0) u = 0.0;
            if (u > 1.0) u = 1.0;
        }
    }
    return point_on_edge(i, u);
}

ConvexBody::RayHit ConvexBody::ray_hit(Vec2 dir) const {
    const double n = norm_eu(dir);
    if (n == 0.0) throw NotOnBoundary("zero direction");
    const Vec2 d = dir / n;
    double a = std::atan2(d.y, d.x);
    if (a < 0.0) a += 2.0 * kPi;
    auto it = std::upper_bound(az_.begin(), az_.end(), a);
    std::size_t i = it == az_.begin() ? 0 : static_cast<std::size_t>(it - az_.begin()) - 1;
    if (i >= pts_.size()) i = pts_.size() - 1;
    const std::size_t nxt = (i + 1) % pts_.size();
    const double c0 = cross(d, pts_[i]);
    const double c1 = cross(d, pts_[nxt]);
    double u = (c0 - c1) != 0.0 ? c0 / (c0 - c1) : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    if (curve_) {
        const double h = param_[i + 1] - param_[i];
        for (int k = 0; k < 3; ++k) {
            const double s = param_[i] + u * h;
            const double g = cross(d, curve_->point(s));
            const double gp = cross(d, curve_->tangent(s)) * h;
            if (gp == 0.0) break;
            u = std::clamp(u - g / gp, 0.0, 1.0);
        }
    }
    return {i, u, point_on_edge(i, u)};
}

double ConvexBody::angle_of(Vec2 p, double tol) const {
    if (norm_eu(p) == 0.0) throw NotOnBoundary("origin is not a boundary point");
    const RayHit hit = ray_hit(p);
    if (norm_eu(p - hit.p) > tol * (1.0 + norm_eu(p)))
        throw NotOnBoundary("point is not on the boundary");
    return reduce_angle(theta_within_edge(hit.edge, hit.u));
}

double ConvexBody::gauge(Vec2 v) const {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    if (gauge_fn_) return gauge_fn_(v);
    const RayHit hit = ray_hit(v);
    return norm_eu(v) / norm_eu(hit.p);
}

bool ConvexBody::is_corner(double theta, double tol) const {
    const double red = reduce_angle(theta);
    const double P = period();
    for (double c : corner_thetas_) {
        double d = std::abs(red - c);
        d = std::min(d, P - d);
        if (d <= tol) return true;
    }
    return false;
}

Vec2 ConvexBody::gradient_at(double theta) const {
    const double red = reduce_angle(theta);
    if (is_corner(red, 1e-11 * period()))
        throw CornerAngle(0.0, 0.0);  // callers wanting the interval use correspond()
    const std::size_t i = locate_theta(red);
    if (curve_) {
        // recover the curve param of P_theta
        const double d0 = red - theta_[i];
        const double span = theta_[i + 1] - theta_[i];
        double u = span > 0.0 ? d0 / span : 0.0;
        const double h = param_[i + 1] - param_[i];
        for (int it = 0; it < 3; ++it) {
            const Vec2 p = point_on_edge(i, u);
            const double f = cross(pts_[i], p) +
                             2.0 * (cap3_[i] * u * u * u + cap4_[i] * u * u * u * u) - d0;
            const double s = param_[i] + u * h;
            const double fp = cross(pts_[i], curve_->tangent(s)) * h +
                              2.0 * (3.0 * cap3_[i] * u * u + 4.0 * cap4_[i] * u * u * u);
            if (fp <= 0.0) break;
            u = std::clamp(u - f / fp, 0.0, 1.0);
        }
        return curve_->gradient(param_[i] + u * h);
    }
    // polyline: the gradient is the dual vertex of the edge carrying P_theta;
    // at a genuinely cornered vertex the subdifferential is an interval
    const double d0 = red - theta_[i];
    const double span = theta_[i + 1] - theta_[i];
    const double u = span > 0.0 ? d0 / span : 0.0;
    const std::size_t n = pts_.size();
    auto edge_dual = [&](std::size_t e) {
        const Vec2 a = pts_[e], b = pts_[(e + 1) % n];
        const double cr = cross(a, b);
        return Vec2{(b.y - a.y) / cr, (a.x - b.x) / cr};
    };
    const double vertex_tol = 1e-9;
    if (u < vertex_tol || u > 1.0 - vertex_tol) {
        const std::size_t v = u < vertex_tol ? i : (i + 1) % n;
        const std::size_t prev = (v + n - 1) % n;
        const Vec2 e0 = pts_[v] - pts_[prev];
        const Vec2 e1 = pts_[(v + 1) % n] - pts_[v];
        if (std::abs(turn_angle(e0, e1)) > 1e-4) {
            const ConvexBody& pol = polar_body();
            double lo = pol.angle_of(edge_dual(prev), 1e-6);
            double hi = pol.angle_of(edge_dual(v), 1e-6);
            if (lo > hi) lo -= pol.period();
            throw CornerAngle(lo, hi);
        }
    }
    return edge_dual(i);
}

std::pair<Vec2, Vec2> ConvexBody::corner_gradients(double theta) const {
    const double red = reduce_angle(theta);
    const double P = period();
    for (std::size_t k = 0; k < corner_thetas_.size(); ++k) {
        double d = std::abs(red - corner_thetas_[k]);
        d = std::min(d, P - d);
        if (d > 1e-9 * P) continue;
        if (curve_) {
            const double eps = 1e-9 * curve_->period();
            const double s = corner_params_[k];
            double before = s - eps;
            if (before < 0.0) before += curve_->period();
            return {curve_->gradient(before), curve_->gradient(s + eps)};
        }
        break;
    }
    throw Error("corner_gradients: not a corner angle");
}

std::pair<double, double> ConvexBody::support_range(Vec2 n_unit) const {
    const std::size_t imax = extremum_index(n_unit, true);
    const std::size_t imin = extremum_index(n_unit, false);
    return {dot(pts_[imin], n_unit), dot(pts_[imax], n_unit)};
}

std::size_t ConvexBody::extremum_index(Vec2 n, bool want_max) const {
    const std::size_t N = pts_.size();
    const std::size_t stride = std::max<std::size_t>(1, N / 64);
    std::size_t best = 0;
    double bestv = dot(pts_[0], n);
    for (std::size_t i = stride; i < N; i += stride) {
        const double v = dot(pts_[i], n);
        if (want_max ? v > bestv : v < bestv) {
            best = i;
            bestv = v;
        }
    }
    // the true extremum lies within one stride of the best coarse sample
    const std::size_t lo = best + N - stride;
    for (std::size_t k = 0; k <= 2 * stride; ++k) {
        const std::size_t i = (lo + k) % N;
        const double v = dot(pts_[i], n);
        if (want_max ? v > bestv : v < bestv) {
            best = i;
            bestv = v;
        }
    }
    return best;
}

ConvexBody::CrossHit ConvexBody::cross_hit(Vec2 n, double s, std::size_t edge) const {
    const std::size_t nxt = (edge + 1) % pts_.size();
    const double h0 = dot(pts_[edge], n);
    const double h1 = dot(pts_[nxt], n);
    double u = (h1 - h0) != 0.0 ? (s - h0) / (h1 - h0) : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    if (curve_) {
        const double hp = param_[edge + 1] - param_[edge];
        for (int k = 0; k < 3; ++k) {
            const double sp = param_[edge] + u * hp;
            const double g = dot(curve_->point(sp), n) - s;
            const double gp = dot(curve_->tangent(sp), n) * hp;
            if (gp == 0.0) break;
            u = std::clamp(u - g / gp, 0.0, 1.0);
        }
    }
    const Vec2 p = point_on_edge(edge, u);
    return {edge, u, p, theta_within_edge(edge, u)};
}

Chord ConvexBody::chord_at(Vec2 n, double s) const {
    const std::size_t N = pts_.size();
    const std::size_t imax = extremum_index(n, true);
    const std::size_t imin = extremum_index(n, false);
    const double hmax = dot(pts_[imax], n);
    const double hmin = dot(pts_[imin], n);
    if (!(s > hmin && s < hmax)) throw Error("chord_at: offset outside support range");

    auto h_at = [&](std::size_t i) { return dot(pts_[i % N], n); };
    // ascending stretch imin -> imax (ccw): find edge with h(j) <= s < h(j+1)
    auto search = [&](std::size_t from, std::size_t to, bool ascending) {
        std::size_t len = (to + N - from) % N;
        if (len == 0) len = N;
        std::size_t lo = 0, hi = len;  // offset from `from`
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            const double v = h_at(from + mid);
            if (ascending ? (v <= s) : (v > s))
                lo = mid;
            else
                hi = mid;
        }
        return (from + lo) % N;
    };
    const std::size_t ea = search(imin, imax, true);
    const std::size_t eb = search(imax, imin, false);
    const CrossHit A = cross_hit(n, s, ea);
    const CrossHit B = cross_hit(n, s, eb);

    Chord ch;
    ch.a = A.p;
    ch.b = B.p;
    ch.theta_a = reduce_angle(A.theta);
    ch.theta_b = reduce_angle(B.theta);
    double sweep = ch.theta_b - ch.theta_a;
    const double P = period();
    sweep = std::fmod(sweep, P);
    if (sweep <= 0.0) sweep += P;
    ch.sweep = sweep;
    ch.len = norm_eu(B.p - A.p);
    ch.cap = 0.5 * (sweep - cross(A.p, B.p));
    return ch;
}

const ConvexBody& ConvexBody::polar_body() const {
    std::call_once(cache_->polar_once, [this] {
        cache_->polar = std::make_shared<const ConvexBody>(polar(*this));
    });
    return *cache_->polar;
}

void ConvexBody::build(std::shared_ptr<const detail::Curve> curve, std::vector<double> params,
                       bool /*closed_params_given*/) {
    curve_ = std::move(curve);
    param_ = std::move(params);
    const std::size_t N = param_.size() - 1;
    pts_.resize(N);
    for (std::size_t i = 0; i < N; ++i) pts_[i] = curve_->point(param_[i]);
    pts_[0].y = 0.0;  // param 0 is the +x axis crossing by construction

    theta_.assign(N + 1, 0.0);
    cap3_.assign(N, 0.0);
    cap4_.assign(N, 0.0);
    const bool polyline = dynamic_cast<const PolylineCurve*>(curve_.get()) != nullptr;
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 p0 = pts_[i];
        const Vec2 p1 = i + 1 < N ? pts_[i + 1] : pts_[0];
        const double chordA = 0.5 * cross(p0, p1);
        double dA = chordA;
        if (!polyline) {
            dA = sector_area(*curve_, param_[i], param_[i + 1]);
            const double smid = 0.5 * (param_[i] + param_[i + 1]);
            const double ah = sector_area(*curve_, param_[i], smid);
            const double capF = dA - chordA;
            const double caph = ah - 0.5 * cross(p0, curve_->point(smid));
            cap3_[i] = 16.0 * caph - capF;
            cap4_[i] = capF - cap3_[i];
        }
        if (!(dA > 0.0))
            throw DegenerateBody("boundary does not wind strictly around the origin");
        theta_[i + 1] = theta_[i] + 2.0 * dA;
    }
    area_ = 0.5 * theta_[N];
    if (polyline) curve_ = nullptr;

    az_.assign(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 p0 = pts_[i];
        const Vec2 p1 = i + 1 < N ? pts_[i + 1] : pts_[0];
        az_[i + 1] = az_[i] + std::atan2(cross(p0, p1), dot(p0, p1));
    }
    cache_ = std::make_shared<Cache>();
}

void ConvexBody::finalize_metadata() {
    const std::size_t N = pts_.size();
    corner_thetas_.clear();
    corner_params_.clear();
    flats_.clear();

    if (curve_) {
        for (double s : curve_->corner_params()) {
            // corner params are sample points by construction
            auto it = std::lower_bound(param_.begin(), param_.end(), s - 1e-12);
            const std::size_t i = static_cast<std::size_t>(it - param_.begin()) % N;
            corner_params_.push_back(param_[i]);
            corner_thetas_.push_back(theta_[i]);
        }
        if (family_ == NormFamily::LensPolar) {
            const auto* lp = dynamic_cast<const LensPolarCurve*>(curve_.get());
            auto theta_at_param = [&](double s) {
                auto it = std::lower_bound(param_.begin(), param_.end(), s - 1e-12);
                std::size_t idx = static_cast<std::size_t>(it - param_.begin());
                if (idx > N) idx = N;
                return theta_[idx];
            };
            // left flat: from (-xb, yb) down to (-xb, -yb)
            FlatSegment left;
            left.psi_start = theta_at_param(lp->s2);
            left.psi_end = theta_at_param(lp->s3);
            left.a = {-lp->xb, lp->yb};
            left.b = {-lp->xb, -lp->yb};
            left.outward = {-1.0, 0.0};
            left.xbar = lp->xb;
            flats_.push_back(left);
            // right flat wraps across the angle origin
            FlatSegment right;
            right.psi_start = theta_at_param(lp->s4);
            right.psi_end = period() + theta_at_param(lp->s1);
            right.a = {lp->xb, -lp->yb};
            right.b = {lp->xb, lp->yb};
            right.outward = {1.0, 0.0};
            right.xbar = lp->xb;
            flats_.push_back(right);
        }
        return;
    }

    // polyline: corners where the turning angle exceeds 1e-4 rad; flat runs
    // are maximal groups of consecutive collinear edges
    std::vector<bool> corner(N, false);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 e0 = pts_[i] - pts_[(i + N - 1) % N];
        const Vec2 e1 = pts_[(i + 1) % N] - pts_[i];
        if (std::abs(turn_angle(e0, e1)) > 1e-4) {
            corner[i] = true;
            corner_thetas_.push_back(theta_[i]);
            corner_params_.push_back(param_[i]);
        }
    }
    // group edges [i, i+1) into collinear runs delimited by corners
    std::vector<bool> collinear_next(N, false);  // edge i collinear with edge i+1
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 e0 = pts_[(i + 1) % N] - pts_[i];
        const Vec2 e1 = pts_[(i + 2) % N] - pts_[(i + 1) % N];
        collinear_next[i] = std::abs(turn_angle(e0, e1)) < 1e-9;
    }
    std::vector<bool> visited(N, false);
    for (std::size_t i0 = 0; i0 < N; ++i0) {
        if (visited[i0]) continue;
        // start of a run: previous edge not collinear with this one
        const std::size_t prev = (i0 + N - 1) % N;
        if (collinear_next[prev]) continue;
        std::size_t last = i0;
        visited[i0] = true;
        while (collinear_next[last]) {
            last = (last + 1) % N;
            if (last == i0) break;
            visited[last] = true;
        }
        FlatSegment seg;
        seg.a = pts_[i0];
        seg.b = pts_[(last + 1) % N];
        seg.psi_start = theta_[i0];
        seg.psi_end = theta_[i0] + (last >= i0 ? theta_[last + 1] - theta_[i0]
                                               : period() - theta_[i0] + theta_[last + 1]);
        const Vec2 e = seg.b - seg.a;
        const double el = norm_eu(e);
        if (el == 0.0) continue;
        seg.outward = rot90_cw(e) / el;
        seg.xbar = dot(seg.a, seg.outward);
        flats_.push_back(seg);
    }
}

// ---------------------------------------------------------------------------
// builders

namespace detail {

ConvexBody body_from_polyline(std::vector<Vec2> v, Regularity reg) {
    const std::size_t n = v.size();
    if (n < 3) throw DegenerateBody("polyline body needs at least 3 points");
    double scale = 0.0;
    for (const auto& q : v) scale = std::max(scale, norm_eu(q));
    for (std::size_t i = 0; i < n; ++i)
        if (cross(v[i], v[(i + 1) % n]) <= 0.0)
            throw DegenerateBody("origin is not strictly interior");

    // rotate so the list starts at the crossing of the positive x-axis
    std::size_t k = 0;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % n];
        if (a.y <= 0.0 && b.y > 0.0) {
            k = i;
            found = true;
            break;
        }
    }
    if (!found) throw DegenerateBody("boundary never crosses the positive x-axis");
    std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    // now v[0].y <= 0 < v[1].y; make the crossing itself the first vertex
    if (v[0].y != 0.0) {
        const Vec2 a = v[0], b = v[1];
        const double u = -a.y / (b.y - a.y);
        if (u > 1.0 - 1e-12) {
            std::rotate(v.begin(), v.begin() + 1, v.end());
        } else if (u > 1e-12) {
            const Vec2 cpt{a.x + u * (b.x - a.x), 0.0};
            v.insert(v.begin() + 1, cpt);
            std::rotate(v.begin(), v.begin() + 1, v.end());
        }
    }
    v[0].y = 0.0;

    auto curve = std::make_shared<PolylineCurve>();
    curve->v = v;
    std::vector<double> params(v.size() + 1);
    for (std::size_t i = 0; i <= v.size(); ++i) params[i] = static_cast<double>(i);
    ConvexBody body;
    body.family_ = NormFamily::Table;
    body.reg_ = reg;
    body.build(curve, params, true);
    body.finalize_metadata();
    return body;
}

ConvexBody body_from_curve(std::shared_ptr<const Curve> curve, int n, NormFamily fam,
                           Regularity reg, double p, double c, double R,
                           std::function<double(Vec2)> gauge_fn) {
    std::vector<double> mandatory = curve->breakpoints();
    ConvexBody body;
    body.family_ = fam;
    body.fam_p_ = p;
    body.fam_c_ = c;
    body.fam_R_ = R;
    body.reg_ = reg;
    body.gauge_fn_ = std::move(gauge_fn);
    body.build(curve, piecewise_params(curve->period(), mandatory, n), false);
    body.finalize_metadata();
    return body;
}

}  // namespace detail

using detail::body_from_curve;
using detail::body_from_polyline;

ConvexBody unit_ball(const NormSpec& spec) {
    spec.validate();
    const int n = spec.resolution;
    switch (spec.family) {
        case NormFamily::Euclidean: {
            Regularity reg{true, true, true, true};
            return body_from_curve(std::make_shared<CircleCurve>(), n, NormFamily::Euclidean,
                                    reg, 2.0, 0.0, 0.0,
                                    [](Vec2 v) { return norm_eu(v); });
        }
        case NormFamily::Lp: {
            const double p = spec.p;
            Regularity reg{true, true, p >= 2.0, p == 2.0};
            return body_from_curve(std::make_shared<LpCurve>(p), n, NormFamily::Lp, reg, p, 0.0,
                                    0.0, [p](Vec2 v) {
                                        return std::pow(std::pow(std::abs(v.x), p) +
                                                            std::pow(std::abs(v.y), p),
                                                        1.0 / p);
                                    });
        }
        case NormFamily::Lens: {
            const double c = spec.lens_c, R = spec.lens_R;
            Regularity reg{true, false, false, false};
            const double xc2 = R * R - c * c;
            auto gauge = [c, xc2](Vec2 v) {
                const double root = std::sqrt(c * c * v.y * v.y + xc2 * norm2_eu(v));
                const double up = (c * v.y + root) / xc2;
                const double dn = (-c * v.y + root) / xc2;
                return std::max(up, dn);
            };
            return body_from_curve(std::make_shared<LensCurve>(c, R), n, NormFamily::Lens, reg,
                                    2.0, c, R, gauge);
        }
        case NormFamily::LensPolar: {
            const double c = spec.lens_c, R = spec.lens_R;
            Regularity reg{false, true, true, false};
            const double xc = std::sqrt(R * R - c * c);
            auto gauge = [c, R, xc](Vec2 v) {
                const double nv = norm_eu(v);
                if (nv == 0.0) return 0.0;
                const double vy = v.y / nv;
                if (vy >= c / R) return -c * v.y + R * nv;
                if (vy <= -c / R) return c * v.y + R * nv;
                return xc * std::abs(v.x);
            };
            return body_from_curve(std::make_shared<LensPolarCurve>(c, R), n,
                                    NormFamily::LensPolar, reg, 2.0, c, R, gauge);
        }
        case NormFamily::Table: {
            Regularity reg{false, false, false, false};
            return body_from_polyline(spec.table, reg);
        }
    }
    throw InvalidSpec("unknown norm family");
}

ConvexBody polar(const ConvexBody& body) {
    NormSpec spec;
    spec.resolution = static_cast<int>(body.resolution());
    switch (body.family()) {
        case NormFamily::Euclidean:
            spec.family = NormFamily::Euclidean;
            return unit_ball(spec);
        case NormFamily::Lp:
            spec.family = NormFamily::Lp;
            spec.p = body.fam_p_ / (body.fam_p_ - 1.0);
            return unit_ball(spec);
        case NormFamily::Lens:
            spec.family = NormFamily::LensPolar;
            spec.lens_c = body.fam_c_;
            spec.lens_R = body.fam_R_;
            return unit_ball(spec);
        case NormFamily::LensPolar:
            spec.family = NormFamily::Lens;
            spec.lens_c = body.fam_c_;
            spec.lens_R = body.fam_R_;
            return unit_ball(spec);
        case NormFamily::Table:
            break;
    }
    // generic polyline: the polar of a polygon has one vertex per edge
    const auto& v = body.boundary();
    const std::size_t n = v.size();
    std::vector<Vec2> dual;
    dual.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % n];
        const double cr = cross(a, b);
        if (cr <= 0.0) throw DegenerateBody("origin is not interior");
        const Vec2 w{(b.y - a.y) / cr, (a.x - b.x) / cr};
        if (!dual.empty() && norm_eu(w - dual.back()) < 1e-12 * (1.0 + norm_eu(w))) continue;
        dual.push_back(w);
    }
    if (dual.size() > 1 && norm_eu(dual.front() - dual.back()) < 1e-12) dual.pop_back();
    Regularity reg{false, false, false, false};
    return body_from_polyline(std::move(dual), reg);
}

double correspond(const ConvexBody& body, double theta) {
    const double red = body.reduce_angle(theta);
    const ConvexBody& pol = body.polar_body();
    if (body.is_corner(red, 1e-11 * body.period())) {
        const auto [gb, ga] = body.corner_gradients(red);
        double lo = pol.angle_of(gb, 1e-6);
        double hi = pol.angle_of(ga, 1e-6);
        if (lo > hi) lo -= pol.period();
        throw CornerAngle(lo, hi);
    }
    const Vec2 g = body.gradient_at(red);
    return pol.angle_of(g, 1e-6);
}

std::pair<double, double> trig_derivative(const ConvexBody& body, double theta) {
    const double psi = correspond(body, theta);
    const Vec2 q = body.polar_body().trig_eval(psi);
    return {q.x, -q.y};
}

std::vector<FlatSegment> flat_parts(const ConvexBody& body) { return body.flat_runs(); }

}  // namespace hcd
