#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hcd/convex_body.hpp"
#include "oracles.hpp"

using namespace hcd;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

NormSpec spec_of(const std::string& s, int res = 16384) {
    NormSpec n = NormSpec::parse(s);
    n.resolution = res;
    return n;
}

std::vector<Vec2> octagon_like_square() {
    // square with edge midpoints inserted, counterclockwise
    return {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
}
}  // namespace

TEST_CASE("norm spec grammar") {
    CHECK(NormSpec::parse("euclidean").family == NormFamily::Euclidean);
    CHECK(NormSpec::parse("lp:4").p == doctest::Approx(4.0));
    const NormSpec lens = NormSpec::parse("lens:1,2");
    CHECK(lens.lens_c == doctest::Approx(1.0));
    CHECK(lens.lens_R == doctest::Approx(2.0));
    CHECK_THROWS_AS(NormSpec::parse("lp:1"), InvalidSpec);
    CHECK_THROWS_AS(NormSpec::parse("lp:0.5"), InvalidSpec);
    CHECK_THROWS_AS(NormSpec::parse("lens:2,1"), InvalidSpec);
    CHECK_THROWS_AS(NormSpec::parse("lens:1,3"), InvalidSpec);  // R - c != 1
    CHECK_THROWS_AS(NormSpec::parse("what:ever"), InvalidSpec);
}

TEST_CASE("table spec validation") {
    NormSpec spec;
    spec.family = NormFamily::Table;
    spec.table = {{1, 0}, {0, 1}, {-1, 0}};  // too few
    CHECK_THROWS_AS(unit_ball(spec), InvalidSpec);
    spec.table = octagon_like_square();
    CHECK_NOTHROW(unit_ball(spec));
    // non-convex: dent one vertex inward
    auto dent = octagon_like_square();
    dent[1] = {0.2, 0.2};
    spec.table = dent;
    CHECK_THROWS_AS(unit_ball(spec), InvalidSpec);
}

TEST_CASE("unit ball areas") {
    SUBCASE("euclidean disk area is pi") {
        const ConvexBody disk = unit_ball(spec_of("euclidean"));
        CHECK(disk.total_area() == doctest::Approx(kPi).epsilon(1e-9));
    }
    SUBCASE("lens area matches the circular-segment formula") {
        const ConvexBody lens = unit_ball(spec_of("lens:1,2"));
        CHECK(lens.total_area() == doctest::Approx(oracle::lens_area(1.0, 2.0)).epsilon(1e-9));
        // corners on the x-axis at +-sqrt(3)
        const Vec2 p0 = lens.trig_eval(0.0);
        CHECK(p0.x == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
        CHECK(p0.y == 0.0);
        const Vec2 p1 = lens.trig_eval(lens.total_area());
        CHECK(p1.x == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-9));
        // shoelace area of the sampled boundary agrees (polygon area is
        // slightly below the curved area)
        double shoelace = 0.0;
        const auto& b = lens.boundary();
        for (std::size_t i = 0; i < b.size(); ++i)
            shoelace += 0.5 * cross(b[i], b[(i + 1) % b.size()]);
        CHECK(shoelace == doctest::Approx(lens.total_area()).epsilon(1e-6));
    }
    SUBCASE("lp:4 area matches quadrature") {
        const ConvexBody ball = unit_ball(spec_of("lp:4"));
        CHECK(ball.total_area() == doctest::Approx(oracle::lp_ball_area(4.0)).epsilon(1e-7));
    }
}

TEST_CASE("classical trig recovered on the disk") {
    const ConvexBody disk = unit_ball(spec_of("euclidean"));
    const Vec2 p = disk.trig_eval(kPi / 2.0);
    CHECK(std::abs(p.x - 0.0) < 1e-8);
    CHECK(std::abs(p.y - 1.0) < 1e-8);
    for (int k = 0; k < 360; ++k) {
        const double theta = 2.0 * kPi * k / 360.0;
        const Vec2 q = disk.trig_eval(theta);
        CHECK(std::abs(q.x - std::cos(theta)) < 1e-9);
        CHECK(std::abs(q.y - std::sin(theta)) < 1e-9);
    }
}

TEST_CASE("sin vanishes exactly at zero") {
    for (const char* s : {"euclidean", "lp:3", "lens:1,2"}) {
        const ConvexBody body = unit_ball(spec_of(s, 4096));
        CHECK(body.trig_eval(0.0).y == 0.0);
    }
}

TEST_CASE("trig periodicity") {
    const ConvexBody body = unit_ball(spec_of("lp:3", 4096));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, body.period());
    for (int k = 0; k < 50; ++k) {
        const double theta = uni(rng);
        const Vec2 a = body.trig_eval(theta);
        const Vec2 b = body.trig_eval(theta + body.period());
        CHECK(norm_eu(a - b) < 1e-10);
    }
    const double red = body.reduce_angle(-1.0);
    CHECK(body.reduce_angle(red) == red);  // idempotent
}

TEST_CASE("sector areas match the angle parameter") {
    // shoelace area of the sector between two rays equals (t2 - t1)/2
    const ConvexBody body = unit_ball(spec_of("lp:4", 8192));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, body.period());
    for (int rep = 0; rep < 10; ++rep) {
        double t1 = uni(rng), t2 = uni(rng);
        if (t1 > t2) std::swap(t1, t2);
        const int n = 2000;
        double area = 0.0;
        Vec2 prev = body.trig_eval(t1);
        for (int k = 1; k <= n; ++k) {
            const Vec2 cur = body.trig_eval(t1 + (t2 - t1) * k / n);
            area += 0.5 * cross(prev, cur);
            prev = cur;
        }
        CHECK(area == doctest::Approx(0.5 * (t2 - t1)).epsilon(1e-6));
    }
}

TEST_CASE("angle_of inverts trig_eval") {
    const ConvexBody body = unit_ball(spec_of("lp:4", 8192));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, body.period());
    for (int k = 0; k < 100; ++k) {
        const double theta = uni(rng);
        const double back = body.angle_of(body.trig_eval(theta));
        double d = std::abs(back - theta);
        d = std::min(d, body.period() - d);
        CHECK(d < 1e-7);
    }
    const ConvexBody disk = unit_ball(spec_of("euclidean"));
    CHECK(disk.angle_of({-1.0, 0.0}) == doctest::Approx(kPi).epsilon(1e-8));
    CHECK_THROWS_AS(disk.angle_of({2.0, 0.0}), NotOnBoundary);
    CHECK_THROWS_AS(unit_ball(spec_of("lp:4")).angle_of({2.0, 0.0}), NotOnBoundary);
}

TEST_CASE("polar duality") {
    SUBCASE("disk is self-dual") {
        const ConvexBody disk = unit_ball(spec_of("euclidean", 4096));
        const ConvexBody dual = polar(disk);
        for (int k = 0; k < 360; ++k) {
            const double theta = disk.period() * k / 360.0;
            CHECK(norm_eu(disk.trig_eval(theta) - dual.trig_eval(theta)) < 1e-6);
        }
    }
    SUBCASE("polar of lp:4 is lp:4/3 via support functions") {
        const ConvexBody dual = polar(unit_ball(spec_of("lp:4")));
        const double q = 4.0 / 3.0;
        for (int k = 0; k < 360; ++k) {
            const double ang = 2.0 * kPi * k / 360.0;
            const Vec2 u{std::cos(ang), std::sin(ang)};
            // support of the dual ball equals the lp:4/3 gauge... the dual of
            // lp:4 is the lp:4/3 ball, so its gauge is the 4/3-norm
            const double g = dual.gauge(u);
            const double expect = std::pow(std::pow(std::abs(u.x), q) + std::pow(std::abs(u.y), q),
                                           1.0 / q);
            CHECK(g == doctest::Approx(expect).epsilon(1e-6));
        }
    }
    SUBCASE("bipolar returns the original body") {
        const ConvexBody ball = unit_ball(spec_of("lp:4", 4096));
        const ConvexBody back = polar(polar(ball));
        double worst = 0.0;
        for (int k = 0; k < 360; ++k) {
            const double theta = ball.period() * k / 360.0;
            const Vec2 p = ball.trig_eval(theta);
            worst = std::max(worst, std::abs(back.gauge(p) - 1.0));
        }
        CHECK(worst < 2.0 * (2.0 * kPi / 4096.0));
    }
    SUBCASE("bipolar for a table body") {
        NormSpec spec;
        spec.family = NormFamily::Table;
        spec.table = octagon_like_square();
        const ConvexBody body = unit_ball(spec);
        const ConvexBody back = polar(polar(body));
        for (const Vec2& v : spec.table) CHECK(std::abs(back.gauge(v) - 1.0) < 1e-9);
    }
}

TEST_CASE("correspondence and the Pythagorean identity") {
    SUBCASE("identity map on the disk") {
        const ConvexBody disk = unit_ball(spec_of("euclidean"));
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uni(0.0, disk.period());
        for (int k = 0; k < 100; ++k) {
            const double theta = uni(rng);
            const double psi = correspond(disk, theta);
            double d = std::abs(psi - theta);
            d = std::min(d, disk.period() - d);
            CHECK(d < 1e-7);
        }
    }
    SUBCASE("residual is tiny for smooth bodies") {
        for (const char* s : {"lp:3", "lp:4"}) {
            const ConvexBody body = unit_ball(spec_of(s));
            const ConvexBody& dual = body.polar_body();
            for (int k = 0; k < 180; ++k) {
                const double theta = body.period() * (k + 0.21) / 180.0;
                const double psi = correspond(body, theta);
                const Vec2 p = body.trig_eval(theta);
                const Vec2 q = dual.trig_eval(psi);
                CHECK(std::abs(p.x * q.x + p.y * q.y - 1.0) < 1e-7);
            }
        }
    }
    SUBCASE("inequality holds for all angle pairs") {
        const ConvexBody body = unit_ball(spec_of("lp:3", 2048));
        const ConvexBody& dual = body.polar_body();
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> ub(0.0, body.period());
        std::uniform_real_distribution<double> ud(0.0, dual.period());
        for (int k = 0; k < 2000; ++k) {
            const Vec2 p = body.trig_eval(ub(rng));
            const Vec2 q = dual.trig_eval(ud(rng));
            CHECK(p.x * q.x + p.y * q.y <= 1.0 + 1e-9);
        }
    }
    SUBCASE("round trip through the polar body") {
        const ConvexBody body = unit_ball(spec_of("lp:4"));
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> uni(0.0, body.period());
        for (int k = 0; k < 50; ++k) {
            const double theta = uni(rng);
            const double psi = correspond(body, theta);
            const double back = correspond(body.polar_body(), psi);
            double d = std::abs(back - theta);
            d = std::min(d, body.period() - d);
            CHECK(d < 1e-6);
        }
    }
}

TEST_CASE("trig derivative") {
    SUBCASE("sin'(0) = 1 on the disk") {
        const ConvexBody disk = unit_ball(spec_of("euclidean"));
        const auto [dsin, dcos] = trig_derivative(disk, 0.0);
        CHECK(std::abs(dsin - 1.0) < 1e-8);
        CHECK(std::abs(dcos - 0.0) < 1e-8);
    }
    SUBCASE("matches centered finite differences on lp:4") {
        const ConvexBody body = unit_ball(spec_of("lp:4"));
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> uni(0.0, body.period());
        const double h = 1e-5;
        for (int k = 0; k < 50; ++k) {
            const double theta = uni(rng);
            const auto [dsin, dcos] = trig_derivative(body, theta);
            const Vec2 up = body.trig_eval(theta + h);
            const Vec2 dn = body.trig_eval(theta - h);
            CHECK(std::abs(dsin - (up.y - dn.y) / (2.0 * h)) < 1e-4);
            CHECK(std::abs(dcos - (up.x - dn.x) / (2.0 * h)) < 1e-4);
        }
    }
    SUBCASE("corner of the lens raises CornerAngle with the dual flat interval") {
        const ConvexBody lens = unit_ball(spec_of("lens:1,2"));
        CHECK_THROWS_AS(trig_derivative(lens, 0.0), CornerAngle);
        try {
            trig_derivative(lens, 0.0);
        } catch (const CornerAngle& c) {
            // the interval brackets the dual flat segment at x = 1/sqrt(3)
            const ConvexBody& dual = lens.polar_body();
            const Vec2 lo = dual.trig_eval(c.psi_lo);
            const Vec2 hi = dual.trig_eval(c.psi_hi);
            CHECK(lo.x == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-4));
            CHECK(hi.x == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-4));
            CHECK(lo.y == doctest::Approx(-1.0 / 3.0).epsilon(1e-4));
            CHECK(hi.y == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
            CHECK(c.psi_lo < c.psi_hi);
        }
    }
}

TEST_CASE("lag function convexity and monotone gap") {
    // g(t) = sin(theta)cos(theta + k t) - cos(theta)sin(theta + k t), k > 0,
    // has nonnegative second differences for t > 0 and nonpositive for t < 0
    const ConvexBody body = unit_ball(spec_of("lp:3"));
    const double k = 0.7;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(0.0, body.period());
    for (int rep = 0; rep < 10; ++rep) {
        const double theta = uni(rng);
        const Vec2 p = body.trig_eval(theta);
        auto g = [&](double t) {
            const Vec2 q = body.trig_eval(theta + k * t);
            return p.y * q.x - p.x * q.y;
        };
        const double h = 0.01;
        for (int j = 1; j <= 8; ++j) {
            const double tp = j * h;
            CHECK(g(tp - h) - 2.0 * g(tp) + g(tp + h) >= -1e-9);
            CHECK(g(-tp - h) - 2.0 * g(-tp) + g(-tp + h) <= 1e-9);
        }
    }
    // h(t) = 1 - <Q_psi, P((psi + k t)_sub)> is >= 0 and nondecreasing for
    // small t > 0
    const ConvexBody& dual = body.polar_body();
    for (int rep = 0; rep < 5; ++rep) {
        const double psi = uni(rng) * dual.period() / body.period();
        const Vec2 q = dual.trig_eval(psi);
        auto hfun = [&](double t) {
            const double th = correspond(dual, psi + k * t);
            const Vec2 p = body.trig_eval(th);
            return 1.0 - q.y * p.y - q.x * p.x;
        };
        double prev = hfun(0.005);
        CHECK(prev >= -1e-12);
        for (int j = 2; j <= 10; ++j) {
            const double cur = hfun(0.005 * j);
            CHECK(cur >= prev - 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("flat parts") {
    SUBCASE("disk has none") {
        CHECK(flat_parts(unit_ball(spec_of("euclidean", 2048))).empty());
        CHECK(flat_parts(unit_ball(spec_of("lp:4", 2048))).empty());
    }
    SUBCASE("polar of the lens has exactly two vertical segments") {
        const ConvexBody dual = polar(unit_ball(spec_of("lens:1,2")));
        const auto flats = flat_parts(dual);
        REQUIRE(flats.size() == 2);
        const double xb = 1.0 / std::sqrt(3.0);
        for (const auto& f : flats) {
            CHECK(std::abs(std::abs(f.a.x) - xb) < 1e-4);
            CHECK(std::abs(f.a.x - f.b.x) < 1e-12);  // vertical
            CHECK(f.xbar == doctest::Approx(xb).epsilon(1e-9));
            CHECK(f.psi_end > f.psi_start);
            // angular length of the flat equals xbar * (chord length)
            CHECK(f.psi_end - f.psi_start ==
                  doctest::Approx(xb * norm_eu(f.b - f.a)).epsilon(1e-6));
        }
    }
    SUBCASE("square table body: four segments covering the boundary") {
        NormSpec spec;
        spec.family = NormFamily::Table;
        spec.table = octagon_like_square();
        const ConvexBody body = unit_ball(spec);
        const auto flats = flat_parts(body);
        CHECK(flats.size() == 4);
        double covered = 0.0;
        for (const auto& f : flats) covered += f.psi_end - f.psi_start;
        CHECK(covered == doctest::Approx(body.period()).epsilon(1e-12));
    }
}

TEST_CASE("lens gauge agrees with the boundary") {
    const ConvexBody lens = unit_ball(spec_of("lens:1,2", 4096));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(0.0, lens.period());
    for (int k = 0; k < 200; ++k) {
        const Vec2 p = lens.trig_eval(uni(rng));
        CHECK(lens.gauge(p) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(lens.gauge(2.5 * p) == doctest::Approx(2.5).epsilon(1e-10));
    }
    CHECK(lens.gauge({0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lens.gauge({0.0, -1.0}) == doctest::Approx(1.0).epsilon(1e-12));
}
