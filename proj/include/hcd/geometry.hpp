#pragma once

#include <cmath>

namespace hcd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
inline Vec2 operator-(Vec2 v) { return {-v.x, -v.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm_eu(Vec2 v) { return std::hypot(v.x, v.y); }
inline double norm2_eu(Vec2 v) { return v.x * v.x + v.y * v.y; }

// counterclockwise quarter turn
inline Vec2 rot90_ccw(Vec2 v) { return {-v.y, v.x}; }
// clockwise quarter turn
inline Vec2 rot90_cw(Vec2 v) { return {v.y, -v.x}; }

}  // namespace hcd
