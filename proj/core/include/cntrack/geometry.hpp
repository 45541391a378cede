#pragma once

#include <algorithm>
#include <cmath>

namespace cntrack {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double norm2() const { return x * x + y * y; }
};

struct Vec2i {
    int x = 0;
    int y = 0;

    Vec2i operator+(const Vec2i& o) const { return {x + o.x, y + o.y}; }
    Vec2i operator-(const Vec2i& o) const { return {x - o.x, y - o.y}; }
    bool operator==(const Vec2i& o) const { return x == o.x && y == o.y; }
    double norm() const { return std::sqrt(double(x) * x + double(y) * y); }
    int norm2() const { return x * x + y * y; }
    Vec2 to_vec2() const { return {double(x), double(y)}; }
};

inline Vec2i round_vec(const Vec2& v) {
    return {int(std::lround(v.x)), int(std::lround(v.y))};
}

// Axis-aligned box, top-left anchored, inclusive extent w x h (w,h > 0 for a
// valid box). The last covered pixel column is x + w - 1.
struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w - 1; }
    int bottom() const { return y + h - 1; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    Vec2 center() const { return {cx(), cy()}; }
    long long area() const { return (long long)w * h; }
    bool valid() const { return w > 0 && h > 0; }

    bool contains(int px, int py) const {
        return px >= x && px <= right() && py >= y && py <= bottom();
    }
    bool intersects(const BoundingBox& o) const {
        return x <= o.right() && o.x <= right() && y <= o.bottom() && o.y <= bottom();
    }
    // Intersection with another box; w,h <= 0 when disjoint.
    BoundingBox clip(const BoundingBox& o) const {
        int nx = std::max(x, o.x);
        int ny = std::max(y, o.y);
        int nr = std::min(right(), o.right());
        int nb = std::min(bottom(), o.bottom());
        return {nx, ny, nr - nx + 1, nb - ny + 1};
    }
    static BoundingBox from_center(Vec2 c, int bw, int bh) {
        return {int(std::lround(c.x - bw / 2.0)), int(std::lround(c.y - bh / 2.0)), bw, bh};
    }
    bool operator==(const BoundingBox& o) const {
        return x == o.x && y == o.y && w == o.w && h == o.h;
    }
};

// Intersection over union; 0 for disjoint or degenerate boxes.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid() || !b.valid()) return 0.0;
    BoundingBox c = a.clip(b);
    if (c.w <= 0 || c.h <= 0) return 0.0;
    double inter = double(c.w) * c.h;
    double uni = double(a.area()) + double(b.area()) - inter;
    return inter / uni;
}

}  // namespace cntrack
