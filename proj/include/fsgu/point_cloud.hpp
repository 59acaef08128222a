#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fsgu {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }

    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0.0, 0.0, 0.0};
    }

    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

/// Ordered point set with optional per-point unit normals.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty, or one unit vector per point

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }
};

class DegenerateCloudError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform similarity transform between original and unit-cube coordinates:
/// normalized = (original - offset) / scale.
struct NormTransform {
    Vec3 offset{};
    double scale = 1.0;

    Vec3 forward(const Vec3& p) const { return (p - offset) / scale; }
    Vec3 inverse(const Vec3& p) const { return p * scale + offset; }
};

/// Translates the minimum corner to the origin and divides by the largest
/// axis extent, so all coordinates land in [0,1] and the longest axis spans
/// exactly [0,1]. The scaling is uniform; shape is preserved. Normals are
/// copied unchanged.
inline std::pair<PointCloud, NormTransform> normalize_unit_cube(const PointCloud& cloud) {
    if (cloud.empty()) {
        throw std::invalid_argument("normalize_unit_cube: empty cloud");
    }
    Vec3 lo = cloud.points.front();
    Vec3 hi = cloud.points.front();
    for (const Vec3& p : cloud.points) {
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
    const Vec3 extent = hi - lo;
    const double scale = std::max({extent.x, extent.y, extent.z});
    if (scale <= 0.0) {
        throw DegenerateCloudError("normalize_unit_cube: zero extent on every axis");
    }
    NormTransform t{lo, scale};
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        out.points.push_back(t.forward(p));
    }
    out.normals = cloud.normals;
    return {std::move(out), t};
}

inline PointCloud denormalize(const PointCloud& cloud, const NormTransform& t) {
    if (t.scale <= 0.0) {
        throw std::invalid_argument("denormalize: scale must be positive");
    }
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        out.points.push_back(t.inverse(p));
    }
    out.normals = cloud.normals;
    return out;
}

}  // namespace fsgu
