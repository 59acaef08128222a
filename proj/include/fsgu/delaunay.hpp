#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fsgu {

class NotTriangulableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Delaunay triangulation of a planar point set. Vertices keep input order;
/// triangles and edges are stored in canonical sorted form.
struct Triangulation {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;      // each sorted ascending
    std::vector<std::pair<int, int>> edges;         // deduplicated, first < second
};

namespace detail {

struct Circumcircle {
    double cx = 0.0, cy = 0.0, r = 0.0;
    bool valid = false;
};

inline Circumcircle circumcircle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                                 const std::array<double, 2>& c) {
    // Solved relative to vertex a to limit cancellation.
    const double bx = b[0] - a[0], by = b[1] - a[1];
    const double cx = c[0] - a[0], cy = c[1] - a[1];
    const double d = 2.0 * (bx * cy - by * cx);
    Circumcircle cc;
    if (d == 0.0) return cc;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    const double ux = (cy * b2 - by * c2) / d;
    const double uy = (bx * c2 - cx * b2) / d;
    cc.cx = a[0] + ux;
    cc.cy = a[1] + uy;
    cc.r = std::sqrt(ux * ux + uy * uy);
    cc.valid = true;
    return cc;
}

// Strictly inside test with slack: points on the circle (within tol) count
// as outside, so cocircular insertions keep the configuration built by the
// earlier-inserted vertices. Deterministic for a fixed input order.
inline bool in_circumcircle(const Circumcircle& cc, const std::array<double, 2>& p, double tol) {
    if (!cc.valid) return false;
    const double dx = p[0] - cc.cx;
    const double dy = p[1] - cc.cy;
    return std::sqrt(dx * dx + dy * dy) < cc.r - tol;
}

inline double orient2d(const std::array<double, 2>& a, const std::array<double, 2>& b,
                       const std::array<double, 2>& p) {
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
}

}  // namespace detail

/// True when every point lies on the line through the two lexicographic
/// extremes, within an absolute orientation tolerance.
inline bool points_collinear(const std::vector<std::array<double, 2>>& points, double tol = 1e-12) {
    if (points.size() < 3) return true;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i] < points[lo]) lo = i;
        if (points[i] > points[hi]) hi = i;
    }
    for (const auto& p : points) {
        if (std::abs(detail::orient2d(points[lo], points[hi], p)) > tol) return false;
    }
    return true;
}

/// Bowyer-Watson triangulation. Returns nullopt for inputs that cannot be
/// triangulated: fewer than 3 points, or all points collinear within an
/// absolute orientation tolerance of 1e-12. Exactly duplicated positions are
/// kept in the vertex list but attach to no triangle.
inline std::optional<Triangulation> try_delaunay(const std::vector<std::array<double, 2>>& points) {
    constexpr double kTol = 1e-12;
    const int n = static_cast<int>(points.size());
    if (n < 3) return std::nullopt;
    if (points_collinear(points, kTol)) return std::nullopt;

    std::vector<std::array<double, 2>> verts = points;
    double min_x = points[0][0], max_x = points[0][0];
    double min_y = points[0][1], max_y = points[0][1];
    for (const auto& p : points) {
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
    }
    const double cx = 0.5 * (min_x + max_x);
    const double cy = 0.5 * (min_y + max_y);
    const double m = 64.0 * std::max({max_x - min_x, max_y - min_y, 1.0});
    verts.push_back({cx - 2.0 * m, cy - m});
    verts.push_back({cx + 2.0 * m, cy - m});
    verts.push_back({cx, cy + 2.0 * m});

    struct Tri {
        int a, b, c;
        detail::Circumcircle cc;
    };
    auto make_tri = [&](int a, int b, int c) { return Tri{a, b, c, detail::circumcircle(verts[a], verts[b], verts[c])}; };

    std::vector<Tri> tris;
    tris.push_back(make_tri(n, n + 1, n + 2));

    std::vector<int> bad;
    std::map<std::pair<int, int>, int> edge_count;
    for (int pi = 0; pi < n; ++pi) {
        bad.clear();
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (detail::in_circumcircle(tris[t].cc, points[pi], kTol)) bad.push_back(t);
        }
        if (bad.empty()) continue;  // duplicate of an existing vertex

        edge_count.clear();
        auto count_edge = [&](int u, int v) { ++edge_count[{std::min(u, v), std::max(u, v)}]; };
        for (int t : bad) {
            count_edge(tris[t].a, tris[t].b);
            count_edge(tris[t].b, tris[t].c);
            count_edge(tris[t].c, tris[t].a);
        }
        for (auto it = bad.rbegin(); it != bad.rend(); ++it) {
            tris.erase(tris.begin() + *it);
        }
        for (const auto& [edge, count] : edge_count) {
            if (count != 1) continue;  // interior to the cavity
            if (detail::orient2d(verts[edge.first], verts[edge.second], points[pi]) == 0.0) continue;
            tris.push_back(make_tri(edge.first, edge.second, pi));
        }
    }

    Triangulation out;
    out.vertices = points;
    for (const Tri& t : tris) {
        if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches the enclosing triangle
        std::array<int, 3> tri{t.a, t.b, t.c};
        std::sort(tri.begin(), tri.end());
        out.triangles.push_back(tri);
    }
    if (out.triangles.empty()) return std::nullopt;
    std::sort(out.triangles.begin(), out.triangles.end());

    std::vector<std::pair<int, int>> edges;
    edges.reserve(out.triangles.size() * 3);
    for (const auto& t : out.triangles) {
        edges.emplace_back(t[0], t[1]);
        edges.emplace_back(t[0], t[2]);
        edges.emplace_back(t[1], t[2]);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    out.edges = std::move(edges);
    return out;
}

inline Triangulation delaunay(const std::vector<std::array<double, 2>>& points) {
    auto tri = try_delaunay(points);
    if (!tri) {
        throw NotTriangulableError("delaunay: needs at least 3 non-collinear points");
    }
    return std::move(*tri);
}

/// Midpoint of a triangulation edge plus the length of the edge it came
/// from; the length drives candidate selection during upsampling.
struct EdgeMidpoint {
    std::array<double, 2> position{};
    double parent_length = 0.0;
};

/// One midpoint per deduplicated edge, sorted lexicographically by position.
inline std::vector<EdgeMidpoint> edge_midpoints(const Triangulation& tri) {
    std::vector<EdgeMidpoint> out;
    out.reserve(tri.edges.size());
    for (const auto& [i, j] : tri.edges) {
        const auto& a = tri.vertices[static_cast<std::size_t>(i)];
        const auto& b = tri.vertices[static_cast<std::size_t>(j)];
        const double dx = b[0] - a[0];
        const double dy = b[1] - a[1];
        out.push_back({{(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0}, std::sqrt(dx * dx + dy * dy)});
    }
    std::sort(out.begin(), out.end(),
              [](const EdgeMidpoint& a, const EdgeMidpoint& b) { return a.position < b.position; });
    return out;
}

}  // namespace fsgu
