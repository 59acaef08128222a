#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "fsgu/point_cloud.hpp"

namespace fsgu {

enum class SyntheticShape { Plane, CosineSurface, SpherePatch };

inline SyntheticShape parse_shape(const std::string& name) {
    if (name == "plane") return SyntheticShape::Plane;
    if (name == "cosine-surface") return SyntheticShape::CosineSurface;
    if (name == "sphere-patch") return SyntheticShape::SpherePatch;
    throw std::invalid_argument("unknown synthetic shape '" + name + "'");
}

/// Analytic ground-truth surfaces with exact normals; identical seeds give
/// identical clouds on every platform.
struct SyntheticSpec {
    SyntheticShape shape = SyntheticShape::Plane;
    std::size_t n_points = 1000;
    std::uint64_t seed = 1;
    double plane_height = 0.3;
    double cosine_offset = 0.25;
    double cosine_amplitude = 0.1;
    double cosine_frequency = 1.0;
    double sphere_radius = 0.4;
    double sphere_cap_angle_deg = 60.0;

    void validate() const {
        if (n_points < 1) throw std::invalid_argument("SyntheticSpec: n_points must be >= 1");
        if (shape == SyntheticShape::CosineSurface) {
            if (!(cosine_amplitude > 0.0)) throw std::invalid_argument("SyntheticSpec: amplitude must be > 0");
            if (!(cosine_frequency > 0.0)) throw std::invalid_argument("SyntheticSpec: frequency must be > 0");
        }
        if (shape == SyntheticShape::SpherePatch) {
            if (!(sphere_radius > 0.0)) throw std::invalid_argument("SyntheticSpec: radius must be > 0");
            if (!(sphere_cap_angle_deg > 0.0 && sphere_cap_angle_deg <= 180.0)) {
                throw std::invalid_argument("SyntheticSpec: cap angle must be in (0, 180]");
            }
        }
    }
};

namespace detail {

// mt19937_64 output mapped to [0,1) by hand; std::uniform_real_distribution
// is implementation-defined and would break cross-platform determinism.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : rng_(seed) {}
    double next() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 rng_;
};

}  // namespace detail

inline PointCloud generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    detail::UniformRng rng(spec.seed);
    PointCloud cloud;
    cloud.points.reserve(spec.n_points);
    cloud.normals.reserve(spec.n_points);

    switch (spec.shape) {
        case SyntheticShape::Plane: {
            for (std::size_t i = 0; i < spec.n_points; ++i) {
                const double x = rng.next();
                const double y = rng.next();
                cloud.points.push_back({x, y, spec.plane_height});
                cloud.normals.push_back({0.0, 0.0, 1.0});
            }
            break;
        }
        case SyntheticShape::CosineSurface: {
            const double a = spec.cosine_amplitude;
            const double f = spec.cosine_frequency;
            const double pi = std::numbers::pi;
            for (std::size_t i = 0; i < spec.n_points; ++i) {
                const double x = rng.next();
                const double y = rng.next();
                const double z = spec.cosine_offset + a * std::cos(pi * f * x) * std::cos(pi * f * y);
                // Surface gradient gives the exact normal, oriented toward +z.
                const double gx = -a * pi * f * std::sin(pi * f * x) * std::cos(pi * f * y);
                const double gy = -a * pi * f * std::cos(pi * f * x) * std::sin(pi * f * y);
                cloud.points.push_back({x, y, z});
                cloud.normals.push_back(Vec3{-gx, -gy, 1.0}.normalized());
            }
            break;
        }
        case SyntheticShape::SpherePatch: {
            const Vec3 center{0.5, 0.5, 0.5};
            const double cos_cap = std::cos(spec.sphere_cap_angle_deg * std::numbers::pi / 180.0);
            for (std::size_t i = 0; i < spec.n_points; ++i) {
                const double u = cos_cap + (1.0 - cos_cap) * rng.next();  // cos(theta) on the cap
                const double phi = 2.0 * std::numbers::pi * rng.next();
                const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
                const Vec3 dir{s * std::cos(phi), s * std::sin(phi), u};
                cloud.points.push_back(center + dir * spec.sphere_radius);
                cloud.normals.push_back(dir);
            }
            break;
        }
    }
    return cloud;
}

}  // namespace fsgu
