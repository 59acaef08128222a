#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "fsgu/point_cloud.hpp"

namespace fsgu {

/// One occupied cell of the regular dice grid. Points keep their real-valued
/// positions; only membership is recorded.
struct Block {
    std::array<int, 3> cell{};          // (i, j, k) cell index per axis
    std::vector<std::size_t> indices;   // into the source cloud, cloud order
};

struct BlockGrid {
    int resolution = 1;                 // cells per axis
    double block_size = 1.0;            // 1 / resolution, normalized units
    std::map<std::int64_t, Block> blocks;  // keyed by linear cell index, only occupied cells

    std::int64_t linear_index(int i, int j, int k) const {
        return static_cast<std::int64_t>(i) +
               static_cast<std::int64_t>(resolution) * (static_cast<std::int64_t>(j) +
               static_cast<std::int64_t>(resolution) * static_cast<std::int64_t>(k));
    }
};

/// Modelling frame of a block: q_axis is predicted as a function of the
/// other two axes, which keep their natural x-before-y-before-z order.
struct AxisFrame {
    int q_axis = 2;
    int o_axis = 0;
    int p_axis = 1;
};

/// Block samples in the local frame. o/p are normalized into [0,1] within
/// the dice extent; q stays in raw normalized-cloud units.
struct LocalSamples {
    std::vector<double> obar;
    std::vector<double> pbar;
    std::vector<double> q;
    AxisFrame frame;
    Vec3 dice_min{};       // minimum corner of the dice, global units
    double block_size = 1.0;

    std::size_t size() const { return obar.size(); }

    /// Maps a local (obar, pbar, q) back to global 3-D coordinates.
    Vec3 to_global(double ob, double pb, double qv) const {
        Vec3 p{};
        p[frame.o_axis] = dice_min[frame.o_axis] + ob * block_size;
        p[frame.p_axis] = dice_min[frame.p_axis] + pb * block_size;
        p[frame.q_axis] = qv;
        return p;
    }
};

/// Default dice resolution for a cloud of n points: targets on the order of
/// a few hundred samples per occupied block.
inline int auto_grid_resolution(std::size_t n_points) {
    if (n_points < 1) throw std::invalid_argument("auto_grid_resolution: need at least one point");
    const int g = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n_points) / 512.0)));
    return std::clamp(g, 4, 64);
}

/// Dices the unit cube into resolution^3 cells and assigns every point to the
/// cell floor(coordinate * resolution), clamped so that coordinates exactly
/// at 1 fold into the last cell. Input must be unit-cube normalized.
inline BlockGrid partition_blocks(const PointCloud& cloud, int resolution) {
    if (cloud.empty()) throw std::invalid_argument("partition_blocks: empty cloud");
    if (resolution < 1) throw std::invalid_argument("partition_blocks: resolution must be >= 1");

    BlockGrid grid;
    grid.resolution = resolution;
    grid.block_size = 1.0 / static_cast<double>(resolution);

    for (std::size_t idx = 0; idx < cloud.size(); ++idx) {
        const Vec3& p = cloud.points[idx];
        std::array<int, 3> cell{};
        for (int a = 0; a < 3; ++a) {
            if (p[a] < -1e-9 || p[a] > 1.0 + 1e-9) {
                throw std::invalid_argument("partition_blocks: cloud is not unit-cube normalized");
            }
            const int c = static_cast<int>(std::floor(p[a] * resolution));
            cell[a] = std::clamp(c, 0, resolution - 1);
        }
        Block& block = grid.blocks[grid.linear_index(cell[0], cell[1], cell[2])];
        block.cell = cell;
        block.indices.push_back(idx);
    }
    return grid;
}

namespace detail {

// Two-pass population variance; immune to the cancellation a single-pass
// sum-of-squares form suffers on offset data.
inline double population_variance(const PointCloud& cloud, const std::vector<std::size_t>& indices, int axis) {
    double mean = 0.0;
    for (std::size_t i : indices) mean += cloud.points[i][axis];
    mean /= static_cast<double>(indices.size());
    double acc = 0.0;
    for (std::size_t i : indices) {
        const double d = cloud.points[i][axis] - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(indices.size());
}

}  // namespace detail

/// Picks the axis of smallest variance as the modelled dimension q.
/// Exact ties resolve in the fixed order z, then y, then x; the remaining
/// axes become (o, p) in x-before-y-before-z order.
inline AxisFrame select_model_axis(const PointCloud& cloud, const Block& block) {
    if (block.indices.empty()) throw std::invalid_argument("select_model_axis: empty block");

    const double var_x = detail::population_variance(cloud, block.indices, 0);
    const double var_y = detail::population_variance(cloud, block.indices, 1);
    const double var_z = detail::population_variance(cloud, block.indices, 2);

    int q = 2;
    double best = var_z;
    if (var_y < best) {
        q = 1;
        best = var_y;
    }
    if (var_x < best) q = 0;

    AxisFrame frame;
    frame.q_axis = q;
    if (q == 0) {
        frame.o_axis = 1;
        frame.p_axis = 2;
    } else if (q == 1) {
        frame.o_axis = 0;
        frame.p_axis = 2;
    } else {
        frame.o_axis = 0;
        frame.p_axis = 1;
    }
    return frame;
}

/// Expresses a block's points in the given frame, with o/p mapped affinely
/// into [0,1] over the dice extent (clamped against one-ulp overshoot at the
/// upper cell boundary) and q copied raw.
inline LocalSamples to_local_frame(const PointCloud& cloud, const BlockGrid& grid, const Block& block,
                                   const AxisFrame& frame) {
    LocalSamples s;
    s.frame = frame;
    s.block_size = grid.block_size;
    s.dice_min = {block.cell[0] * grid.block_size, block.cell[1] * grid.block_size,
                  block.cell[2] * grid.block_size};
    s.obar.reserve(block.indices.size());
    s.pbar.reserve(block.indices.size());
    s.q.reserve(block.indices.size());
    for (std::size_t i : block.indices) {
        const Vec3& p = cloud.points[i];
        const double ob = (p[frame.o_axis] - s.dice_min[frame.o_axis]) / grid.block_size;
        const double pb = (p[frame.p_axis] - s.dice_min[frame.p_axis]) / grid.block_size;
        s.obar.push_back(std::clamp(ob, 0.0, 1.0));
        s.pbar.push_back(std::clamp(pb, 0.0, 1.0));
        s.q.push_back(p[frame.q_axis]);
    }
    return s;
}

}  // namespace fsgu
