#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "fsgu/delaunay.hpp"
#include "fsgu/partition.hpp"
#include "fsgu/point_cloud.hpp"
#include "fsgu/spectral_model.hpp"

namespace fsgu {

struct UpsampleConfig {
    double scale = 2.0;              // target output/input point ratio
    ModelConfig model{};
    int grid_resolution = 0;         // 0 selects auto_grid_resolution
    std::size_t min_block_points = 3;
    double clamp_margin = 0.5;       // new-q clamp band, as a fraction of the block q-range

    void validate() const {
        if (!(scale > 1.0)) throw std::invalid_argument("UpsampleConfig: scale must be > 1");
        if (grid_resolution < 0) throw std::invalid_argument("UpsampleConfig: grid must be >= 0");
        if (min_block_points < 3) throw std::invalid_argument("UpsampleConfig: min_block_points must be >= 3");
        if (!(clamp_margin >= 0.0)) throw std::invalid_argument("UpsampleConfig: clamp_margin must be >= 0");
        model.validate();
    }
};

/// Splits the global new-point budget round((scale-1) * total_in) across
/// blocks proportionally to their populations, by largest-remainder rounding
/// (fractional ties to the lower block index). Blocks below min_block_points
/// or marked ineligible get quota zero; their share goes to the others.
inline std::vector<std::size_t> plan_budget(const std::vector<std::size_t>& block_counts,
                                            std::size_t total_in, double scale,
                                            std::size_t min_block_points = 3,
                                            const std::vector<bool>* eligible = nullptr) {
    if (std::accumulate(block_counts.begin(), block_counts.end(), std::size_t{0}) != total_in) {
        throw std::invalid_argument("plan_budget: block counts do not sum to total_in");
    }
    if (!(scale > 1.0)) throw std::invalid_argument("plan_budget: scale must be > 1");

    const std::size_t target =
        static_cast<std::size_t>(std::llround((scale - 1.0) * static_cast<double>(total_in)));
    std::vector<std::size_t> quotas(block_counts.size(), 0);

    std::uint64_t eligible_total = 0;
    for (std::size_t i = 0; i < block_counts.size(); ++i) {
        const bool ok = block_counts[i] >= min_block_points && (!eligible || (*eligible)[i]);
        if (ok) eligible_total += block_counts[i];
    }
    if (eligible_total == 0 || target == 0) return quotas;

    // Integer largest-remainder apportionment: exact, so rounding can never
    // leak or double-count a point.
    struct Share {
        std::size_t index;
        std::uint64_t remainder;
    };
    std::vector<Share> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < block_counts.size(); ++i) {
        const bool ok = block_counts[i] >= min_block_points && (!eligible || (*eligible)[i]);
        if (!ok) continue;
        const std::uint64_t numer = static_cast<std::uint64_t>(target) * block_counts[i];
        quotas[i] = static_cast<std::size_t>(numer / eligible_total);
        assigned += quotas[i];
        remainders.push_back({i, numer % eligible_total});
    }
    std::sort(remainders.begin(), remainders.end(), [](const Share& a, const Share& b) {
        if (a.remainder != b.remainder) return a.remainder > b.remainder;
        return a.index < b.index;
    });
    for (std::size_t r = 0; assigned < target && r < remainders.size(); ++r, ++assigned) {
        ++quotas[remainders[r].index];
    }
    return quotas;
}

/// Inserts up to `quota` points into one block: Delaunay edge midpoints in
/// the (obar, pbar) plane, re-triangulated recursively while a round yields
/// fewer candidates than still needed (capped at 8 rounds). The final round
/// keeps the candidates with the longest parent edges, ties by lexicographic
/// position. Heights come from the model and are clamped into the block's
/// sample q-range widened by clamp_margin on each side.
inline std::vector<Vec3> upsample_block(const LocalSamples& samples, const SurfaceModel& model,
                                        std::size_t quota, const UpsampleConfig& cfg) {
    std::vector<Vec3> out;
    if (quota == 0) return out;

    std::vector<std::array<double, 2>> verts(samples.size());
    std::set<std::array<double, 2>> occupied;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        verts[j] = {samples.obar[j], samples.pbar[j]};
        occupied.insert(verts[j]);
    }

    std::vector<EdgeMidpoint> accepted;
    std::size_t remaining = quota;
    constexpr int kMaxRounds = 8;
    for (int round = 0; round < kMaxRounds && remaining > 0; ++round) {
        const Triangulation tri = delaunay(verts);
        std::vector<EdgeMidpoint> cands = edge_midpoints(tri);

        // Drop candidates that coincide with an existing vertex and merge
        // equal positions (keeping the longest parent edge); duplicated
        // vertices would poison later rounds.
        std::vector<EdgeMidpoint> unique_cands;
        unique_cands.reserve(cands.size());
        for (const EdgeMidpoint& c : cands) {
            if (occupied.count(c.position)) continue;
            if (!unique_cands.empty() && unique_cands.back().position == c.position) {
                unique_cands.back().parent_length = std::max(unique_cands.back().parent_length, c.parent_length);
            } else {
                unique_cands.push_back(c);
            }
        }
        if (unique_cands.empty()) break;

        if (unique_cands.size() < remaining) {
            for (const EdgeMidpoint& c : unique_cands) {
                accepted.push_back(c);
                verts.push_back(c.position);
                occupied.insert(c.position);
            }
            remaining -= unique_cands.size();
        } else {
            std::sort(unique_cands.begin(), unique_cands.end(), [](const EdgeMidpoint& a, const EdgeMidpoint& b) {
                if (a.parent_length != b.parent_length) return a.parent_length > b.parent_length;
                return a.position < b.position;
            });
            accepted.insert(accepted.end(), unique_cands.begin(),
                            unique_cands.begin() + static_cast<std::ptrdiff_t>(remaining));
            remaining = 0;
        }
    }

    const auto [q_lo_it, q_hi_it] = std::minmax_element(samples.q.begin(), samples.q.end());
    const double range = *q_hi_it - *q_lo_it;
    const double lo = *q_lo_it - cfg.clamp_margin * range;
    const double hi = *q_hi_it + cfg.clamp_margin * range;

    out.reserve(accepted.size());
    for (const EdgeMidpoint& c : accepted) {
        double q = eval_model_point(model, c.position[0], c.position[1]);
        q = std::clamp(q, lo, hi);
        out.push_back(samples.to_global(c.position[0], c.position[1], q));
    }
    return out;
}

struct BlockStats {
    std::array<int, 3> cell{};
    std::int64_t linear_index = 0;
    std::size_t points_in = 0;
    std::size_t quota = 0;
    std::size_t achieved = 0;
    bool eligible = false;
    bool fitted = false;
    int q_axis = 2;
    int fit_iterations = 0;
    double final_energy = 0.0;
};

struct UpsampleResult {
    PointCloud cloud;                 // originals first, then new points by block
    int grid_resolution = 0;
    std::size_t requested_new = 0;
    std::size_t achieved_new = 0;
    std::size_t shortfall = 0;
    std::vector<BlockStats> blocks;
};

/// Full upsampling pipeline over a unit-cube-normalized cloud: partition,
/// per-block axis selection, frequency-model fit and triangulated point
/// insertion, then an ordered merge. Original points pass through bit-exactly
/// ahead of the new points, which follow in block linear-index order.
/// Normals are not propagated; inserted points have none.
inline UpsampleResult upsample_cloud(const PointCloud& cloud, const UpsampleConfig& cfg) {
    cfg.validate();
    if (cloud.empty()) throw std::invalid_argument("upsample_cloud: empty cloud");

    UpsampleResult result;
    result.grid_resolution =
        cfg.grid_resolution > 0 ? cfg.grid_resolution : auto_grid_resolution(cloud.size());
    const BlockGrid grid = partition_blocks(cloud, result.grid_resolution);

    struct Prepared {
        const Block* block;
        std::int64_t linear;
        LocalSamples samples;
        AxisFrame frame;
        bool eligible;
    };
    std::vector<Prepared> prepared;
    prepared.reserve(grid.blocks.size());
    std::vector<std::size_t> counts;
    std::vector<bool> eligible_mask;
    for (const auto& [linear, block] : grid.blocks) {
        Prepared p;
        p.block = &block;
        p.linear = linear;
        p.frame = select_model_axis(cloud, block);
        p.samples = to_local_frame(cloud, grid, block, p.frame);
        std::vector<std::array<double, 2>> plane(p.samples.size());
        for (std::size_t j = 0; j < p.samples.size(); ++j) plane[j] = {p.samples.obar[j], p.samples.pbar[j]};
        p.eligible = block.indices.size() >= cfg.min_block_points && !points_collinear(plane);
        counts.push_back(block.indices.size());
        eligible_mask.push_back(p.eligible);
        prepared.push_back(std::move(p));
    }

    const std::vector<std::size_t> quotas =
        plan_budget(counts, cloud.size(), cfg.scale, cfg.min_block_points, &eligible_mask);
    result.requested_new =
        static_cast<std::size_t>(std::llround((cfg.scale - 1.0) * static_cast<double>(cloud.size())));

    result.cloud.points = cloud.points;
    result.cloud.points.reserve(cloud.size() + result.requested_new);

    for (std::size_t b = 0; b < prepared.size(); ++b) {
        const Prepared& p = prepared[b];
        BlockStats stats;
        stats.cell = p.block->cell;
        stats.linear_index = p.linear;
        stats.points_in = p.block->indices.size();
        stats.quota = quotas[b];
        stats.eligible = p.eligible;
        stats.q_axis = p.frame.q_axis;

        if (p.eligible && quotas[b] > 0) {
            const FitResult fit = fit_model(p.samples, cfg.model);
            stats.fitted = true;
            stats.fit_iterations = fit.iterations;
            stats.final_energy = fit.final_energy;
            try {
                const std::vector<Vec3> fresh = upsample_block(p.samples, fit.model, quotas[b], cfg);
                stats.achieved = fresh.size();
                result.cloud.points.insert(result.cloud.points.end(), fresh.begin(), fresh.end());
            } catch (const NotTriangulableError&) {
                stats.achieved = 0;
            }
        }
        result.achieved_new += stats.achieved;
        result.blocks.push_back(stats);
    }
    result.shortfall = result.requested_new - result.achieved_new;
    return result;
}

}  // namespace fsgu
