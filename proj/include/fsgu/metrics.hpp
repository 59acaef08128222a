#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsgu/kdtree.hpp"
#include "fsgu/point_cloud.hpp"

namespace fsgu {

enum class Aggregation { MeanNorm, Rms };

inline const char* aggregation_name(Aggregation a) {
    return a == Aggregation::MeanNorm ? "mean-norm" : "rms";
}

/// Reference point closest to the query (Euclidean, ties to the lowest
/// index) and the error vector nearest - query. Plain exhaustive scan; the
/// batched metrics below use KdTree3, which must agree with this exactly.
inline std::pair<std::size_t, Vec3> nearest_neighbor(const PointCloud& refset, const Vec3& query) {
    if (refset.empty()) throw std::invalid_argument("nearest_neighbor: empty reference set");
    std::size_t best = 0;
    double best_sq = KdTree3::squared_distance(query, refset.points[0]);
    for (std::size_t i = 1; i < refset.size(); ++i) {
        const double sq = KdTree3::squared_distance(query, refset.points[i]);
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {best, refset.points[best] - query};
}

namespace detail {

inline double aggregate(const std::vector<double>& values, Aggregation agg) {
    double acc = 0.0;
    if (agg == Aggregation::MeanNorm) {
        for (double v : values) acc += v;
        return acc / static_cast<double>(values.size());
    }
    for (double v : values) acc += v * v;
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace detail

/// Directional point-to-point error test -> ref: the nearest-neighbor error
/// magnitudes aggregated as their mean (mean-norm) or root mean square.
inline double p2point(const PointCloud& test, const PointCloud& ref, Aggregation agg) {
    if (test.empty() || ref.empty()) throw std::invalid_argument("p2point: empty cloud");
    const KdTree3 tree(ref.points);
    std::vector<double> dists;
    dists.reserve(test.size());
    for (const Vec3& q : test.points) {
        dists.push_back(std::sqrt(tree.nearest(q).sq_dist));
    }
    return detail::aggregate(dists, agg);
}

/// Directional point-to-plane error test -> ref: each nearest-neighbor error
/// vector is projected (absolute value) onto the normal of the reference
/// point it hit, then aggregated like p2point.
inline double p2plane(const PointCloud& test, const PointCloud& ref, const std::vector<Vec3>& ref_normals,
                      Aggregation agg) {
    if (test.empty() || ref.empty()) throw std::invalid_argument("p2plane: empty cloud");
    if (ref_normals.size() != ref.size()) throw std::invalid_argument("p2plane: normal count mismatch");
    const KdTree3 tree(ref.points);
    std::vector<double> dists;
    dists.reserve(test.size());
    for (const Vec3& q : test.points) {
        const auto hit = tree.nearest(q);
        const Vec3 e = ref.points[hit.index] - q;
        dists.push_back(std::abs(e.dot(ref_normals[hit.index])));
    }
    return detail::aggregate(dists, agg);
}

struct EstimatedNormals {
    std::vector<Vec3> normals;
    std::vector<bool> low_confidence;  // degenerate neighborhoods (line-like)
};

/// PCA normals: per point, the smallest principal direction of the
/// covariance of itself and its k nearest neighbors. The sign points away
/// from the neighborhood centroid when that is meaningful; orientation
/// consistency across the cloud is not guaranteed. Degenerate line-like
/// neighborhoods fall back to a fixed-axis perpendicular and are flagged.
inline EstimatedNormals estimate_normals(const PointCloud& cloud, std::size_t k) {
    if (k < 3) throw std::invalid_argument("estimate_normals: k must be >= 3");
    if (cloud.size() <= k) throw std::invalid_argument("estimate_normals: cloud must have more than k points");

    const KdTree3 tree(cloud.points);
    EstimatedNormals out;
    out.normals.resize(cloud.size());
    out.low_confidence.assign(cloud.size(), false);

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto hits = tree.knearest(cloud.points[i], k + 1);  // the point itself plus k others

        Vec3 centroid{};
        for (const auto& h : hits) centroid = centroid + cloud.points[h.index];
        centroid = centroid / static_cast<double>(hits.size());

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& h : hits) {
            const Vec3 d = cloud.points[h.index] - centroid;
            const Eigen::Vector3d v(d.x, d.y, d.z);
            cov += v * v.transpose();
        }
        cov /= static_cast<double>(hits.size());

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
        es.computeDirect(cov);
        const Eigen::Vector3d evals = es.eigenvalues();  // ascending
        Eigen::Vector3d n = es.eigenvectors().col(0);

        const double span = std::max(evals[2], 1e-300);
        if ((evals[1] - evals[0]) <= 1e-9 * span) {
            // Two vanishing directions: the neighborhood is a line. Any
            // perpendicular works; derive one from the first fixed axis
            // (z, y, x order) not parallel to it.
            out.low_confidence[i] = true;
            const Eigen::Vector3d line = es.eigenvectors().col(2);
            Eigen::Vector3d axis(0.0, 0.0, 1.0);
            if (std::abs(line.dot(axis)) > 0.9) axis = Eigen::Vector3d(0.0, 1.0, 0.0);
            if (std::abs(line.dot(axis)) > 0.9) axis = Eigen::Vector3d(1.0, 0.0, 0.0);
            n = (axis - line.dot(axis) * line).normalized();
        }

        const Vec3 away = cloud.points[i] - centroid;
        const double orientation = n.x() * away.x + n.y() * away.y + n.z() * away.z;
        if (orientation < 0.0) {
            n = -n;
        } else if (orientation == 0.0) {
            // Flat neighborhood gives no preferred side; fix the sign by the
            // largest-magnitude component.
            int major = 0;
            for (int a = 1; a < 3; ++a) {
                if (std::abs(n[a]) > std::abs(n[major])) major = a;
            }
            if (n[major] < 0.0) n = -n;
        }
        out.normals[i] = Vec3{n.x(), n.y(), n.z()}.normalized();
    }
    return out;
}

struct MetricOptions {
    Aggregation aggregation = Aggregation::MeanNorm;
    std::size_t normals_k = 16;
};

struct MetricReport {
    double p2point_ab = 0.0;  // test -> ref
    double p2point_ba = 0.0;  // ref -> test
    double p2point_sym = 0.0;
    double p2plane_ab = 0.0;
    double p2plane_ba = 0.0;
    double p2plane_sym = 0.0;
    Aggregation aggregation = Aggregation::MeanNorm;
    std::string normal_source;  // "provided" or "estimated, k=<k>"
    std::size_t n_test = 0;
    std::size_t n_ref = 0;
};

namespace detail {

// Reverse-direction plane error: each query point's error vector projected
// onto that query point's own normal. Lets both report directions run off
// the reference cloud's normals alone.
inline double p2plane_query_normals(const PointCloud& query, const std::vector<Vec3>& query_normals,
                                    const PointCloud& target, Aggregation agg) {
    const KdTree3 tree(target.points);
    std::vector<double> dists;
    dists.reserve(query.size());
    for (std::size_t i = 0; i < query.size(); ++i) {
        const auto hit = tree.nearest(query.points[i]);
        const Vec3 e = target.points[hit.index] - query.points[i];
        dists.push_back(std::abs(e.dot(query_normals[i])));
    }
    return detail::aggregate(dists, agg);
}

}  // namespace detail

/// Both directions plus symmetric maxima for both metrics. Normals come from
/// the reference cloud: as provided, or PCA-estimated with options.normals_k.
inline MetricReport metric_report(const PointCloud& test, const PointCloud& ref,
                                  const MetricOptions& options = {}) {
    if (test.empty() || ref.empty()) throw std::invalid_argument("metric_report: empty cloud");

    MetricReport report;
    report.aggregation = options.aggregation;
    report.n_test = test.size();
    report.n_ref = ref.size();

    report.p2point_ab = p2point(test, ref, options.aggregation);
    report.p2point_ba = p2point(ref, test, options.aggregation);
    report.p2point_sym = std::max(report.p2point_ab, report.p2point_ba);

    std::vector<Vec3> ref_normals;
    if (ref.has_normals()) {
        ref_normals = ref.normals;
        report.normal_source = "provided";
    } else {
        ref_normals = estimate_normals(ref, options.normals_k).normals;
        report.normal_source = "estimated, k=" + std::to_string(options.normals_k);
    }
    report.p2plane_ab = p2plane(test, ref, ref_normals, options.aggregation);
    report.p2plane_ba = detail::p2plane_query_normals(ref, ref_normals, test, options.aggregation);
    report.p2plane_sym = std::max(report.p2plane_ab, report.p2plane_ba);
    return report;
}

}  // namespace fsgu
