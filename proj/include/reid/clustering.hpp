#pragma once

#include "reid/rng.hpp"
#include "reid/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace reid::cluster {

constexpr int kNoise = -1;

template <typename S>
struct ClusterResult {
    std::vector<int> assignments;  // per point, kNoise for outliers
    int num_clusters = 0;
    Mat<S> means;  // num_clusters x dim, arithmetic mean of members
    S eps = 0;
    int min_pts = 0;
};

/// DBSCAN with Euclidean metric. Core point: >= min_pts neighbors within eps,
/// self included. Clusters are connected components of core points, numbered
/// by their smallest core-point index; a border point joins the cluster of
/// its smallest-index core neighbor. Fully deterministic.
template <typename S>
ClusterResult<S> dbscan(const Mat<S>& points, S eps, int min_pts) {
    ClusterResult<S> out;
    out.eps = eps;
    out.min_pts = min_pts;
    const int n = static_cast<int>(points.rows());
    if (n == 0) return out;
    if (eps <= S(0)) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

    Mat<S> d2 = (-2 * points * points.transpose()).eval();
    Vec<S> sq = points.rowwise().squaredNorm();
    d2.colwise() += sq;
    d2.rowwise() += sq.transpose();
    const S eps2 = eps * eps;

    std::vector<std::vector<int>> neigh(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (d2(i, j) <= eps2) neigh[static_cast<size_t>(i)].push_back(j);

    std::vector<bool> core(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        core[static_cast<size_t>(i)] = static_cast<int>(neigh[static_cast<size_t>(i)].size()) >= min_pts;

    out.assignments.assign(static_cast<size_t>(n), kNoise);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[static_cast<size_t>(i)] || out.assignments[static_cast<size_t>(i)] != kNoise)
            continue;
        const int cid = next++;
        std::queue<int> q;
        q.push(i);
        out.assignments[static_cast<size_t>(i)] = cid;
        while (!q.empty()) {
            const int p = q.front();
            q.pop();
            for (int j : neigh[static_cast<size_t>(p)])
                if (core[static_cast<size_t>(j)] && out.assignments[static_cast<size_t>(j)] == kNoise) {
                    out.assignments[static_cast<size_t>(j)] = cid;
                    q.push(j);
                }
        }
    }
    // border points: attach to the cluster of the smallest-index core neighbor
    for (int i = 0; i < n; ++i) {
        if (core[static_cast<size_t>(i)]) continue;
        for (int j : neigh[static_cast<size_t>(i)])
            if (core[static_cast<size_t>(j)]) {
                out.assignments[static_cast<size_t>(i)] = out.assignments[static_cast<size_t>(j)];
                break;  // neighbor lists are index-sorted
            }
    }

    out.num_clusters = next;
    out.means = Mat<S>::Zero(next, points.cols());
    std::vector<int> counts(static_cast<size_t>(next), 0);
    for (int i = 0; i < n; ++i) {
        const int c = out.assignments[static_cast<size_t>(i)];
        if (c == kNoise) continue;
        out.means.row(c) += points.row(i);
        ++counts[static_cast<size_t>(c)];
    }
    for (int c = 0; c < next; ++c) out.means.row(c) /= S(counts[static_cast<size_t>(c)]);
    return out;
}

/// eps = given percentile of the pairwise distance distribution (nearest-rank,
/// index ceil(p/100 * m) - 1 on the sorted distances). Point sets above
/// `max_points` are subsampled with the fixed seed.
template <typename S>
S select_eps(const Mat<S>& points, double percentile, int max_points = 2000,
             std::uint64_t seed = 12345) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) throw std::invalid_argument("select_eps: need at least 2 points");
    if (percentile <= 0.0 || percentile >= 100.0)
        throw std::invalid_argument("select_eps: percentile out of (0,100)");

    Mat<S> pts;
    if (n > max_points) {
        std::vector<int> idx(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
        Rng rng(seed);
        rng.shuffle(idx);
        pts.resize(max_points, points.cols());
        for (int i = 0; i < max_points; ++i) pts.row(i) = points.row(idx[static_cast<size_t>(i)]);
    } else {
        pts = points;
    }
    const int m = static_cast<int>(pts.rows());
    std::vector<S> dists;
    dists.reserve(static_cast<size_t>(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            dists.push_back(S((pts.row(i) - pts.row(j)).norm()));
    std::sort(dists.begin(), dists.end());
    const long total = static_cast<long>(dists.size());
    long rank = static_cast<long>(std::ceil(percentile / 100.0 * static_cast<double>(total)));
    rank = std::max(1L, std::min(total, rank));
    const S eps = dists[static_cast<size_t>(rank - 1)];
    if (eps <= S(0))
        throw std::runtime_error("select_eps: degenerate point set (eps = 0)");
    return eps;
}

}  // namespace reid::cluster
