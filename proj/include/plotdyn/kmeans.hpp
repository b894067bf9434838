#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pca.hpp"
#include "util.hpp"

namespace plotdyn {

struct KmeansOptions {
    Eigen::Index k = 8;
    std::uint64_t seed = 42;
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-4;  // relative to the mean per-column variance
};

struct KmeansResult {
    Eigen::Index k = 0;
    Matrix centroids;                  // k x dims
    std::vector<int> assignments;      // one per row
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations = 0;
    /// Inertia after every assignment step, one trace per restart.
    std::vector<std::vector<double>> restart_traces;
};

namespace detail {

inline double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

/// Nearest centroid per row. Distances via ||x||^2 - 2 x.c + ||c||^2 for the
/// search, then the winner's exact squared distance is recomputed.
inline double assign_nearest(const Matrix& data, const Matrix& centroids, std::vector<int>& labels) {
    const Vector cnorm = centroids.rowwise().squaredNorm();
    double inertia = 0.0;
    constexpr Eigen::Index kBlock = 512;
    for (Eigen::Index start = 0; start < data.rows(); start += kBlock) {
        const Eigen::Index len = std::min(kBlock, data.rows() - start);
        const Matrix cross = data.middleRows(start, len) * centroids.transpose();
        for (Eigen::Index r = 0; r < len; ++r) {
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
                const double dd = cnorm(c) - 2.0 * cross(r, c);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            // refine among near-ties with exact distances
            double exact = squared_distance(data, start + r, centroids, best);
            const double slack = 1e-9 * (1.0 + exact + cnorm(best));
            for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
                if (c == best || cnorm(c) - 2.0 * cross(r, c) > best_d + slack) continue;
                const double e = squared_distance(data, start + r, centroids, c);
                if (e < exact || (e == exact && c < best)) {
                    exact = e;
                    best = c;
                }
            }
            labels[static_cast<std::size_t>(start + r)] = static_cast<int>(best);
            inertia += exact;
        }
    }
    return inertia;
}

/// k-means++ seeding with D^2 sampling.
inline Matrix kmeanspp_init(const Matrix& data, Eigen::Index k, Rng& rng) {
    const Eigen::Index n = data.rows();
    Matrix centroids(k, data.cols());
    centroids.row(0) = data.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n))));
    Vector closest(n);
    for (Eigen::Index i = 0; i < n; ++i) closest(i) = squared_distance(data, i, centroids, 0);
    for (Eigen::Index c = 1; c < k; ++c) {
        const double sum = closest.sum();
        Eigen::Index pick = 0;
        if (sum > 0.0) {
            double target = uniform01(rng) * sum;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= closest(i);
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
            while (closest(pick) == 0.0 && pick > 0) --pick;  // never pick an existing centroid
        } else {
            pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
        }
        centroids.row(c) = data.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            closest(i) = std::min(closest(i), squared_distance(data, i, centroids, c));
        }
    }
    return centroids;
}

inline void update_means(const Matrix& data, const std::vector<int>& labels, Matrix& centroids,
                         std::vector<Eigen::Index>& counts) {
    Matrix sums = Matrix::Zero(centroids.rows(), centroids.cols());
    counts.assign(static_cast<std::size_t>(centroids.rows()), 0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto c = labels[static_cast<std::size_t>(i)];
        sums.row(c) += data.row(i);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
    }
}

}  // namespace detail

/// Lloyd iterations from the given centroids. Empty clusters take the point
/// farthest from its centroid. The returned assignments are the nearest
/// centroids of the returned centroids.
inline KmeansResult lloyd(const Matrix& data, Matrix centroids, int max_iter, double tol) {
    const Eigen::Index k = centroids.rows();
    KmeansResult r;
    r.k = k;
    std::vector<int> labels(static_cast<std::size_t>(data.rows()), 0);
    std::vector<int> previous;
    std::vector<Eigen::Index> counts;
    std::vector<double> trace;

    double mean_var = 0.0;
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        mean_var += (data.col(c).array() - data.col(c).mean()).square().mean();
    }
    mean_var = data.cols() > 0 ? mean_var / static_cast<double>(data.cols()) : 0.0;
    const double tol_abs = tol * mean_var;

    double inertia = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        inertia = detail::assign_nearest(data, centroids, labels);
        trace.push_back(inertia);
        if (labels == previous) break;
        const Matrix old = centroids;
        detail::update_means(data, labels, centroids, counts);
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < data.rows(); ++i) {
                const auto owner = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
                if (counts[owner] < 2) continue;
                const double dd = detail::squared_distance(data, i, centroids, static_cast<Eigen::Index>(owner));
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            if (far < 0) break;
            const auto owner = static_cast<std::size_t>(labels[static_cast<std::size_t>(far)]);
            --counts[owner];
            ++counts[static_cast<std::size_t>(c)];
            labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
            centroids.row(c) = data.row(far);
            detail::update_means(data, labels, centroids, counts);
        }
        previous = labels;
        if ((centroids - old).squaredNorm() <= tol_abs) {
            inertia = detail::assign_nearest(data, centroids, labels);
            trace.push_back(inertia);
            ++it;
            break;
        }
    }
    if (it == max_iter && labels != previous) {
        // ran out of iterations right after an update: reassign so the
        // nearest-centroid property holds for the returned pair
        inertia = detail::assign_nearest(data, centroids, labels);
        trace.push_back(inertia);
    }
    r.centroids = std::move(centroids);
    r.assignments = std::move(labels);
    r.inertia = inertia;
    r.iterations = it;
    r.restart_traces.push_back(std::move(trace));
    return r;
}

/// k-means++ seeded Lloyd with n_init restarts; the lowest inertia wins
/// (earliest restart on ties).
inline KmeansResult kmeans(const Matrix& data, const KmeansOptions& opt) {
    if (opt.k < 1) throw ConfigError("kmeans: k must be positive");
    if (opt.k > data.rows()) {
        throw ConfigError("kmeans: k = " + std::to_string(opt.k) + " exceeds the number of rows (" +
                          std::to_string(data.rows()) + ")");
    }
    if (opt.n_init < 1 || opt.max_iter < 1) throw ConfigError("kmeans: n_init and max_iter must be positive");
    if (!data.allFinite()) throw DataError("kmeans: data contains non-finite values");

    Rng rng(opt.seed);
    KmeansResult best;
    std::vector<std::vector<double>> traces;
    for (int run = 0; run < opt.n_init; ++run) {
        auto r = lloyd(data, detail::kmeanspp_init(data, opt.k, rng), opt.max_iter, opt.tol);
        traces.push_back(r.restart_traces.front());
        if (run == 0 || r.inertia < best.inertia) best = std::move(r);
    }
    best.seed = opt.seed;
    best.restart_traces = std::move(traces);
    return best;
}

}  // namespace plotdyn
