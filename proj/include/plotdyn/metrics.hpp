#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "pca.hpp"

namespace plotdyn {

/// Shannon entropy in nats of the empirical label distribution.
template <typename Label>
double entropy(const std::vector<Label>& labels) {
    if (labels.empty()) throw DataError("entropy: empty label vector");
    std::map<Label, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    const double n = static_cast<double>(labels.size());
    double h = 0.0;
    for (const auto& [l, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

/// Empirical mutual information in nats from the contingency table.
template <typename A, typename B>
double mutual_information(const std::vector<A>& a, const std::vector<B>& b) {
    if (a.size() != b.size()) throw DataError("mutual_information: label vectors differ in length");
    if (a.empty()) throw DataError("mutual_information: empty label vectors");
    std::map<A, std::size_t> ca;
    std::map<B, std::size_t> cb;
    std::map<std::pair<A, B>, std::size_t> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++ca[a[i]];
        ++cb[b[i]];
        ++joint[{a[i], b[i]}];
    }
    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        const double nab = static_cast<double>(c);
        mi += nab / n * std::log(n * nab / (static_cast<double>(ca[key.first]) * static_cast<double>(cb[key.second])));
    }
    return std::max(mi, 0.0);
}

/// Mean silhouette with Euclidean distances. Points in singleton clusters
/// score 0. Needs at least two non-empty clusters.
inline double silhouette(const Matrix& data, const std::vector<int>& assignments, unsigned jobs = 1) {
    const auto n = static_cast<std::size_t>(data.rows());
    if (assignments.size() != n) throw DataError("silhouette: assignment count does not match rows");
    std::map<int, std::size_t> dense;
    for (int a : assignments) dense.emplace(a, 0);
    if (dense.size() < 2) throw DataError("silhouette: need at least two clusters");
    std::size_t next = 0;
    for (auto& [id, idx] : dense) idx = next++;
    std::vector<std::size_t> label(n);
    std::vector<double> size(dense.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        label[i] = dense[assignments[i]];
        size[label[i]] += 1.0;
    }

    std::vector<double> score(n, 0.0);
    auto work = [&](std::size_t begin, std::size_t step) {
        std::vector<double> sums(dense.size());
        for (std::size_t i = begin; i < n; i += step) {
            if (size[label[i]] < 2.0) continue;
            std::fill(sums.begin(), sums.end(), 0.0);
            const Vector dist = (data.rowwise() - data.row(static_cast<Eigen::Index>(i))).rowwise().norm();
            for (std::size_t j = 0; j < n; ++j) sums[label[j]] += dist(static_cast<Eigen::Index>(j));
            const double a = sums[label[i]] / (size[label[i]] - 1.0);
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < sums.size(); ++c) {
                if (c != label[i]) b = std::min(b, sums[c] / size[c]);
            }
            const double m = std::max(a, b);
            score[i] = m > 0.0 ? (b - a) / m : 0.0;
        }
    };
    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
        for (auto& th : pool) th.join();
    }
    double sum = 0.0;
    for (double s : score) sum += s;
    return sum / static_cast<double>(n);
}

struct ClusterRow {
    int cluster = 0;
    std::size_t size = 0;
    std::string dominant_tag;
    double dominant_pct = 0.0;
};

struct SummaryStats {
    double min = 0.0;
    double median = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

inline SummaryStats summarize(std::vector<double> v) {
    if (v.empty()) return {};
    std::sort(v.begin(), v.end());
    SummaryStats s;
    s.min = v.front();
    s.max = v.back();
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    const std::size_t m = v.size() / 2;
    s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    return s;
}

struct ClusterSummary {
    std::vector<ClusterRow> clusters;  // ascending cluster id, non-empty only
    SummaryStats size;
    SummaryStats dominant_pct;
};

/// Size and most frequent tag (ties: lexicographically smallest) of every cluster.
inline ClusterSummary cluster_report(const std::vector<int>& assignments, const std::vector<std::string>& tags) {
    if (assignments.size() != tags.size()) throw DataError("cluster_report: assignments and tags differ in length");
    std::map<int, std::map<std::string, std::size_t>> counts;
    for (std::size_t i = 0; i < tags.size(); ++i) ++counts[assignments[i]][tags[i]];
    ClusterSummary out;
    std::vector<double> sizes, pcts;
    for (const auto& [id, tag_counts] : counts) {
        ClusterRow row;
        row.cluster = id;
        std::size_t best = 0;
        for (const auto& [tag, c] : tag_counts) {
            row.size += c;
            if (c > best) {
                best = c;
                row.dominant_tag = tag;
            }
        }
        row.dominant_pct = 100.0 * static_cast<double>(best) / static_cast<double>(row.size);
        sizes.push_back(static_cast<double>(row.size));
        pcts.push_back(row.dominant_pct);
        out.clusters.push_back(std::move(row));
    }
    out.size = summarize(sizes);
    out.dominant_pct = summarize(pcts);
    return out;
}

}  // namespace plotdyn
