#pragma once

// Reference implementations used to check the library. They follow the
// textbook definitions directly and share no code with include/plotdyn.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Series = std::vector<double>;
using Points = std::vector<std::vector<double>>;

/// Uniform prior times the running product of score rows, normalised per step.
inline Points cumulative_product(const Points& rows) {
    const std::size_t n = rows.front().size();
    std::vector<long double> acc(n, 1.0L / static_cast<long double>(n));
    Points out;
    for (const auto& row : rows) {
        long double s = 0.0L;
        for (std::size_t u = 0; u < n; ++u) {
            acc[u] *= row[u];
            s += acc[u];
        }
        std::vector<double> p(n);
        for (std::size_t u = 0; u < n; ++u) p[u] = static_cast<double>(acc[u] / s);
        out.push_back(p);
    }
    return out;
}

/// Piecewise-linear interpolation at t_j = j / (T - 1), located with floating
/// arithmetic, then renormalised.
inline Points resample(const Points& pts, std::size_t T) {
    const std::size_t M = pts.size();
    Points out;
    for (std::size_t j = 0; j < T; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(T - 1);
        std::vector<double> p;
        if (M == 1) {
            p = pts[0];
        } else {
            const double x = t * static_cast<double>(M - 1);
            std::size_t i = std::min(static_cast<std::size_t>(std::floor(x)), M - 2);
            const double f = x - static_cast<double>(i);
            p.resize(pts[0].size());
            for (std::size_t u = 0; u < p.size(); ++u) p[u] = pts[i][u] + f * (pts[i + 1][u] - pts[i][u]);
        }
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (auto& v : p) v /= s;
        out.push_back(p);
    }
    return out;
}

struct Stats {
    double mean, median, min, max, variance;
};

inline Stats stats(const Series& s) {
    const std::size_t n = s.size();
    long double sum = 0.0L;
    for (double v : s) sum += v;
    const long double mean = sum / static_cast<long double>(n);
    long double ss = 0.0L;
    for (double v : s) ss += (v - mean) * (v - mean);
    // selection by counting: the element with exactly k smaller-or-tied predecessors
    auto kth = [&](std::size_t k) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t less = 0, equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                less += s[j] < s[i];
                equal += s[j] == s[i];
            }
            if (less <= k && k < less + equal) return s[i];
        }
        return s[0];
    };
    const double med = n % 2 ? kth(n / 2) : (kth(n / 2 - 1) + kth(n / 2)) / 2.0;
    double mn = s[0], mx = s[0];
    for (double v : s) {
        if (v < mn) mn = v;
        if (v > mx) mx = v;
    }
    return {static_cast<double>(mean), med, mn, mx, static_cast<double>(ss / static_cast<long double>(n))};
}

/// Composite midpoint rule with `sub` cells per segment; exact on linear pieces.
inline double area(const Series& s, int sub = 64) {
    const double dt = 1.0 / static_cast<double>(s.size() - 1);
    long double a = 0.0L;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        for (int k = 0; k < sub; ++k) {
            const double f = (k + 0.5) / sub;
            a += (s[i] + f * (s[i + 1] - s[i])) * (dt / sub);
        }
    }
    return static_cast<double>(a);
}

struct Crossing {
    std::size_t count;
    double first_time;
};

/// Collapses the sign sequence of a - b into runs. Each zero run is one
/// meeting (at its first index); each directly adjacent +/- pair of samples
/// is one meeting at the intersection of the two line segments.
inline Crossing crossings(const Series& a, const Series& b) {
    const std::size_t T = a.size();
    const double dt = 1.0 / static_cast<double>(T - 1);
    std::vector<int> sign(T);
    for (std::size_t i = 0; i < T; ++i) sign[i] = (a[i] > b[i]) - (a[i] < b[i]);
    std::vector<double> times;
    for (std::size_t i = 0; i < T; ++i) {
        if (sign[i] == 0 && (i == 0 || sign[i - 1] != 0)) times.push_back(static_cast<double>(i) * dt);
        if (i + 1 < T && sign[i] * sign[i + 1] == -1) {
            const double s = (b[i] - a[i]) / ((a[i + 1] - a[i]) - (b[i + 1] - b[i]));
            times.push_back((static_cast<double>(i) + s) * dt);
        }
    }
    return {times.size(), times.empty() ? -1.0 : times.front()};
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix (row-major n x n).
/// Returns eigenvalues in descending order and eigenvectors as rows.
inline std::pair<std::vector<double>, Points> jacobi_eigen(Points a) {
    const std::size_t n = a.size();
    Points v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    std::vector<double> values;
    Points vectors;
    for (auto i : idx) {
        values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
        vectors.push_back(col);
    }
    return {values, vectors};
}

/// Sample covariance (divide by n - 1) of row-major data.
inline Points covariance(const Points& x) {
    const std::size_t n = x.size(), d = x[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : x) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
    }
    Points c(d, std::vector<double>(d, 0.0));
    for (const auto& r : x) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
        }
    }
    for (auto& row : c) {
        for (auto& v : row) v /= static_cast<double>(n - 1);
    }
    return c;
}

/// Mean silhouette straight from the definition.
inline double silhouette(const Points& x, const std::vector<int>& label) {
    const std::size_t n = x.size();
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t k = 0; k < x[i].size(); ++k) s += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
        return std::sqrt(s);
    };
    std::vector<int> clusters(label);
    std::sort(clusters.begin(), clusters.end());
    clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0, b = 1e300;
        std::size_t own = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && label[j] == label[i]) {
                a += dist(i, j);
                ++own;
            }
        }
        if (own == 0) continue;
        a /= static_cast<double>(own);
        for (int c : clusters) {
            if (c == label[i]) continue;
            double s = 0.0;
            std::size_t m = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (label[j] == c) {
                    s += dist(i, j);
                    ++m;
                }
            }
            b = std::min(b, s / static_cast<double>(m));
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

/// Adjusted Rand index between two labelings (1 for identical partitions).
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double pairs_both = 0.0, pairs_a = 0.0, pairs_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j], sb = b[i] == b[j];
            pairs_both += sa && sb;
            pairs_a += sa;
            pairs_b += sb;
        }
    }
    const double total = choose2(static_cast<double>(n));
    const double expected = pairs_a * pairs_b / total;
    const double max_index = 0.5 * (pairs_a + pairs_b);
    if (max_index == expected) return 1.0;
    return (pairs_both - expected) / (max_index - expected);
}

}  // namespace oracle
