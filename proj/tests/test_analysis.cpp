#include <cmath>
#include <set>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "plotdyn/cluster.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace plotdyn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d) {
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = normal01(rng) * static_cast<double>(j + 1);
    }
    return m;
}

oracle::Points rows_of(const Matrix& m) {
    oracle::Points p(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) p[static_cast<std::size_t>(i)].push_back(m(i, j));
    }
    return p;
}

struct Blobs {
    Matrix data;
    std::vector<int> truth;
};

Blobs three_blobs(Rng& rng, int per_blob, double sigma) {
    const double centers[3][2] = {{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}};
    Blobs b;
    b.data.resize(3 * per_blob, 2);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < per_blob; ++i) {
            const int r = c * per_blob + i;
            b.data(r, 0) = centers[c][0] + sigma * normal01(rng);
            b.data(r, 1) = centers[c][1] + sigma * normal01(rng);
            b.truth.push_back(c);
        }
    }
    return b;
}

}  // namespace

TEST_CASE("standardizer drops constant columns") {
    Matrix m(4, 3);
    m << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 8;
    const auto s = Standardizer::fit(m);
    CHECK(s.kept == std::vector<Eigen::Index>{0, 2});
    const Matrix z = s.transform(m);
    CHECK(z.cols() == 2);
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK_THAT(z.col(c).mean(), WithinAbs(0.0, 1e-15));
        CHECK_THAT(z.col(c).squaredNorm() / 4.0, WithinAbs(1.0, 1e-14));
    }
}

TEST_CASE("rank-1 data has one component") {
    Rng rng(1);
    Vector dir(5);
    dir << 1, -2, 0.5, 3, 1;
    Matrix m(30, 5);
    for (Eigen::Index i = 0; i < 30; ++i) m.row(i) = (normal01(rng) * dir).transpose();
    const auto p = pca_fit(m, 3);
    CHECK_THAT(p.explained_variance_ratio(0), WithinAbs(1.0, 1e-9));
    const Vector unit = dir.normalized();
    CHECK_THAT(std::abs(p.components.row(0).dot(unit)), WithinAbs(1.0, 1e-12));
    CHECK(p.components(0, 3) > 0.0);  // sign: largest entry positive
}

TEST_CASE("components match a covariance eigendecomposition") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(uniform_index(rng, 30));
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(uniform_index(rng, 7));
        const Matrix m = random_matrix(rng, n, d);
        const auto k = std::min(n, d);
        const auto p = pca_fit(m, k);
        const auto [values, vectors] = oracle::jacobi_eigen(oracle::covariance(rows_of(m)));
        for (Eigen::Index c = 0; c < k; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            CHECK_THAT(p.explained_variance(c), WithinRel(values[cc], 1e-9));
            double dot = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) dot += p.components(c, j) * vectors[cc][static_cast<std::size_t>(j)];
            CHECK_THAT(std::abs(dot), WithinAbs(1.0, 1e-9));
        }
    }
}

TEST_CASE("full-rank projection reconstructs the data") {
    Rng rng(3);
    const Matrix m = random_matrix(rng, 25, 6);
    const auto p = pca_fit(m, 6);
    const Matrix z = pca_transform(p, m);
    const Matrix back = (z * p.components).rowwise() + p.mean.transpose();
    CHECK((back - m).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THAT(p.explained_variance_ratio.sum(), WithinAbs(1.0, 1e-12));
    for (Eigen::Index c = 1; c < 6; ++c) CHECK(p.explained_variance(c) <= p.explained_variance(c - 1));
    CHECK_THROWS_AS(pca_transform(p, Matrix::Zero(3, 5)), DataError);
    CHECK_THROWS_AS(pca_fit(m, 7), ConfigError);
    CHECK_THROWS_AS(pca_fit(m.topRows(1), 1), DataError);
}

TEST_CASE("k-means recovers separated blobs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed + 100);
        const auto b = three_blobs(rng, 40, 0.1);
        const auto r = kmeans(b.data, {3, seed, 5, 300, 1e-4});
        CHECK(oracle::adjusted_rand(r.assignments, b.truth) == 1.0);
    }
}

TEST_CASE("k-means invariants") {
    Rng rng(4);
    const Matrix m = random_matrix(rng, 120, 4);

    SECTION("inertia never increases within a restart") {
        const auto r = kmeans(m, {7, 9, 6, 300, 0.0});
        REQUIRE(r.restart_traces.size() == 6);
        for (const auto& trace : r.restart_traces) {
            for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-12));
        }
    }
    SECTION("every point sits at its nearest centroid") {
        const auto r = kmeans(m, {9, 1, 3, 300, 1e-4});
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const auto own = r.assignments[static_cast<std::size_t>(i)];
            const double d_own = (m.row(i) - r.centroids.row(own)).squaredNorm();
            for (Eigen::Index c = 0; c < r.k; ++c) CHECK(d_own <= (m.row(i) - r.centroids.row(c)).squaredNorm() + 1e-12);
            inertia += d_own;
        }
        CHECK_THAT(r.inertia, WithinRel(inertia, 1e-12));
    }
    SECTION("k equal to n gives zero inertia") {
        const Matrix small = m.topRows(6);
        const auto r = kmeans(small, {6, 3, 2, 100, 1e-4});
        CHECK_THAT(r.inertia, WithinAbs(0.0, 1e-20));
        CHECK(std::set<int>(r.assignments.begin(), r.assignments.end()).size() == 6);
    }
    SECTION("same seed, same result") {
        const auto a = kmeans(m, {5, 77, 4, 300, 1e-4});
        const auto b = kmeans(m, {5, 77, 4, 300, 1e-4});
        CHECK(a.assignments == b.assignments);
        CHECK(a.inertia == b.inertia);
    }
    SECTION("more restarts never hurt") {
        CHECK(kmeans(m, {8, 5, 10, 300, 1e-4}).inertia <= kmeans(m, {8, 5, 1, 300, 1e-4}).inertia);
    }
    SECTION("invalid input") {
        CHECK_THROWS_AS(kmeans(m, {121, 1, 1, 10, 1e-4}), ConfigError);
        CHECK_THROWS_AS(kmeans(m, {0, 1, 1, 10, 1e-4}), ConfigError);
        Matrix bad = m;
        bad(3, 1) = std::nan("");
        CHECK_THROWS_AS(kmeans(bad, {3, 1, 1, 10, 1e-4}), DataError);
    }
    SECTION("fewer distinct points than clusters") {
        Matrix dup(10, 2);
        dup.setZero();
        dup.bottomRows(2).setOnes();
        const auto r = kmeans(dup, {4, 2, 2, 50, 1e-4});
        CHECK(r.inertia == 0.0);
        for (int a : r.assignments) CHECK((a >= 0 && a < 4));
        CHECK(r.assignments.front() != r.assignments.back());
    }
}

TEST_CASE("mutual information") {
    const std::vector<int> a{0, 0, 1, 1};
    CHECK_THAT(mutual_information(a, a), WithinAbs(std::log(2.0), 1e-15));
    CHECK_THAT(mutual_information(a, a), WithinAbs(entropy(a), 1e-12));
    CHECK(mutual_information(a, std::vector<std::string>{"x", "x", "x", "x"}) == 0.0);

    Rng rng(5);
    std::vector<int> x, y;
    std::vector<std::string> tags;
    for (int i = 0; i < 500; ++i) {
        x.push_back(static_cast<int>(uniform_index(rng, 5)));
        y.push_back(static_cast<int>(uniform_index(rng, 3)));
        tags.push_back("t" + std::to_string(uniform_index(rng, 4)));
    }
    CHECK_THAT(mutual_information(x, y), WithinAbs(mutual_information(y, x), 1e-14));
    CHECK_THAT(mutual_information(x, x), WithinAbs(entropy(x), 1e-12));
    CHECK(mutual_information(x, tags) <= std::min(entropy(x), entropy(tags)) + 1e-12);
    // relabelling clusters changes nothing
    std::vector<int> shifted;
    for (int v : x) shifted.push_back(10 - v);
    CHECK_THAT(mutual_information(shifted, tags), WithinAbs(mutual_information(x, tags), 1e-14));
    CHECK_THROWS_AS(mutual_information(x, std::vector<int>{1}), DataError);
}

TEST_CASE("silhouette") {
    Matrix pts(6, 2);
    pts << 0, 0, 0, 1, 1, 0, 5, 5, 5, 6, 6, 5;
    const std::vector<int> labels{0, 0, 0, 1, 1, 1};
    const double want = oracle::silhouette(rows_of(pts), labels);
    CHECK_THAT(silhouette(pts, labels), WithinAbs(want, 1e-12));
    CHECK_THAT(silhouette(pts, labels, 3), WithinAbs(want, 1e-12));

    Rng rng(6);
    const Matrix m = random_matrix(rng, 40, 3);
    std::vector<int> l;
    for (int i = 0; i < 40; ++i) l.push_back(i == 7 ? 9 : static_cast<int>(uniform_index(rng, 3)));
    CHECK_THAT(silhouette(m, l), WithinAbs(oracle::silhouette(rows_of(m), l), 1e-12));
    CHECK_THROWS_AS(silhouette(m, std::vector<int>(40, 1)), DataError);
}

TEST_CASE("cluster report") {
    const std::vector<int> assign{2, 2, 2, 0, 0, 5};
    const std::vector<std::string> tags{"Drama", "Comedy", "Drama", "Crime", "Action", "Drama"};
    const auto r = cluster_report(assign, tags);
    REQUIRE(r.clusters.size() == 3);
    CHECK(r.clusters[0].cluster == 0);
    CHECK(r.clusters[0].dominant_tag == "Action");  // 1-1 tie goes to the smaller tag
    CHECK(r.clusters[0].dominant_pct == 50.0);
    CHECK(r.clusters[1].dominant_tag == "Drama");
    CHECK_THAT(r.clusters[1].dominant_pct, WithinAbs(200.0 / 3.0, 1e-12));
    CHECK(r.clusters[2].size == 1);
    CHECK(r.size.min == 1.0);
    CHECK(r.size.median == 2.0);
    CHECK(r.size.max == 3.0);
    CHECK_THAT(r.size.mean, WithinAbs(2.0, 1e-15));
}

TEST_CASE("clustering run and report") {
    Rng rng(7);
    const auto b = three_blobs(rng, 20, 0.2);
    Matrix features(60, 5);
    features.leftCols(2) = b.data;
    features.col(2).setConstant(1.0);
    for (Eigen::Index i = 0; i < 60; ++i) {
        features(i, 3) = normal01(rng) * 0.01;
        features(i, 4) = b.data(i, 0) - b.data(i, 1);
    }
    std::vector<std::string> tags;
    std::vector<FeatureVector> rows;
    for (int i = 0; i < 60; ++i) {
        tags.push_back("tag" + std::to_string(b.truth[static_cast<std::size_t>(i)]));
        rows.push_back({{"s" + std::to_string(i), 1}, tags.back(), {}});
    }
    ClusterOptions opt;
    opt.pcs = 3;
    opt.k = 3;
    const auto run = run_clustering(features, tags, opt);
    CHECK(run.reduced.pca.n_components() == 3);
    CHECK_THAT(run.mutual_information, WithinAbs(std::log(3.0), 1e-12));
    REQUIRE(run.silhouette);
    CHECK(*run.silhouette > 0.5);
    const auto j = report_json(run, rows, opt, {"report", "beef", 42});
    CHECK(j["config_hash"] == "beef");
    CHECK(j["mi_units"] == "nats");
    CHECK(j["assignments"].size() == 60);
    CHECK(j["clusters"].size() == 3);
    CHECK(report_json(run, rows, opt, {"report", "beef", 42}).dump() == j.dump());

    opt.pcs = 50;
    CHECK(run_clustering(features, tags, opt).reduced.pca.n_components() == 4);
}

TEST_CASE("grid search") {
    Rng rng(8);
    Matrix features(90, 12);
    std::vector<std::string> tags;
    for (Eigen::Index i = 0; i < 90; ++i) {
        const int g = static_cast<int>(i % 3);
        tags.push_back("g" + std::to_string(g));
        for (Eigen::Index j = 0; j < 12; ++j) features(i, j) = normal01(rng) + (j % 3 == g ? 3.0 : 0.0);
    }
    GridOptions opt;
    opt.n_init = 2;
    const auto a = grid_search(features, tags, opt);
    REQUIRE(a.cells.size() == 28);
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (const auto& c : a.cells) seen.insert({c.pcs, c.k});
    CHECK(seen.size() == 28);
    CHECK(a.cells[0].pcs == 50);
    CHECK(a.cells[0].k == 50);
    CHECK(a.cells[27].pcs == 300);
    CHECK(a.cells[27].k == 300);
    for (const auto& c : a.cells) {
        CHECK(c.effective_pcs == std::min<Eigen::Index>(c.pcs, 12));
        CHECK(c.feasible == (c.k <= 90));
    }
    REQUIRE(a.best);
    for (const auto& c : a.cells) {
        if (c.feasible) CHECK(c.mutual_information <= a.cells[*a.best].mutual_information);
    }

    auto csv = [&](const GridResult& g) {
        std::ostringstream out;
        write_grid_csv(out, g, {"grid", "h", 42});
        return out.str();
    };
    CHECK(csv(a) == csv(grid_search(features, tags, opt)));
    opt.jobs = 3;
    CHECK(csv(a) == csv(grid_search(features, tags, opt)));

    GridOptions small;
    small.pcs = {2, 5};
    small.ks = {2, 3};
    small.n_init = 3;
    const auto s = grid_search(features, tags, small);
    REQUIRE(s.best);
    std::vector<double> mis;
    for (const auto& c : s.cells) mis.push_back(c.mutual_information);
    CHECK(s.cells[*s.best].mutual_information > summarize(mis).median);
}
