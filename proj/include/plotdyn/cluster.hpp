#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "artifact.hpp"
#include "features.hpp"
#include "kmeans.hpp"
#include "metrics.hpp"
#include "pca.hpp"

namespace plotdyn {

inline Matrix to_matrix(const std::vector<FeatureVector>& rows) {
    if (rows.empty()) return {};
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().values.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].values.size() != static_cast<std::size_t>(m.cols())) throw DataError("ragged feature matrix");
        for (std::size_t j = 0; j < rows[i].values.size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
        }
    }
    return m;
}

struct ClusterOptions {
    Eigen::Index pcs = 200;
    Eigen::Index k = 200;
    std::uint64_t seed = 42;
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-4;
    bool standardize = true;
    bool compute_silhouette = true;
    unsigned jobs = 1;
};

/// Standardised (or raw) features reduced by PCA, ready for clustering.
struct Reduced {
    Standardizer standardizer;
    PcaModel pca;
    Matrix projected;  // n x components
};

/// Components are capped at min(rows, usable columns).
inline Reduced reduce(const Matrix& features, Eigen::Index pcs, bool standardize) {
    Reduced r;
    Matrix input;
    if (standardize) {
        r.standardizer = Standardizer::fit(features);
        input = r.standardizer.transform(features);
    } else {
        input = features;
    }
    if (input.cols() == 0) throw DataError("no feature column has non-zero variance");
    const Eigen::Index effective = std::min({pcs, input.rows(), input.cols()});
    r.pca = pca_fit(input, effective);
    r.projected = pca_transform(r.pca, input);
    return r;
}

struct ClusterRun {
    Eigen::Index pcs_requested = 0;
    Reduced reduced;
    KmeansResult kmeans;
    double mutual_information = 0.0;
    std::optional<double> silhouette;
    ClusterSummary summary;
};

/// Standardise -> PCA -> k-means, then score clusters against the tags.
inline ClusterRun run_clustering(const Matrix& features, const std::vector<std::string>& tags,
                                 const ClusterOptions& opt) {
    if (static_cast<std::size_t>(features.rows()) != tags.size()) {
        throw DataError("feature rows and tags differ in count");
    }
    if (features.rows() < 2) throw DataError("need at least two seasons to cluster");
    ClusterRun run;
    run.pcs_requested = opt.pcs;
    run.reduced = reduce(features, opt.pcs, opt.standardize);
    run.kmeans = kmeans(run.reduced.projected, {opt.k, opt.seed, opt.n_init, opt.max_iter, opt.tol});
    run.mutual_information = mutual_information(run.kmeans.assignments, tags);
    if (opt.compute_silhouette) {
        std::vector<int> distinct = run.kmeans.assignments;
        std::sort(distinct.begin(), distinct.end());
        if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() >= 2) {
            run.silhouette = silhouette(run.reduced.projected, run.kmeans.assignments, opt.jobs);
        }
    }
    run.summary = cluster_report(run.kmeans.assignments, tags);
    return run;
}

inline nlohmann::ordered_json summary_json(const SummaryStats& s) {
    return {{"min", s.min}, {"median", s.median}, {"mean", s.mean}, {"max", s.max}};
}

/// Report JSON. Contains no timing or host information so identical inputs
/// give identical bytes.
inline nlohmann::ordered_json report_json(const ClusterRun& run, const std::vector<FeatureVector>& rows,
                                          const ClusterOptions& opt, const ArtifactMeta& meta) {
    nlohmann::ordered_json j;
    auto m = meta;
    m.kind = "report";
    m.seed = opt.seed;
    m.write_to(j);
    j["mi_units"] = "nats";
    j["n_samples"] = rows.size();
    j["standardized"] = opt.standardize;
    j["pcs_requested"] = run.pcs_requested;
    j["pcs"] = run.reduced.pca.n_components();
    j["k"] = run.kmeans.k;
    j["n_init"] = opt.n_init;
    j["mutual_information"] = run.mutual_information;
    j["silhouette"] = run.silhouette ? nlohmann::ordered_json(*run.silhouette) : nlohmann::ordered_json();
    j["inertia"] = run.kmeans.inertia;
    j["explained_variance_ratio"] = run.reduced.pca.explained_variance_ratio.sum();
    auto& clusters = j["clusters"] = nlohmann::ordered_json::array();
    for (const auto& c : run.summary.clusters) {
        clusters.push_back({{"cluster", c.cluster},
                            {"size", c.size},
                            {"dominant_tag", c.dominant_tag},
                            {"dominant_pct", c.dominant_pct}});
    }
    j["summary"] = {{"size", summary_json(run.summary.size)},
                    {"dominant_pct", summary_json(run.summary.dominant_pct)}};
    auto& assign = j["assignments"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        assign.push_back({{"show_id", rows[i].key.show_id},
                          {"season", rows[i].key.season},
                          {"static_tag", rows[i].static_tag},
                          {"cluster", run.kmeans.assignments[i]}});
    }
    return j;
}

// --- grid search -------------------------------------------------------

inline const std::vector<Eigen::Index>& default_grid_pcs() {
    static const std::vector<Eigen::Index> v{50, 100, 200, 300};
    return v;
}

inline const std::vector<Eigen::Index>& default_grid_ks() {
    static const std::vector<Eigen::Index> v{50, 75, 100, 150, 200, 250, 300};
    return v;
}

struct GridOptions {
    std::vector<Eigen::Index> pcs = default_grid_pcs();
    std::vector<Eigen::Index> ks = default_grid_ks();
    std::uint64_t seed = 42;
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-4;
    bool standardize = true;
    unsigned jobs = 1;
};

struct GridCell {
    std::size_t index = 0;
    Eigen::Index pcs = 0;
    Eigen::Index effective_pcs = 0;
    Eigen::Index k = 0;
    std::uint64_t seed = 0;
    bool feasible = true;  // false when k exceeds the number of seasons
    double mutual_information = 0.0;
    double inertia = 0.0;
};

struct GridResult {
    std::vector<GridCell> cells;  // pcs-major order
    std::optional<std::size_t> best;
};

/// Evaluates every (pcs, k) cell. Cell i clusters with seed ^ i, so results
/// do not depend on the number of worker threads. Best = highest MI, earliest
/// cell on ties.
inline GridResult grid_search(const Matrix& features, const std::vector<std::string>& tags, const GridOptions& opt) {
    if (static_cast<std::size_t>(features.rows()) != tags.size()) {
        throw DataError("feature rows and tags differ in count");
    }
    if (opt.pcs.empty() || opt.ks.empty()) throw ConfigError("grid needs at least one pcs and one k value");
    const Eigen::Index max_pcs = *std::max_element(opt.pcs.begin(), opt.pcs.end());
    const Reduced reduced = reduce(features, max_pcs, opt.standardize);
    const Eigen::Index available = reduced.pca.n_components();

    GridResult result;
    for (auto p : opt.pcs) {
        for (auto k : opt.ks) {
            GridCell c;
            c.index = result.cells.size();
            c.pcs = p;
            c.effective_pcs = std::min(p, available);
            c.k = k;
            c.seed = opt.seed ^ static_cast<std::uint64_t>(c.index);
            c.feasible = k <= features.rows();
            result.cells.push_back(c);
        }
    }

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) {
            auto& c = result.cells[i];
            if (!c.feasible) continue;
            const Matrix data = reduced.projected.leftCols(c.effective_pcs);
            const auto km = kmeans(data, {c.k, c.seed, opt.n_init, opt.max_iter, opt.tol});
            c.mutual_information = mutual_information(km.assignments, tags);
            c.inertia = km.inertia;
        }
    };
    const unsigned jobs = std::max(1u, opt.jobs);
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& c : result.cells) {
        if (!c.feasible) continue;
        if (!result.best || c.mutual_information > result.cells[*result.best].mutual_information) {
            result.best = c.index;
        }
    }
    return result;
}

inline void write_grid_csv(std::ostream& out, const GridResult& grid, const ArtifactMeta& meta) {
    nlohmann::ordered_json h;
    auto m = meta;
    m.kind = "grid";
    m.write_to(h);
    out << "# " << h.dump() << '\n';
    out << "cell,pcs,effective_pcs,k,seed,status,mutual_information,inertia\n";
    for (const auto& c : grid.cells) {
        out << c.index << ',' << c.pcs << ',' << c.effective_pcs << ',' << c.k << ',' << c.seed << ',';
        if (c.feasible) {
            out << "ok," << format_double(c.mutual_information) << ',' << format_double(c.inertia) << '\n';
        } else {
            out << "infeasible,,\n";
        }
    }
}

}  // namespace plotdyn
