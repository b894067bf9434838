#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include <json.hpp>

#include "arc.hpp"
#include "cluster.hpp"
#include "corpus.hpp"
#include "features.hpp"
#include "scores.hpp"
#include "svg.hpp"
#include "util.hpp"

#define PLOTDYN_VERSION "0.1.0"

namespace plotdyn {

namespace fs = std::filesystem;
using Log = std::function<void(const std::string&)>;

inline void log_to(const Log& log, const std::string& msg) {
    if (log) log(msg);
}

inline void log_diagnostics(const Log& log, const std::string& source, const std::vector<Diagnostic>& diags,
                            std::size_t limit = 5) {
    if (diags.empty()) return;
    log_to(log, source + ": " + std::to_string(diags.size()) + " diagnostic(s)");
    for (std::size_t i = 0; i < diags.size() && i < limit; ++i) {
        log_to(log, "  line " + std::to_string(diags[i].line) + ": " + diags[i].message);
    }
}

// --- stages ------------------------------------------------------------
// Each stage reads its inputs from files and writes one artifact, so the
// CLI subcommands and `run` share the same code path.

struct IngestResult {
    std::size_t shows = 0, seasons = 0, episodes = 0;
    std::vector<Diagnostic> diagnostics;
};

/// Normalises a dump into the canonical JSONL. Without an explicit config
/// hash the output is stamped with a hash of the input bytes.
inline IngestResult ingest_stage(const fs::path& input, const fs::path& output, ArtifactMeta meta,
                                 const Log& log = {}) {
    auto loaded = load_corpus(input);
    if (meta.config_hash.empty()) meta.config_hash = Fnv1a().update(read_file(input)).hex();
    meta.kind = "corpus";
    loaded.corpus.set_meta(meta);
    save_corpus(output, loaded.corpus);
    log_diagnostics(log, input.string(), loaded.diagnostics);
    IngestResult r;
    r.shows = loaded.corpus.shows().size();
    r.seasons = loaded.corpus.seasons().size();
    r.episodes = loaded.corpus.episode_count();
    r.diagnostics = std::move(loaded.diagnostics);
    log_to(log, "ingest: " + std::to_string(r.shows) + " shows, " + std::to_string(r.seasons) + " seasons, " +
                    std::to_string(r.episodes) + " episodes -> " + output.string());
    return r;
}

struct ScoreStageArgs {
    fs::path corpus;
    std::string labelset = "genres20";
    std::string classifier = "naive-bayes";  // naive-bayes | file
    fs::path scores_in;                      // classifier == file
    std::optional<fs::path> mapping;         // for score files over a source set (e.g. emoji64)
    double nb_alpha = 1.0;
    std::optional<std::uint64_t> seed;
    fs::path output;
};

struct ScoreStageResult {
    std::size_t seasons = 0;
    std::vector<Diagnostic> diagnostics;
};

inline ScoreStageResult score_stage(const ScoreStageArgs& args, const Log& log = {}) {
    const LabelSet& target = builtin_labelset(args.labelset);
    auto corpus_load = load_corpus(args.corpus);
    const Corpus& corpus = corpus_load.corpus;
    ScoreStageResult result;
    std::vector<ScoreMatrix> matrices;
    std::vector<ArtifactMeta> provenance{corpus.meta()};

    if (args.classifier == "naive-bayes") {
        const auto model = fit_naive_bayes(weak_label_training_set(corpus, target), target, args.nb_alpha);
        log_to(log, "score: naive Bayes over " + target.name() + ", vocabulary " +
                        std::to_string(model.vocabulary_size()));
        for (const auto& season : corpus.seasons()) matrices.push_back(score_season(season, model));
    } else if (args.classifier == "file") {
        if (args.scores_in.empty()) throw ConfigError("--scores-in is required with --classifier file");
        const std::string source_set = peek_score_labelset(args.scores_in);
        ScoreFile file;
        std::optional<LabelMapping> mapping;
        if (source_set == target.name()) {
            file = load_scores(args.scores_in, target);
        } else {
            mapping = args.mapping ? LabelMapping::load(*args.mapping) : default_emoji_mapping();
            if (mapping->source().name() != source_set || mapping->target() != target) {
                throw ConfigError("score file uses label set '" + source_set + "' and no mapping to " +
                                  target.name() + " is configured");
            }
            file = load_scores(args.scores_in, mapping->source());
        }
        log_diagnostics(log, args.scores_in.string(), file.diagnostics);
        result.diagnostics = file.diagnostics;
        provenance.push_back(file.meta);
        for (const auto& season : corpus.seasons()) {
            auto it = file.seasons.find(season.key());
            if (it == file.seasons.end()) {
                result.diagnostics.push_back({0, "no scores for season " + season.show_id + "/" +
                                                     std::to_string(season.season_number)});
                continue;
            }
            std::vector<int> numbers;
            for (const auto& ep : season.episodes) numbers.push_back(ep.episode_number);
            if (numbers != it->second.episodes) {
                result.diagnostics.push_back({0, "episode list of season " + season.show_id + "/" +
                                                     std::to_string(season.season_number) +
                                                     " differs from the corpus; season skipped"});
                continue;
            }
            matrices.push_back(mapping ? aggregate_scores(it->second, *mapping) : it->second);
        }
    } else {
        throw ConfigError("unknown classifier '" + args.classifier + "' (expected naive-bayes|file)");
    }

    ArtifactMeta meta;
    meta.config_hash = merge_config_hashes(provenance);
    meta.seed = args.seed;
    std::vector<const ScoreMatrix*> ptrs;
    for (const auto& m : matrices) ptrs.push_back(&m);
    auto out = open_output(args.output);
    write_scores(out, target, ptrs, meta);
    if (!out) throw IoError("write failed for '" + args.output.string() + "'");
    result.seasons = matrices.size();
    log_to(log, "score: " + std::to_string(result.seasons) + " seasons -> " + args.output.string());
    return result;
}

struct ArcStageResult {
    std::size_t seasons = 0;
    std::vector<Diagnostic> diagnostics;
};

/// Extracts arcs from one or more score files (one per label set). Seasons
/// missing from any file, or with differing episode lists, are skipped.
inline ArcStageResult arc_stage(const std::vector<fs::path>& score_files, const ArcParams& params,
                                const fs::path& output, std::optional<std::uint64_t> seed = {}, const Log& log = {}) {
    if (score_files.empty()) throw ConfigError("arc: at least one --scores file is required");
    std::vector<ScoreFile> files;
    std::vector<ArtifactMeta> provenance;
    std::vector<LabelSet> labelsets;
    for (const auto& path : score_files) {
        const LabelSet& ls = builtin_labelset(peek_score_labelset(path));
        for (const auto& seen : labelsets) {
            if (seen == ls) throw ConfigError("arc: two score files use label set " + ls.name());
        }
        files.push_back(load_scores(path, ls));
        log_diagnostics(log, path.string(), files.back().diagnostics);
        provenance.push_back(files.back().meta);
        labelsets.push_back(ls);
    }
    ArcStageResult result;
    ArtifactMeta meta;
    meta.config_hash = merge_config_hashes(provenance);
    meta.seed = seed;

    std::vector<CombinedTrajectory> arcs;
    for (const auto& [key, first] : files.front().seasons) {
        std::vector<Trajectory> blocks;
        bool ok = true;
        for (const auto& f : files) {
            auto it = f.seasons.find(key);
            if (it == f.seasons.end() || it->second.episodes != first.episodes) {
                ok = false;
                break;
            }
            blocks.push_back(extract_arc(it->second, params));
        }
        if (!ok) {
            result.diagnostics.push_back({0, "season " + key.show_id + "/" + std::to_string(key.season) +
                                                 " missing or inconsistent across score files; skipped"});
            continue;
        }
        arcs.push_back(combine(std::move(blocks)));
    }
    auto out = open_output(output);
    write_arcs(out, arcs, labelsets, params, meta);
    if (!out) throw IoError("write failed for '" + output.string() + "'");
    result.seasons = arcs.size();
    log_diagnostics(log, "arc", result.diagnostics);
    log_to(log, "arc: " + std::to_string(result.seasons) + " seasons -> " + output.string());
    return result;
}

struct FeatureStageResult {
    std::size_t rows = 0;
    std::size_t width = 0;
    std::size_t tagged = 0;
};

/// Builds the feature CSV; static tags come from the corpus when given.
inline FeatureStageResult features_stage(const fs::path& arcs_path, const std::optional<fs::path>& corpus_path,
                                         const FeatureConfig& config, const fs::path& output,
                                         std::optional<std::uint64_t> seed = {}, const Log& log = {}) {
    const auto arcs = load_arcs(arcs_path);
    log_diagnostics(log, arcs_path.string(), arcs.diagnostics);
    std::vector<ArtifactMeta> provenance{arcs.meta};
    std::map<SeasonKey, std::string> tags;
    if (corpus_path) {
        const auto corpus = load_corpus(*corpus_path);
        provenance.push_back(corpus.corpus.meta());
        for (const auto& t : filter_tagged_seasons(corpus.corpus)) tags[t.season->key()] = t.tag.label;
    }
    FeatureTable table;
    table.meta.config_hash = merge_config_hashes(provenance);
    table.meta.seed = seed;
    table.layout = feature_layout(arcs.labelsets, config);
    FeatureStageResult r;
    for (const auto& arc : arcs.arcs) {
        auto fv = build_features(arc, config);
        if (auto it = tags.find(arc.key); it != tags.end()) {
            fv.static_tag = it->second;
            ++r.tagged;
        }
        table.rows.push_back(std::move(fv));
    }
    auto out = open_output(output);
    write_feature_csv(out, table);
    if (!out) throw IoError("write failed for '" + output.string() + "'");
    r.rows = table.rows.size();
    r.width = table.layout.size();
    log_to(log, "features: " + std::to_string(r.rows) + " seasons (" + std::to_string(r.tagged) + " tagged) x " +
                    std::to_string(r.width) + " -> " + output.string());
    return r;
}

struct TaggedFeatures {
    std::vector<FeatureVector> rows;
    std::vector<std::string> tags;
    Matrix matrix;
};

/// Rows of the feature table that carry a static tag.
inline TaggedFeatures tagged_rows(const FeatureTable& table) {
    TaggedFeatures t;
    for (const auto& r : table.rows) {
        if (r.static_tag.empty()) continue;
        t.rows.push_back(r);
        t.tags.push_back(r.static_tag);
    }
    t.matrix = to_matrix(t.rows);
    return t;
}

struct ClusterStageArgs {
    fs::path features;
    ClusterOptions options;
    fs::path report;
    /// When set, the grid is searched first and the best cell is reported.
    std::optional<GridOptions> grid;
    std::optional<fs::path> grid_csv;
};

inline ClusterRun cluster_stage(const ClusterStageArgs& args, const Log& log = {}) {
    const auto table = load_feature_csv(args.features);
    const auto data = tagged_rows(table);
    if (data.rows.size() < 2) throw DataError("fewer than two tagged seasons in " + args.features.string());
    log_to(log, "cluster: " + std::to_string(data.rows.size()) + " tagged seasons of " +
                    std::to_string(table.rows.size()));
    ClusterOptions opt = args.options;
    std::string selected_by = "fixed";
    if (args.grid) {
        const auto grid = grid_search(data.matrix, data.tags, *args.grid);
        if (args.grid_csv) {
            auto out = open_output(*args.grid_csv);
            write_grid_csv(out, grid, {"grid", table.meta.config_hash, args.grid->seed});
        }
        if (!grid.best) throw DataError("no feasible grid cell (every k exceeds the number of seasons)");
        const auto& best = grid.cells[*grid.best];
        log_to(log, "grid: best pcs=" + std::to_string(best.pcs) + " (effective " +
                        std::to_string(best.effective_pcs) + ") k=" + std::to_string(best.k) +
                        " MI=" + format_double(best.mutual_information));
        opt.pcs = best.pcs;
        opt.k = best.k;
        opt.seed = best.seed;
        selected_by = "grid";
    }
    auto run = run_clustering(data.matrix, data.tags, opt);
    auto j = report_json(run, data.rows, opt, {"report", table.meta.config_hash, opt.seed});
    j["selected_by"] = selected_by;
    auto out = open_output(args.report);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + args.report.string() + "'");
    log_to(log, "cluster: MI=" + format_double(run.mutual_information) + " nats, silhouette=" +
                    (run.silhouette ? format_double(*run.silhouette) : std::string("n/a")) + " -> " +
                    args.report.string());
    return run;
}

/// Grid search only; writes the grid table.
inline GridResult gridsearch_stage(const fs::path& features, const GridOptions& opt, const fs::path& grid_csv,
                                   const Log& log = {}) {
    const auto table = load_feature_csv(features);
    const auto data = tagged_rows(table);
    if (data.rows.size() < 2) throw DataError("fewer than two tagged seasons in " + features.string());
    auto grid = grid_search(data.matrix, data.tags, opt);
    auto out = open_output(grid_csv);
    write_grid_csv(out, grid, {"grid", table.meta.config_hash, opt.seed});
    if (!out) throw IoError("write failed for '" + grid_csv.string() + "'");
    if (grid.best) {
        const auto& b = grid.cells[*grid.best];
        log_to(log, "grid: best pcs=" + std::to_string(b.pcs) + " k=" + std::to_string(b.k) +
                        " MI=" + format_double(b.mutual_information) + " nats");
    }
    return grid;
}

// --- plots -------------------------------------------------------------

/// Line chart of one season's arc. Labels whose probability never reaches
/// `min_prob` are left out; emotion labels are upper-cased and dashed.
inline std::string plot_arc_svg(const CombinedTrajectory& arc, std::string_view title, double min_prob = 0.05) {
    std::vector<svg::Series> series;
    for (std::size_t b = 0; b < arc.blocks.size(); ++b) {
        const auto& block = arc.blocks[b];
        const bool emotions = block.labelset.name() == "emoji11";
        for (std::size_t u = 0; u < block.labelset.size(); ++u) {
            auto s = block.series(u);
            if (*std::max_element(s.begin(), s.end()) < min_prob) continue;
            std::string name = block.labelset[u];
            if (emotions) {
                for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
            series.push_back({name, std::move(s), emotions});
        }
    }
    return svg::line_chart(std::string(title), series, "episode");
}

inline std::string plot_clusters_svg(const FeatureTable& table, const nlohmann::json& report, bool standardize) {
    const auto data = tagged_rows(table);
    if (data.rows.size() < 2) throw DataError("fewer than two tagged seasons to plot");
    std::map<SeasonKey, int> cluster_of;
    for (const auto& a : report.at("assignments")) {
        cluster_of[{a.at("show_id").get<std::string>(), a.at("season").get<int>()}] = a.at("cluster").get<int>();
    }
    const auto reduced = reduce(data.matrix, 2, standardize);
    std::vector<svg::ScatterPoint> pts;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        auto it = cluster_of.find(data.rows[i].key);
        pts.push_back({reduced.projected(r, 0), reduced.projected.cols() > 1 ? reduced.projected(r, 1) : 0.0,
                       it == cluster_of.end() ? 0 : it->second});
    }
    return svg::scatter("Seasons by cluster (2-D PCA)", pts, "PC1", "PC2");
}

// --- run ---------------------------------------------------------------

/// Key/value experiment configuration (`key = value` lines, `#` comments).
struct PipelineConfig {
    fs::path corpus;
    fs::path output_dir;
    std::string genre_classifier = "naive-bayes";  // naive-bayes | file | none
    fs::path genre_scores;
    std::string emoji_classifier = "naive-bayes";
    fs::path emoji_scores;
    std::optional<fs::path> emoji_mapping;
    double nb_alpha = 1.0;
    double alpha = ArcParams::kDefaultAlpha;
    double epsilon = ArcParams::kDefaultEpsilon;
    std::string features = "stats,auc";
    std::size_t T = kDefaultTimeline;
    std::string mode = "fixed";  // fixed | grid
    Eigen::Index pcs = 200;
    Eigen::Index k = 200;
    std::vector<Eigen::Index> grid_pcs = default_grid_pcs();
    std::vector<Eigen::Index> grid_ks = default_grid_ks();
    std::uint64_t seed = 42;
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-4;
    bool standardize = true;

    void set(const std::string& key, const std::string& raw) {
        std::string value(trim(raw));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        auto as_double = [&] {
            try {
                return parse_double(value);
            } catch (const DataError&) {
                throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
            }
        };
        auto as_int = [&]() -> long long {
            try {
                std::size_t pos = 0;
                const long long v = std::stoll(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(value);
                return v;
            } catch (const std::exception&) {
                throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
            }
        };
        auto as_list = [&] {
            std::vector<Eigen::Index> out;
            for (const auto& part : split(value, ',')) {
                try {
                    out.push_back(std::stol(std::string(trim(part))));
                } catch (const std::exception&) {
                    throw ConfigError("config key '" + key + "' expects a comma separated integer list");
                }
            }
            return out;
        };
        auto as_bool = [&] {
            if (value == "true") return true;
            if (value == "false") return false;
            throw ConfigError("config key '" + key + "' expects true or false");
        };
        if (key == "corpus") corpus = value;
        else if (key == "output_dir") output_dir = value;
        else if (key == "genre_classifier") genre_classifier = value;
        else if (key == "genre_scores") genre_scores = value;
        else if (key == "emoji_classifier") emoji_classifier = value;
        else if (key == "emoji_scores") emoji_scores = value;
        else if (key == "emoji_mapping") emoji_mapping = value.empty() ? std::nullopt : std::optional<fs::path>(value);
        else if (key == "nb_alpha") nb_alpha = as_double();
        else if (key == "alpha") alpha = as_double();
        else if (key == "epsilon") epsilon = as_double();
        else if (key == "features") features = value;
        else if (key == "T") T = static_cast<std::size_t>(as_int());
        else if (key == "mode") mode = value;
        else if (key == "pcs") pcs = as_int();
        else if (key == "k") k = as_int();
        else if (key == "grid_pcs") grid_pcs = as_list();
        else if (key == "grid_ks") grid_ks = as_list();
        else if (key == "seed") seed = static_cast<std::uint64_t>(as_int());
        else if (key == "n_init") n_init = static_cast<int>(as_int());
        else if (key == "max_iter") max_iter = static_cast<int>(as_int());
        else if (key == "tol") tol = as_double();
        else if (key == "standardize") standardize = as_bool();
        else throw ConfigError("unknown config key '" + key + "'");
    }

    /// Applies "key=value".
    void apply_override(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos) throw ConfigError("override must look like key=value");
        set(std::string(trim(assignment.substr(0, eq))), std::string(assignment.substr(eq + 1)));
    }

    static PipelineConfig parse(std::istream& in) {
        PipelineConfig c;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto body = trim(line);
            if (body.empty() || body.front() == '#') continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
            }
            c.set(std::string(trim(body.substr(0, eq))), std::string(body.substr(eq + 1)));
        }
        return c;
    }

    static PipelineConfig load(const fs::path& path) {
        try {
            auto in = open_input(path);
            return parse(in);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
    }

    ArcParams arc_params() const { return ArcParams(alpha, epsilon); }
    FeatureConfig feature_config() const { return FeatureConfig::parse(features, T); }

    /// Canonical form: every key in a fixed order, output_dir excluded.
    nlohmann::ordered_json to_json() const {
        auto list = [](const std::vector<Eigen::Index>& v) {
            std::string s;
            for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
            return s;
        };
        nlohmann::ordered_json j;
        j["corpus"] = corpus.string();
        j["genre_classifier"] = genre_classifier;
        j["genre_scores"] = genre_scores.string();
        j["emoji_classifier"] = emoji_classifier;
        j["emoji_scores"] = emoji_scores.string();
        j["emoji_mapping"] = emoji_mapping ? emoji_mapping->string() : "";
        j["nb_alpha"] = nb_alpha;
        j["alpha"] = alpha;
        j["epsilon"] = epsilon;
        j["features"] = features;
        j["T"] = T;
        j["mode"] = mode;
        j["pcs"] = pcs;
        j["k"] = k;
        j["grid_pcs"] = list(grid_pcs);
        j["grid_ks"] = list(grid_ks);
        j["seed"] = seed;
        j["n_init"] = n_init;
        j["max_iter"] = max_iter;
        j["tol"] = tol;
        j["standardize"] = standardize;
        return j;
    }

    std::vector<fs::path> input_files() const {
        std::vector<fs::path> files{corpus};
        if (genre_classifier == "file") files.push_back(genre_scores);
        if (emoji_classifier == "file") files.push_back(emoji_scores);
        if (emoji_mapping) files.push_back(*emoji_mapping);
        return files;
    }

    /// Validates values and that every referenced input exists.
    void validate() const {
        if (corpus.empty()) throw ConfigError("config: corpus is required");
        if (output_dir.empty()) throw ConfigError("config: output_dir is required");
        for (const auto* c : {&genre_classifier, &emoji_classifier}) {
            if (*c != "naive-bayes" && *c != "file" && *c != "none") {
                throw ConfigError("config: classifier must be naive-bayes, file or none");
            }
        }
        if (genre_classifier == "none" && emoji_classifier == "none") {
            throw ConfigError("config: at least one label set must be scored");
        }
        if (mode != "fixed" && mode != "grid") throw ConfigError("config: mode must be fixed or grid");
        if (pcs < 1 || k < 1 || n_init < 1 || max_iter < 1) throw ConfigError("config: pcs, k, n_init, max_iter must be positive");
        (void)arc_params();
        (void)feature_config();
        if (!(nb_alpha > 0.0)) throw ConfigError("config: nb_alpha must be positive");
        for (const auto& f : input_files()) {
            std::error_code ec;
            if (f.empty() || !fs::is_regular_file(f, ec)) {
                throw ConfigError("config: input file '" + f.string() + "' does not exist");
            }
        }
    }

    /// Hash of the canonical config and the bytes of every input file.
    std::string hash() const {
        Fnv1a h;
        h.update(to_json().dump());
        for (const auto& f : input_files()) {
            h.update("\n");
            h.update(Fnv1a().update(read_file(f)).hex());
        }
        return h.hex();
    }
};

/// Exclusive lock on an output directory for the lifetime of the object.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) : path_(dir / ".plotdyn.lock") {
        fs::create_directories(dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) throw ConfigError("output directory '" + dir.string() + "' is locked (" + path_.string() + ")");
        const auto pid = std::to_string(::getpid()) + "\n";
        (void)!::write(fd_, pid.data(), pid.size());
    }
    ~DirectoryLock() {
        ::close(fd_);
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

/// Config hash recorded in an artifact, empty if absent or unreadable.
inline std::string artifact_config_hash(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return {};
    std::ifstream in(path);
    try {
        if (path.extension() == ".json") {
            auto j = nlohmann::json::parse(in);
            return ArtifactMeta::read_from(j).config_hash;
        }
        std::string line;
        std::getline(in, line);
        if (line.rfind("# ", 0) == 0) line = line.substr(2);
        return ArtifactMeta::read_from(nlohmann::json::parse(line)).config_hash;
    } catch (const std::exception&) {
        return {};
    }
}

struct StageRecord {
    std::string name;
    std::string status;  // ran | skipped | failed
    double seconds = 0.0;
    std::vector<std::string> outputs;
    std::string error;
};

struct RunOutcome {
    int exit_code = 0;
    std::string config_hash;
    std::vector<StageRecord> stages;
    std::optional<std::string> failed_stage;
};

struct RunOptions {
    bool resume = false;
    unsigned jobs = 1;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const DataError*>(&e)) return 3;
    return 4;
}

/// Runs ingest -> score -> arc -> features -> cluster into config.output_dir
/// and keeps manifest.json current after every stage. With resume, a stage
/// whose outputs exist and carry the current config hash is skipped unless
/// an earlier stage ran.
inline RunOutcome run_pipeline(const PipelineConfig& config, const RunOptions& options, const Log& log = {}) {
    RunOutcome outcome;
    try {
        config.validate();
        outcome.config_hash = config.hash();
    } catch (const std::exception& e) {
        log_to(log, std::string("error: ") + e.what());
        outcome.exit_code = exit_code_for(e);
        if (outcome.exit_code == 4) outcome.exit_code = 2;
        return outcome;
    }
    std::optional<DirectoryLock> lock;
    try {
        lock.emplace(config.output_dir);
    } catch (const std::exception& e) {
        log_to(log, std::string("error: ") + e.what());
        outcome.exit_code = 2;
        return outcome;
    }

    const fs::path dir = config.output_dir;
    const ArtifactMeta meta{"", outcome.config_hash, config.seed};
    const fs::path corpus = dir / "corpus.jsonl";
    const fs::path genre_scores = dir / "scores.genres20.jsonl";
    const fs::path emoji_scores = dir / "scores.emoji11.jsonl";
    const fs::path arcs = dir / "arcs.jsonl";
    const fs::path features = dir / "features.csv";
    const fs::path report = dir / "report.json";
    const fs::path grid = dir / "grid.csv";
    const auto started = std::chrono::system_clock::now();

    auto write_manifest = [&] {
        nlohmann::ordered_json m;
        m["tool"] = "plotdyn";
        m["version"] = PLOTDYN_VERSION;
        m["compiler"] = __VERSION__;
        m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                     std::to_string(EIGEN_MINOR_VERSION);
        m["config_hash"] = outcome.config_hash;
        m["seed"] = config.seed;
        m["jobs"] = options.jobs;
        m["resume"] = options.resume;
        m["started_unix"] = std::chrono::duration_cast<std::chrono::seconds>(started.time_since_epoch()).count();
        m["config"] = config.to_json();
        m["status"] = outcome.failed_stage ? "failed" : "ok";
        m["failed_stage"] = outcome.failed_stage ? nlohmann::ordered_json(*outcome.failed_stage) : nlohmann::ordered_json();
        auto& st = m["stages"] = nlohmann::ordered_json::array();
        for (const auto& s : outcome.stages) {
            nlohmann::ordered_json e;
            e["name"] = s.name;
            e["status"] = s.status;
            e["seconds"] = s.seconds;
            e["outputs"] = s.outputs;
            if (!s.error.empty()) e["error"] = s.error;
            st.push_back(e);
        }
        auto out = open_output(dir / "manifest.json");
        out << m.dump(2) << '\n';
    };

    bool upstream_ran = false;
    auto stage = [&](const std::string& name, const std::vector<fs::path>& outputs, const std::function<void()>& body) {
        if (outcome.failed_stage) return;
        StageRecord rec;
        rec.name = name;
        for (const auto& o : outputs) rec.outputs.push_back(o.filename().string());
        const bool fresh = std::all_of(outputs.begin(), outputs.end(), [&](const fs::path& p) {
            return artifact_config_hash(p) == outcome.config_hash;
        });
        if (options.resume && !upstream_ran && fresh) {
            rec.status = "skipped";
            log_to(log, "[" + name + "] up to date, skipped");
            outcome.stages.push_back(rec);
            write_manifest();
            return;
        }
        const auto t0 = std::chrono::steady_clock::now();
        try {
            log_to(log, "[" + name + "]");
            body();
            rec.status = "ran";
            upstream_ran = true;
        } catch (const std::exception& e) {
            rec.status = "failed";
            rec.error = e.what();
            outcome.failed_stage = name;
            outcome.exit_code = exit_code_for(e);
            log_to(log, "[" + name + "] failed: " + std::string(e.what()));
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        outcome.stages.push_back(rec);
        write_manifest();
    };

    std::vector<fs::path> score_outputs;
    if (config.genre_classifier != "none") score_outputs.push_back(genre_scores);
    if (config.emoji_classifier != "none") score_outputs.push_back(emoji_scores);

    stage("ingest", {corpus}, [&] { ingest_stage(config.corpus, corpus, meta, log); });
    stage("score", score_outputs, [&] {
        auto run_one = [&](const std::string& classifier, const std::string& set, const fs::path& in,
                           const fs::path& out) {
            if (classifier == "none") return;
            ScoreStageArgs a;
            a.corpus = corpus;
            a.labelset = set;
            a.classifier = classifier;
            a.scores_in = in;
            if (set == "emoji11") a.mapping = config.emoji_mapping;
            a.nb_alpha = config.nb_alpha;
            a.seed = config.seed;
            a.output = out;
            score_stage(a, log);
        };
        run_one(config.genre_classifier, "genres20", config.genre_scores, genre_scores);
        run_one(config.emoji_classifier, "emoji11", config.emoji_scores, emoji_scores);
    });
    stage("arc", {arcs}, [&] { arc_stage(score_outputs, config.arc_params(), arcs, config.seed, log); });
    stage("features", {features}, [&] {
        features_stage(arcs, corpus, config.feature_config(), features, config.seed, log);
    });
    std::vector<fs::path> cluster_outputs{report};
    if (config.mode == "grid") cluster_outputs.push_back(grid);
    stage("cluster", cluster_outputs, [&] {
        ClusterStageArgs a;
        a.features = features;
        a.options = {config.pcs, config.k, config.seed, config.n_init, config.max_iter, config.tol,
                     config.standardize, true, options.jobs};
        a.report = report;
        if (config.mode == "grid") {
            GridOptions g;
            g.pcs = config.grid_pcs;
            g.ks = config.grid_ks;
            g.seed = config.seed;
            g.n_init = config.n_init;
            g.max_iter = config.max_iter;
            g.tol = config.tol;
            g.standardize = config.standardize;
            g.jobs = options.jobs;
            a.grid = g;
            a.grid_csv = grid;
        }
        cluster_stage(a, log);
    });
    if (outcome.stages.empty()) write_manifest();
    return outcome;
}

}  // namespace plotdyn
