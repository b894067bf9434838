#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plotdyn/plotdyn.hpp"
#include "plotdyn/tvmaze.hpp"

namespace fs = std::filesystem;
using namespace plotdyn;

namespace {

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plotdyn: narrative arcs of TV seasons from episode descriptions"};
    app.set_version_flag("--version", PLOTDYN_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 42;
    bool resume = false;
    unsigned jobs = 1;
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_flag("--resume", resume, "skip stages whose artifacts are current");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "normalise a JSONL dump into the canonical corpus");
    fs::path ingest_in, ingest_out;
    ingest->add_option("--input", ingest_in)->required();
    ingest->add_option("--output", ingest_out)->required();

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download episode descriptions from the TVmaze API");
    std::string fetch_ids = "1..100", fetch_base = "https://api.tvmaze.com";
    fs::path fetch_out;
    int fetch_interval_ms = 500;
    fetch->add_option("--ids", fetch_ids, "show id range a..b")->capture_default_str();
    fetch->add_option("--output", fetch_out)->required();
    fetch->add_option("--base-url", fetch_base)->capture_default_str();
    fetch->add_option("--interval-ms", fetch_interval_ms, "minimum delay between requests")->capture_default_str();

    // score
    auto* score = app.add_subcommand("score", "per-episode label distributions");
    ScoreStageArgs score_args;
    std::string mapping_path;
    score->add_option("--corpus", score_args.corpus)->required();
    score->add_option("--labelset", score_args.labelset)->check(CLI::IsMember({"genres20", "emoji11"}))->capture_default_str();
    score->add_option("--classifier", score_args.classifier)
        ->check(CLI::IsMember({"naive-bayes", "file"}))
        ->capture_default_str();
    score->add_option("--scores-in", score_args.scores_in, "precomputed score JSONL (classifier file)");
    score->add_option("--emoji-mapping", mapping_path, "64 -> 11 mapping JSON for emoji64 score files");
    score->add_option("--nb-alpha", score_args.nb_alpha, "naive Bayes smoothing")->capture_default_str();
    score->add_option("--output", score_args.output)->required();

    // arc
    auto* arc = app.add_subcommand("arc", "Bayesian arc extraction");
    std::vector<fs::path> arc_scores;
    fs::path arc_out;
    double arc_alpha = ArcParams::kDefaultAlpha, arc_eps = ArcParams::kDefaultEpsilon;
    arc->add_option("--scores", arc_scores, "score file, repeat per label set")->required();
    arc->add_option("--alpha", arc_alpha)->capture_default_str();
    arc->add_option("--epsilon", arc_eps)->capture_default_str();
    arc->add_option("--output", arc_out)->required();

    // features
    auto* feat = app.add_subcommand("features", "per-season feature vectors");
    fs::path feat_arcs, feat_out, feat_corpus;
    std::string feat_config = "stats,auc";
    std::size_t feat_T = kDefaultTimeline;
    feat->add_option("--arcs", feat_arcs)->required();
    feat->add_option("--config", feat_config, "comma list of stats, auc, crossings")->capture_default_str();
    feat->add_option("--T", feat_T, "resampled timeline length")->capture_default_str();
    feat->add_option("--corpus", feat_corpus, "corpus for static tags");
    feat->add_option("--output", feat_out)->required();

    // cluster
    auto* cluster = app.add_subcommand("cluster", "standardise, PCA, k-means and report");
    fs::path cl_features, cl_report;
    ClusterOptions cl_opt;
    bool cl_raw = false;
    cluster->add_option("--features", cl_features)->required();
    cluster->add_option("--pcs", cl_opt.pcs)->capture_default_str();
    cluster->add_option("--k", cl_opt.k)->capture_default_str();
    cluster->add_option("--n-init", cl_opt.n_init)->capture_default_str();
    cluster->add_flag("--no-standardize", cl_raw);
    cluster->add_option("--report", cl_report)->required();

    // gridsearch
    auto* grid = app.add_subcommand("gridsearch", "MI over the (pcs, k) grid");
    fs::path gr_features, gr_report;
    GridOptions gr_opt;
    bool gr_raw = false;
    grid->add_option("--features", gr_features)->required();
    grid->add_option("--pcs", gr_opt.pcs, "pcs values")->delimiter(',');
    grid->add_option("--k", gr_opt.ks, "k values")->delimiter(',');
    grid->add_option("--n-init", gr_opt.n_init)->capture_default_str();
    grid->add_flag("--no-standardize", gr_raw);
    grid->add_option("--report", gr_report)->required();

    // plot
    auto* plot = app.add_subcommand("plot", "SVG line chart of one season's arc");
    fs::path pl_arcs, pl_out;
    std::string pl_show;
    int pl_season = 1;
    double pl_min = 0.05;
    plot->add_option("--arcs", pl_arcs)->required();
    plot->add_option("--show", pl_show)->required();
    plot->add_option("--season", pl_season)->required();
    plot->add_option("--min-prob", pl_min, "hide labels that never reach this value")->capture_default_str();
    plot->add_option("--output", pl_out)->required();

    auto* plot_cl = app.add_subcommand("plot-clusters", "SVG scatter of seasons coloured by cluster");
    fs::path pc_features, pc_report, pc_out;
    bool pc_raw = false;
    plot_cl->add_option("--features", pc_features)->required();
    plot_cl->add_option("--report", pc_report)->required();
    plot_cl->add_flag("--no-standardize", pc_raw);
    plot_cl->add_option("--output", pc_out)->required();

    // run
    auto* run = app.add_subcommand("run", "full pipeline from a config file");
    fs::path run_config;
    std::vector<std::string> run_sets;
    run->add_option("--config", run_config)->required();
    run->add_option("--set", run_sets, "override key=value");

    auto* mapping = app.add_subcommand("emoji-mapping", "write the default 64 -> 11 emoji mapping");
    fs::path mapping_out;
    mapping->add_option("--output", mapping_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            ingest_stage(ingest_in, ingest_out, {}, log_line);
        } else if (*fetch) {
            FetchOptions opt;
            opt.base_url = fetch_base;
            opt.ids = IdRange::parse(fetch_ids);
            opt.min_interval = std::chrono::milliseconds(fetch_interval_ms);
            const auto r = fetch_tvmaze(opt, fetch_out, log_line);
            log_diagnostics(log_line, "fetch", r.diagnostics);
            log_line("fetch: " + std::to_string(r.shows_written) + " shows, " + std::to_string(r.episodes_written) +
                     " episodes, " + std::to_string(r.shows_skipped) + " skipped");
        } else if (*score) {
            if (!mapping_path.empty()) score_args.mapping = mapping_path;
            score_args.seed = seed;
            score_stage(score_args, log_line);
        } else if (*arc) {
            arc_stage(arc_scores, ArcParams(arc_alpha, arc_eps), arc_out, seed, log_line);
        } else if (*feat) {
            std::optional<fs::path> corpus;
            if (!feat_corpus.empty()) corpus = feat_corpus;
            features_stage(feat_arcs, corpus, FeatureConfig::parse(feat_config, feat_T), feat_out, seed, log_line);
        } else if (*cluster) {
            cl_opt.seed = seed;
            cl_opt.standardize = !cl_raw;
            cl_opt.jobs = jobs;
            cluster_stage({cl_features, cl_opt, cl_report, std::nullopt, std::nullopt}, log_line);
        } else if (*grid) {
            gr_opt.seed = seed;
            gr_opt.standardize = !gr_raw;
            gr_opt.jobs = jobs;
            gridsearch_stage(gr_features, gr_opt, gr_report, log_line);
        } else if (*plot) {
            const auto arcs = load_arcs(pl_arcs);
            const SeasonKey key{pl_show, pl_season};
            const CombinedTrajectory* found = nullptr;
            for (const auto& a : arcs.arcs) {
                if (a.key == key) found = &a;
            }
            if (!found) throw DataError("season " + pl_show + "/" + std::to_string(pl_season) + " not in " + pl_arcs.string());
            write_text(pl_out, plot_arc_svg(*found, "show " + pl_show + ", season " + std::to_string(pl_season), pl_min));
        } else if (*plot_cl) {
            const auto table = load_feature_csv(pc_features);
            auto in = open_input(pc_report);
            nlohmann::json report;
            try {
                report = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw DataError(pc_report.string() + ": " + e.what());
            }
            write_text(pc_out, plot_clusters_svg(table, report, !pc_raw));
        } else if (*run) {
            auto config = PipelineConfig::load(run_config);
            if (app.get_option("--seed")->count() > 0) config.seed = seed;
            for (const auto& s : run_sets) config.apply_override(s);
            const auto outcome = run_pipeline(config, {resume, jobs}, log_line);
            return outcome.exit_code;
        } else if (*mapping) {
            write_text(mapping_out, default_emoji_mapping().to_json().dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}
