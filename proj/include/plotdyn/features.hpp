#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arc.hpp"
#include "artifact.hpp"
#include "util.hpp"

namespace plotdyn {

inline constexpr std::size_t kDefaultTimeline = 10;

/// A trajectory stretched or compressed onto T equispaced points of [0, 1].
struct ResampledArc {
    LabelSet labelset;
    std::size_t T = 0;
    std::vector<Distribution> points;

    std::vector<double> series(std::size_t label) const {
        std::vector<double> s;
        s.reserve(points.size());
        for (const auto& p : points) s.push_back(p[label]);
        return s;
    }
};

/// Piecewise-linear resampling of every component. Sample j sits at
/// t = j / (T - 1); episode i of M sits at i / (M - 1). Samples that land on
/// an episode copy it exactly; interpolated samples are renormalised.
inline ResampledArc resample(const Trajectory& traj, std::size_t T = kDefaultTimeline) {
    if (T < 2) throw ConfigError("timeline length must be at least 2");
    if (traj.points.empty()) throw DataError("resample: empty trajectory");
    ResampledArc out;
    out.labelset = traj.labelset;
    out.T = T;
    out.points.reserve(T);
    const std::size_t M = traj.points.size();
    if (M == 1) {
        out.points.assign(T, traj.points.front());
        return out;
    }
    for (std::size_t j = 0; j < T; ++j) {
        // position on the episode axis, computed from integers to keep exact hits exact
        const std::size_t num = j * (M - 1);
        std::size_t i0 = num / (T - 1);
        const std::size_t rem = num % (T - 1);
        if (rem == 0) {
            out.points.push_back(traj.points[i0]);
            continue;
        }
        const double frac = static_cast<double>(rem) / static_cast<double>(T - 1);
        const auto& a = traj.points[i0];
        const auto& b = traj.points[i0 + 1];
        Distribution p(a.size());
        for (std::size_t u = 0; u < a.size(); ++u) p[u] = (1.0 - frac) * a[u] + frac * b[u];
        out.points.push_back(normalized(std::move(p)));
    }
    return out;
}

struct TagStats {
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    double variance = 0.0;  // population
};

inline TagStats tag_stats(std::span<const double> series) {
    if (series.empty()) throw DataError("tag_stats: empty series");
    TagStats s;
    const double n = static_cast<double>(series.size());
    for (double v : series) s.mean += v;
    s.mean /= n;
    for (double v : series) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= n;
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t m = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
    return s;
}

/// Trapezoidal area over the unit timeline.
inline double auc(std::span<const double> series) {
    if (series.size() < 2) throw DataError("auc: need at least two samples");
    const double dt = 1.0 / static_cast<double>(series.size() - 1);
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) area += 0.5 * (series[i] + series[i + 1]) * dt;
    return area;
}

struct Crossings {
    std::size_t count = 0;
    double first_time = -1.0;  // -1 when the series never meet
};

/// Meetings of two series on the unit timeline. With d = a - b, every
/// strict sign change between neighbouring samples is one crossing at the
/// linearly interpolated time, and every maximal run of exact zeros is one
/// crossing at the run's first sample.
inline Crossings crossings(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DataError("crossings: need equal lengths >= 2");
    const std::size_t T = a.size();
    const double dt = 1.0 / static_cast<double>(T - 1);
    Crossings c;
    auto record = [&](double t) {
        if (c.count++ == 0) c.first_time = t;
    };
    for (std::size_t i = 0; i < T; ++i) {
        const double d = a[i] - b[i];
        if (d == 0.0) {
            if (i == 0 || a[i - 1] - b[i - 1] != 0.0) record(static_cast<double>(i) * dt);
            continue;
        }
        if (i + 1 < T) {
            const double e = a[i + 1] - b[i + 1];
            if (e != 0.0 && (d < 0.0) != (e < 0.0)) record((static_cast<double>(i) + d / (d - e)) * dt);
        }
    }
    return c;
}

struct FeatureConfig {
    bool include_stats = true;
    bool include_auc = true;
    bool include_crossings = false;
    std::size_t T = kDefaultTimeline;

    void validate() const {
        if (!include_stats && !include_auc && !include_crossings) {
            throw ConfigError("feature config enables no feature group");
        }
        if (T < 2) throw ConfigError("timeline length must be at least 2");
    }

    /// Parses a comma separated list such as "stats,auc".
    static FeatureConfig parse(std::string_view groups, std::size_t T = kDefaultTimeline) {
        FeatureConfig c{false, false, false, T};
        for (const auto& g : split(groups, ',')) {
            const auto name = trim(g);
            if (name == "stats") {
                c.include_stats = true;
            } else if (name == "auc") {
                c.include_auc = true;
            } else if (name == "crossings") {
                c.include_crossings = true;
            } else if (!name.empty()) {
                throw ConfigError("unknown feature group '" + std::string(name) + "'");
            }
        }
        c.validate();
        return c;
    }

    std::string to_string() const {
        std::string s;
        auto add = [&](const char* n) { s += s.empty() ? n : std::string(",") + n; };
        if (include_stats) add("stats");
        if (include_auc) add("auc");
        if (include_crossings) add("crossings");
        return s;
    }
};

/// Names every coordinate of a feature vector as labelset:tag:feature, or
/// labelset:tagA~tagB:crossing_{count,time} for pair features.
inline std::vector<std::string> feature_layout(const std::vector<LabelSet>& labelsets, const FeatureConfig& config) {
    config.validate();
    std::vector<std::string> names;
    for (const auto& ls : labelsets) {
        for (const auto& tag : ls.labels()) {
            const std::string prefix = ls.name() + ":" + tag + ":";
            if (config.include_stats) {
                for (const char* f : {"mean", "median", "min", "max", "variance"}) names.push_back(prefix + f);
            }
            if (config.include_auc) names.push_back(prefix + "auc");
        }
    }
    if (config.include_crossings) {
        for (const auto& ls : labelsets) {
            for (std::size_t i = 0; i < ls.size(); ++i) {
                for (std::size_t j = i + 1; j < ls.size(); ++j) {
                    const std::string prefix = ls.name() + ":" + ls[i] + "~" + ls[j] + ":";
                    names.push_back(prefix + "crossing_count");
                    names.push_back(prefix + "crossing_time");
                }
            }
        }
    }
    return names;
}

struct FeatureVector {
    SeasonKey key;
    std::string static_tag;  // empty when the season has no tag
    std::vector<double> values;
};

/// Resamples every block to config.T and emits features in feature_layout order.
inline FeatureVector build_features(const CombinedTrajectory& combined, const FeatureConfig& config) {
    config.validate();
    FeatureVector fv;
    fv.key = combined.key;
    std::vector<ResampledArc> arcs;
    for (const auto& b : combined.blocks) arcs.push_back(resample(b, config.T));

    for (const auto& arc : arcs) {
        for (std::size_t u = 0; u < arc.labelset.size(); ++u) {
            const auto s = arc.series(u);
            if (config.include_stats) {
                const auto st = tag_stats(s);
                fv.values.insert(fv.values.end(), {st.mean, st.median, st.min, st.max, st.variance});
            }
            if (config.include_auc) fv.values.push_back(auc(s));
        }
    }
    if (config.include_crossings) {
        for (const auto& arc : arcs) {
            std::vector<std::vector<double>> series;
            for (std::size_t u = 0; u < arc.labelset.size(); ++u) series.push_back(arc.series(u));
            for (std::size_t i = 0; i < series.size(); ++i) {
                for (std::size_t j = i + 1; j < series.size(); ++j) {
                    const auto c = crossings(series[i], series[j]);
                    fv.values.push_back(static_cast<double>(c.count));
                    fv.values.push_back(c.first_time);
                }
            }
        }
    }
    return fv;
}

// --- Feature CSV -------------------------------------------------------

struct FeatureTable {
    ArtifactMeta meta;
    std::vector<std::string> layout;
    std::vector<FeatureVector> rows;
};

/// Line 1 is a `# {json}` provenance comment, line 2 the column header
/// (show_id,season,static_tag,<layout>), then one row per season.
inline void write_feature_csv(std::ostream& out, const FeatureTable& table) {
    nlohmann::ordered_json h;
    auto m = table.meta;
    m.kind = "features";
    m.write_to(h);
    out << "# " << h.dump() << '\n';
    out << "show_id,season,static_tag";
    for (const auto& n : table.layout) out << ',' << csv_field(n);
    out << '\n';
    for (const auto& r : table.rows) {
        if (r.values.size() != table.layout.size()) throw DataError("feature row width does not match layout");
        out << csv_field(r.key.show_id) << ',' << r.key.season << ',' << csv_field(r.static_tag);
        for (double v : r.values) out << ',' << format_double(v);
        out << '\n';
    }
}

inline FeatureTable parse_feature_csv(std::istream& in, std::string_view source = "<stream>") {
    FeatureTable t;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (line.rfind("#", 0) == 0) {
            if (!have_header) {
                try {
                    t.meta = ArtifactMeta::read_from(nlohmann::json::parse(line.substr(1)));
                } catch (const nlohmann::json::parse_error&) {
                }
            }
            continue;
        }
        auto fields = parse_csv_line(line);
        if (!have_header) {
            if (fields.size() < 4 || fields[0] != "show_id" || fields[1] != "season" || fields[2] != "static_tag") {
                throw DataError(std::string(source) + ": bad feature CSV header");
            }
            t.layout.assign(fields.begin() + 3, fields.end());
            have_header = true;
            continue;
        }
        if (fields.size() != t.layout.size() + 3) {
            throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": wrong column count");
        }
        FeatureVector fv;
        fv.key.show_id = fields[0];
        try {
            fv.key.season = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": bad season number");
        }
        fv.static_tag = fields[2];
        fv.values.reserve(t.layout.size());
        for (std::size_t i = 3; i < fields.size(); ++i) {
            fv.values.push_back(parse_double(fields[i]));
            if (!std::isfinite(fv.values.back())) {
                throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": non-finite feature");
            }
        }
        t.rows.push_back(std::move(fv));
    }
    if (!have_header) throw DataError(std::string(source) + ": empty feature file");
    return t;
}

inline FeatureTable load_feature_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_feature_csv(in, path.string());
}

}  // namespace plotdyn
