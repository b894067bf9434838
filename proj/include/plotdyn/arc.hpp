#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "artifact.hpp"
#include "corpus.hpp"
#include "labelset.hpp"
#include "scores.hpp"

namespace plotdyn {

/// Parameters of the smoothed posterior update.
///
/// `alpha` weights the fresh Bayes step against the previous state,
/// `epsilon` is the probability floor applied to classifier rows and to the
/// smoothed state. An empty `prior` means uniform.
class ArcParams {
public:
    static constexpr double kDefaultAlpha = 0.5;
    static constexpr double kDefaultEpsilon = 1e-3;

    ArcParams() = default;
    ArcParams(double alpha, double epsilon, Distribution prior = {})
        : alpha_(alpha), epsilon_(epsilon), prior_(std::move(prior)) {
        if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
        if (!(epsilon_ > 0.0)) throw ConfigError("epsilon must be positive");
        if (!prior_.empty() && !on_simplex(prior_)) throw ConfigError("prior is not a distribution");
    }

    /// Floor disabled. Only meaningful for comparing against the plain
    /// multiplicative update; zero probabilities make the update degenerate.
    static ArcParams unfloored(double alpha, Distribution prior = {}) {
        ArcParams p(alpha, kDefaultEpsilon, std::move(prior));
        p.floor_ = false;
        p.epsilon_ = 0.0;
        return p;
    }

    double alpha() const { return alpha_; }
    double epsilon() const { return epsilon_; }
    bool floored() const { return floor_; }
    const Distribution& prior() const { return prior_; }

    /// Checks the label-count dependent constraints.
    void validate_for(std::size_t n_labels) const {
        if (floor_ && !(epsilon_ < 1.0 / static_cast<double>(n_labels))) {
            throw ConfigError("epsilon must be below 1/" + std::to_string(n_labels));
        }
        if (!prior_.empty() && prior_.size() != n_labels) {
            throw ConfigError("prior has " + std::to_string(prior_.size()) + " components, expected " +
                              std::to_string(n_labels));
        }
    }

    Distribution initial_state(std::size_t n_labels) const {
        return prior_.empty() ? uniform_distribution(n_labels) : prior_;
    }

    friend bool operator==(const ArcParams&, const ArcParams&) = default;

private:
    double alpha_ = kDefaultAlpha;
    double epsilon_ = kDefaultEpsilon;
    bool floor_ = true;
    Distribution prior_;
};

/// One Bayes step: result(u) = prev(u) * lik(u) / sum_u' prev(u') * lik(u').
inline Distribution bayes_update(std::span<const double> prev, std::span<const double> likelihood) {
    if (prev.size() != likelihood.size()) throw DataError("bayes_update: dimension mismatch");
    Distribution out(prev.size());
    double denom = 0.0;
    for (std::size_t u = 0; u < prev.size(); ++u) {
        out[u] = prev[u] * likelihood[u];
        denom += out[u];
    }
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw DegenerateInputError("bayes_update: zero normaliser (prior and likelihood have disjoint support)");
    }
    for (double& v : out) v /= denom;
    return out;
}

/// Clamps every component to at least epsilon, then renormalises. Inputs
/// whose components are all >= epsilon come back unchanged up to rounding.
inline Distribution floor_and_renormalize(std::span<const double> dist, double epsilon) {
    Distribution out(dist.begin(), dist.end());
    for (double& v : out) {
        if (!std::isfinite(v) || v < 0.0) throw DegenerateInputError("floor_and_renormalize: invalid component");
        if (v < epsilon) v = epsilon;
    }
    const double s = total(out);
    if (!(s > 0.0)) return uniform_distribution(out.size());
    for (double& v : out) v /= s;
    return out;
}

struct Trajectory {
    SeasonKey key;
    LabelSet labelset;
    std::vector<int> episodes;
    std::vector<Distribution> points;
    ArcParams params;

    std::size_t size() const { return points.size(); }

    /// Probability series of one label across the trajectory.
    std::vector<double> series(std::size_t label) const {
        std::vector<double> s;
        s.reserve(points.size());
        for (const auto& p : points) s.push_back(p[label]);
        return s;
    }
};

/// Runs the smoothed update over the rows of a score matrix:
///   r_i = bayes_update(p_{i-1}, floor(scores_i))
///   p_i = floor((1 - alpha) p_{i-1} + alpha r_i)
/// starting from the prior p_0. Returns [p_1 .. p_M].
inline Trajectory extract_arc(const ScoreMatrix& scores, const ArcParams& params) {
    if (scores.rows.empty()) throw DataError("extract_arc: empty score matrix");
    const std::size_t n = scores.labelset.size();
    params.validate_for(n);
    const auto floor = [&](std::span<const double> d) {
        return params.floored() ? floor_and_renormalize(d, params.epsilon()) : Distribution(d.begin(), d.end());
    };

    Trajectory t;
    t.key = scores.key;
    t.labelset = scores.labelset;
    t.episodes = scores.episodes;
    t.params = params;
    t.points.reserve(scores.rows.size());

    Distribution state = params.initial_state(n);
    const double a = params.alpha();
    for (const auto& row : scores.rows) {
        if (row.size() != n) throw DataError("extract_arc: row width does not match label set");
        const Distribution step = bayes_update(state, floor(row));
        Distribution mixed(n);
        for (std::size_t u = 0; u < n; ++u) mixed[u] = (1.0 - a) * state[u] + a * step[u];
        state = floor(mixed);
        t.points.push_back(state);
    }
    return t;
}

/// A season's trajectories on several label sets (normally genres then
/// emoji). Each block stays on its own simplex.
struct CombinedTrajectory {
    SeasonKey key;
    std::vector<Trajectory> blocks;

    std::size_t size() const { return blocks.empty() ? 0 : blocks.front().size(); }

    /// Width of one flattened point: the sum of the label set sizes.
    std::size_t width() const {
        std::size_t w = 0;
        for (const auto& b : blocks) w += b.labelset.size();
        return w;
    }
};

inline CombinedTrajectory combine(std::vector<Trajectory> blocks) {
    if (blocks.empty()) throw DataError("combine: no trajectories");
    for (const auto& b : blocks) {
        if (b.size() != blocks.front().size()) {
            throw DataError("combine: trajectory lengths differ (" + std::to_string(blocks.front().size()) + " vs " +
                            std::to_string(b.size()) + ")");
        }
        if (b.key != blocks.front().key) throw DataError("combine: trajectories belong to different seasons");
    }
    CombinedTrajectory c;
    c.key = blocks.front().key;
    c.blocks = std::move(blocks);
    return c;
}

inline CombinedTrajectory combine(Trajectory genre, Trajectory emoji) {
    std::vector<Trajectory> blocks;
    blocks.push_back(std::move(genre));
    blocks.push_back(std::move(emoji));
    return combine(std::move(blocks));
}

// --- Arc JSONL ---------------------------------------------------------

inline nlohmann::ordered_json params_to_json(const ArcParams& p) {
    nlohmann::ordered_json j;
    j["alpha"] = p.alpha();
    j["epsilon"] = p.epsilon();
    if (p.prior().empty()) {
        j["prior"] = "uniform";
    } else {
        j["prior"] = p.prior();
    }
    return j;
}

inline ArcParams params_from_json(const nlohmann::json& j) {
    try {
        Distribution prior;
        if (j.contains("prior") && j["prior"].is_array()) prior = j["prior"].get<Distribution>();
        const double eps = j.at("epsilon").get<double>();
        if (eps == 0.0) return ArcParams::unfloored(j.at("alpha").get<double>(), prior);
        return ArcParams(j.at("alpha").get<double>(), eps, prior);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed arc params: ") + e.what());
    }
}

struct ArcFile {
    ArtifactMeta meta;
    ArcParams params;
    std::vector<LabelSet> labelsets;
    std::vector<CombinedTrajectory> arcs;
    std::vector<Diagnostic> diagnostics;
};

/// Header: {"artifact":"arcs","labelsets":[{"labelset":..,"labels":[..]}..],"params":{..}};
/// rows: {"show_id","season","episode","<labelset>":[..] per label set}.
inline void write_arcs(std::ostream& out, const std::vector<CombinedTrajectory>& arcs,
                       const std::vector<LabelSet>& labelsets, const ArcParams& params, const ArtifactMeta& meta) {
    nlohmann::ordered_json h;
    auto m = meta;
    m.kind = "arcs";
    m.write_to(h);
    auto& sets = h["labelsets"] = nlohmann::ordered_json::array();
    for (const auto& ls : labelsets) sets.push_back({{"labelset", ls.name()}, {"labels", ls.labels()}});
    h["params"] = params_to_json(params);
    out << h.dump() << '\n';
    for (const auto& arc : arcs) {
        for (std::size_t i = 0; i < arc.size(); ++i) {
            nlohmann::ordered_json r;
            r["show_id"] = arc.key.show_id;
            r["season"] = arc.key.season;
            r["episode"] = arc.blocks.front().episodes[i];
            for (const auto& b : arc.blocks) r[b.labelset.name()] = b.points[i];
            out << r.dump() << '\n';
        }
    }
}

inline ArcFile parse_arcs(std::istream& in, std::string_view source = "<stream>") {
    ArcFile f;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::map<SeasonKey, std::vector<std::pair<int, std::vector<Distribution>>>> rows;
    std::vector<SeasonKey> order;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            if (!have_header) throw DataError(std::string(source) + ": invalid arc header");
            f.diagnostics.push_back({line_no, std::string("invalid JSON: ") + e.what()});
            continue;
        }
        if (!have_header) {
            if (!j.is_object() || !j.contains("labelsets") || !j.contains("params")) {
                throw DataError(std::string(source) + ": missing arc header line");
            }
            f.meta = ArtifactMeta::read_from(j);
            f.params = params_from_json(j["params"]);
            for (const auto& ls : j["labelsets"]) {
                try {
                    f.labelsets.emplace_back(ls.at("labelset").get<std::string>(),
                                             ls.at("labels").get<std::vector<std::string>>());
                } catch (const nlohmann::json::exception& e) {
                    throw DataError(std::string(source) + ": malformed label set in header: " + e.what());
                }
            }
            if (f.labelsets.empty()) throw DataError(std::string(source) + ": arc header lists no label sets");
            have_header = true;
            continue;
        }
        auto sid = j.is_object() && j.contains("show_id") ? detail::json_id(j["show_id"]) : std::nullopt;
        auto season = j.is_object() ? detail::json_positive_int(j, "season") : std::nullopt;
        auto episode = j.is_object() ? detail::json_positive_int(j, "episode") : std::nullopt;
        if (!sid || !season || !episode) {
            f.diagnostics.push_back({line_no, "arc row lacks show_id/season/episode"});
            continue;
        }
        std::vector<Distribution> pts;
        bool ok = true;
        for (const auto& ls : f.labelsets) {
            auto it = j.find(ls.name());
            if (it == j.end() || !it->is_array() || it->size() != ls.size()) {
                ok = false;
                break;
            }
            pts.push_back(it->get<Distribution>());
            if (!on_simplex(pts.back())) ok = false;
        }
        if (!ok) {
            f.diagnostics.push_back({line_no, "arc row has a missing or invalid point"});
            continue;
        }
        SeasonKey key{*sid, *season};
        auto [it, inserted] = rows.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.emplace_back(*episode, std::move(pts));
    }
    if (!have_header) throw DataError(std::string(source) + ": empty arc file");
    for (const auto& key : order) {
        auto& eps = rows[key];
        std::sort(eps.begin(), eps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        CombinedTrajectory c;
        c.key = key;
        for (std::size_t b = 0; b < f.labelsets.size(); ++b) {
            Trajectory t;
            t.key = key;
            t.labelset = f.labelsets[b];
            t.params = f.params;
            for (auto& [number, pts] : eps) {
                t.episodes.push_back(number);
                t.points.push_back(std::move(pts[b]));
            }
            c.blocks.push_back(std::move(t));
        }
        f.arcs.push_back(std::move(c));
    }
    return f;
}

inline ArcFile load_arcs(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_arcs(in, path.string());
}

}  // namespace plotdyn
