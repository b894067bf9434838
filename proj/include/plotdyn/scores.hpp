#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "artifact.hpp"
#include "corpus.hpp"
#include "labelset.hpp"
#include "lexicon.hpp"
#include "naive_bayes.hpp"

namespace plotdyn {

/// Per-episode label distributions of one season, in episode order.
struct ScoreMatrix {
    SeasonKey key;
    LabelSet labelset;
    std::vector<int> episodes;
    std::vector<Distribution> rows;

    std::size_t size() const { return rows.size(); }
};

inline ScoreMatrix score_season(const Season& season, const NaiveBayesModel& model) {
    ScoreMatrix m;
    m.key = season.key();
    m.labelset = model.labelset();
    for (const auto& ep : season.episodes) {
        m.episodes.push_back(ep.episode_number);
        m.rows.push_back(model.posterior(ep.description));
    }
    return m;
}

/// Training data for the built-in classifier: the seed lexicon, plus for
/// genre label sets every non-empty description of a tagged season labelled
/// with each component of the season tag that maps into the set.
inline std::vector<LabeledText> weak_label_training_set(const Corpus& corpus, const LabelSet& set) {
    auto data = seed_documents(set);
    if (set.name() == "emoji11") return data;
    for (const auto& tagged : filter_tagged_seasons(corpus)) {
        for (const auto& part : tagged.tag.parts()) {
            auto label = map_genre(part, set);
            if (!label) continue;
            for (const auto& ep : tagged.season->episodes) {
                if (!ep.description.empty()) data.push_back({ep.description, *label});
            }
        }
    }
    return data;
}

struct ScoreFile {
    ArtifactMeta meta;
    LabelSet labelset;
    std::map<SeasonKey, ScoreMatrix> seasons;
    std::vector<Diagnostic> diagnostics;
};

inline constexpr double kScoreRenormTolerance = 1e-6;

/// Reads a score JSONL file. The header must name `labelset` with the same
/// labels in the same order. Rows within 1e-6 of the simplex are
/// renormalised; any other bad row excludes its whole season.
inline ScoreFile parse_scores(std::istream& in, const LabelSet& labelset, std::string_view source = "<stream>") {
    ScoreFile out;
    out.labelset = labelset;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::map<SeasonKey, std::map<int, Distribution>> rows;
    std::map<SeasonKey, std::size_t> bad;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            if (!have_header) throw DataError(std::string(source) + ": invalid header: " + e.what());
            out.diagnostics.push_back({line_no, std::string("invalid JSON: ") + e.what()});
            continue;
        }
        if (!have_header) {
            if (!j.is_object() || !j.contains("labelset") || !j.contains("labels")) {
                throw DataError(std::string(source) + ": missing score header line");
            }
            std::vector<std::string> labels;
            try {
                labels = j["labels"].get<std::vector<std::string>>();
            } catch (const nlohmann::json::exception&) {
                throw DataError(std::string(source) + ": header labels must be strings");
            }
            const auto name = j["labelset"].is_string() ? j["labelset"].get<std::string>() : "";
            if (name != labelset.name() || labels != labelset.labels()) {
                throw DataError(std::string(source) + ": label set '" + name +
                                "' does not match expected '" + labelset.name() + "'");
            }
            out.meta = ArtifactMeta::read_from(j);
            have_header = true;
            continue;
        }
        auto fail = [&](const std::optional<SeasonKey>& key, std::string msg) {
            out.diagnostics.push_back({line_no, std::move(msg)});
            if (key) bad[*key] = line_no;
        };
        if (!j.is_object()) {
            fail(std::nullopt, "row is not an object");
            continue;
        }
        auto sid = j.contains("show_id") ? detail::json_id(j["show_id"]) : std::nullopt;
        auto season = detail::json_positive_int(j, "season");
        if (!sid || !season) {
            fail(std::nullopt, "row lacks show_id/season");
            continue;
        }
        SeasonKey key{*sid, *season};
        auto episode = detail::json_positive_int(j, "episode");
        if (!episode) {
            fail(key, "row lacks a positive episode number");
            continue;
        }
        auto it = j.find("scores");
        if (it == j.end() || !it->is_array() || it->size() != labelset.size()) {
            fail(key, "scores must be an array of " + std::to_string(labelset.size()) + " numbers");
            continue;
        }
        Distribution d;
        bool ok = true;
        for (const auto& v : *it) {
            if (!v.is_number()) {
                ok = false;
                break;
            }
            d.push_back(v.get<double>());
        }
        if (!ok) {
            fail(key, "non-numeric score");
            continue;
        }
        bool valid = true;
        for (double v : d) valid = valid && std::isfinite(v) && v >= 0.0;
        if (!valid) {
            fail(key, "scores must be finite and non-negative");
            continue;
        }
        const double s = total(d);
        if (std::abs(s - 1.0) > kScoreRenormTolerance) {
            fail(key, "scores sum to " + format_double(s) + ", not 1");
            continue;
        }
        for (double& v : d) v /= s;
        if (!rows[key].emplace(*episode, std::move(d)).second) {
            fail(key, "duplicate episode " + std::to_string(*episode));
        }
    }
    if (!have_header) throw DataError(std::string(source) + ": empty score file");

    for (auto& [key, eps] : rows) {
        if (bad.count(key)) continue;
        ScoreMatrix m;
        m.key = key;
        m.labelset = labelset;
        for (auto& [number, dist] : eps) {
            m.episodes.push_back(number);
            m.rows.push_back(std::move(dist));
        }
        out.seasons.emplace(key, std::move(m));
    }
    return out;
}

inline ScoreFile load_scores(const std::filesystem::path& path, const LabelSet& labelset) {
    auto in = open_input(path);
    return parse_scores(in, labelset, path.string());
}

/// Reads only the header to find out which label set a score file uses.
inline std::string peek_score_labelset(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            if (j.is_object() && j.contains("labelset") && j["labelset"].is_string()) {
                return j["labelset"].get<std::string>();
            }
        } catch (const nlohmann::json::parse_error&) {
        }
        break;
    }
    throw DataError(path.string() + ": missing score header line");
}

inline void write_scores(std::ostream& out, const LabelSet& labelset, const std::vector<const ScoreMatrix*>& seasons,
                         const ArtifactMeta& meta = {}) {
    nlohmann::ordered_json h;
    h["labelset"] = labelset.name();
    h["labels"] = labelset.labels();
    if (!meta.config_hash.empty() || meta.seed) {
        auto m = meta;
        m.kind = "scores";
        m.write_to(h);
    }
    out << h.dump() << '\n';
    for (const auto* s : seasons) {
        for (std::size_t i = 0; i < s->rows.size(); ++i) {
            nlohmann::ordered_json r;
            r["show_id"] = s->key.show_id;
            r["season"] = s->key.season;
            r["episode"] = s->episodes[i];
            r["scores"] = s->rows[i];
            out << r.dump() << '\n';
        }
    }
}

/// Total assignment of every source label (e.g. the 64 emoji of an emoji
/// classifier) to one label of a target set.
class LabelMapping {
public:
    LabelMapping(LabelSet source, LabelSet target, std::vector<std::size_t> assignment)
        : source_(std::move(source)), target_(std::move(target)), assignment_(std::move(assignment)) {
        if (assignment_.size() != source_.size()) {
            throw ConfigError("mapping assigns " + std::to_string(assignment_.size()) + " of " +
                              std::to_string(source_.size()) + " source labels");
        }
        for (auto t : assignment_) {
            if (t >= target_.size()) throw ConfigError("mapping target index out of range");
        }
    }

    /// Parses {"source": name, "source_labels": [...], "target": name,
    /// "assignment": [target label per source label]}.
    static LabelMapping from_json(const nlohmann::json& j) {
        try {
            LabelSet source(j.at("source").get<std::string>(), j.at("source_labels").get<std::vector<std::string>>());
            const LabelSet& target = builtin_labelset(j.at("target").get<std::string>());
            std::vector<std::size_t> assignment;
            for (const auto& name : j.at("assignment")) {
                auto idx = target.index_of(name.get<std::string>());
                if (!idx) throw ConfigError("mapping target '" + name.get<std::string>() + "' not in " + target.name());
                assignment.push_back(*idx);
            }
            return LabelMapping(std::move(source), target, std::move(assignment));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed label mapping: ") + e.what());
        }
    }

    static LabelMapping load(const std::filesystem::path& path) {
        try {
            return from_json(nlohmann::json::parse(read_file(path)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["source"] = source_.name();
        j["source_labels"] = source_.labels();
        j["target"] = target_.name();
        auto& arr = j["assignment"] = nlohmann::ordered_json::array();
        for (auto t : assignment_) arr.push_back(target_[t]);
        return j;
    }

    const LabelSet& source() const { return source_; }
    const LabelSet& target() const { return target_; }
    const std::vector<std::size_t>& assignment() const { return assignment_; }

    /// Number of source labels mapped onto each target label.
    std::vector<std::size_t> group_sizes() const {
        std::vector<std::size_t> g(target_.size(), 0);
        for (auto t : assignment_) ++g[t];
        return g;
    }

private:
    LabelSet source_;
    LabelSet target_;
    std::vector<std::size_t> assignment_;
};

/// The 64 emoji of the DeepMoji output layer, in output order.
inline const LabelSet& emoji64() {
    static const LabelSet set(
        "emoji64",
        {"😂", "😒", "😩", "😭", "😍", "😔", "👌", "😊", "❤", "😏", "😁", "🎶", "😳", "💯", "😴", "😌",
         "☺", "🙌", "💕", "😑", "😅", "🙏", "😕", "😘", "♥", "😐", "💁", "😞", "🙈", "😫", "✌", "😎",
         "😡", "👍", "😢", "😪", "😋", "😤", "✋", "😷", "👏", "👀", "🔫", "😣", "😈", "😓", "💔", "♡",
         "🎧", "🙊", "😉", "💀", "😖", "😄", "😜", "😠", "🙅", "💪", "👊", "💜", "💖", "💙", "😬", "✨"});
    return set;
}

/// Default 64 -> 11 grouping shipped with the tool; override with a mapping file.
inline const LabelMapping& default_emoji_mapping() {
    static const LabelMapping mapping = [] {
        const std::vector<std::string_view> groups = {
            "Happy", "Mad",   "Sad",   "Sad",   "Love",  "Sad",   "Deal",  "Happy", "Love",  "Wink",  "Happy",
            "Music", "Eyes",  "Deal",  "Misc",  "Happy", "Happy", "Deal",  "Love",  "Mad",   "Happy", "Deal",
            "Misc",  "Love",  "Love",  "Misc",  "Wink",  "Sad",   "Eyes",  "Sad",   "Deal",  "Wink",  "Mad",
            "Deal",  "Sad",   "Sad",   "Wink",  "Mad",   "Force", "Fear",  "Deal",  "Eyes",  "Force", "Fear",
            "Wink",  "Fear",  "Sad",   "Love",  "Music", "Eyes",  "Wink",  "Fear",  "Fear",  "Happy", "Wink",
            "Mad",   "Mad",   "Force", "Force", "Love",  "Love",  "Love",  "Fear",  "Misc"};
        std::vector<std::size_t> assignment;
        for (auto g : groups) assignment.push_back(*emoji11().index_of(g));
        return LabelMapping(emoji64(), emoji11(), std::move(assignment));
    }();
    return mapping;
}

/// Sums source probabilities into their target groups.
inline Distribution aggregate_emoji64(std::span<const double> dist64, const LabelMapping& mapping) {
    if (dist64.size() != mapping.source().size()) {
        throw DataError("expected " + std::to_string(mapping.source().size()) + " source scores, got " +
                        std::to_string(dist64.size()));
    }
    Distribution out(mapping.target().size(), 0.0);
    for (std::size_t i = 0; i < dist64.size(); ++i) out[mapping.assignment()[i]] += dist64[i];
    return out;
}

/// Aggregates every row of a score matrix through the mapping.
inline ScoreMatrix aggregate_scores(const ScoreMatrix& m, const LabelMapping& mapping) {
    ScoreMatrix out;
    out.key = m.key;
    out.labelset = mapping.target();
    out.episodes = m.episodes;
    for (const auto& row : m.rows) out.rows.push_back(aggregate_emoji64(row, mapping));
    return out;
}

}  // namespace plotdyn
