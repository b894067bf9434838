#pragma once

#include <algorithm>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "artifact.hpp"
#include "error.hpp"
#include "util.hpp"

namespace plotdyn {

struct SeasonKey {
    std::string show_id;
    int season = 0;

    friend auto operator<=>(const SeasonKey&, const SeasonKey&) = default;
    friend bool operator==(const SeasonKey&, const SeasonKey&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const SeasonKey& k) {
    return os << k.show_id << '/' << k.season;
}

struct Episode {
    std::string show_id;
    int season_number = 0;
    int episode_number = 0;
    std::string title;
    std::string description;
    /// Source record had no description; description is empty text.
    bool description_missing = false;
    std::vector<std::string> tags;

    friend bool operator==(const Episode&, const Episode&) = default;
};

/// A season or show level genre label. Two-genre shows use the compound
/// form "First | Second", order preserved.
struct StaticTag {
    std::string label;

    static constexpr std::string_view kSeparator = " | ";

    static StaticTag compound(std::string_view first, std::string_view second) {
        return {std::string(first) + std::string(kSeparator) + std::string(second)};
    }

    /// Components of the tag: one entry for a single genre, two for a compound.
    std::vector<std::string> parts() const {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            const auto pos = label.find(kSeparator, start);
            out.push_back(label.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + kSeparator.size();
        }
        return out;
    }

    friend bool operator==(const StaticTag&, const StaticTag&) = default;
};

struct Season {
    std::string show_id;
    int season_number = 0;
    std::vector<Episode> episodes;  // ascending episode_number
    std::optional<StaticTag> derived_tag;

    SeasonKey key() const { return {show_id, season_number}; }

    friend bool operator==(const Season&, const Season&) = default;
};

struct Show {
    std::string id;
    std::string title;
    std::vector<std::string> genre_tags;

    friend bool operator==(const Show&, const Show&) = default;
};

/// Shows and their seasons. Shows keep first-appearance order; seasons are
/// grouped by show and ordered by season number.
class Corpus {
public:
    /// Adds a show; throws DataError on a duplicate id.
    void add_show(Show show) {
        if (index_.count(show.id)) throw DataError("duplicate show id '" + show.id + "'");
        index_.emplace(show.id, shows_.size());
        shows_.push_back(std::move(show));
    }

    /// Adds a season; its show must already be present.
    void add_season(Season season) {
        if (!find_show(season.show_id)) {
            throw DataError("season references unknown show '" + season.show_id + "'");
        }
        if (season.episodes.empty()) throw DataError("season without episodes");
        seasons_.push_back(std::move(season));
    }

    const Show* find_show(std::string_view id) const {
        auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &shows_[it->second];
    }

    const std::vector<Show>& shows() const { return shows_; }
    const std::vector<Season>& seasons() const { return seasons_; }
    std::vector<Season>& seasons() { return seasons_; }

    std::size_t episode_count() const {
        std::size_t n = 0;
        for (const auto& s : seasons_) n += s.episodes.size();
        return n;
    }

    const ArtifactMeta& meta() const { return meta_; }
    void set_meta(ArtifactMeta m) { meta_ = std::move(m); }

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.shows_ == b.shows_ && a.seasons_ == b.seasons_;
    }

private:
    std::vector<Show> shows_;
    std::vector<Season> seasons_;
    std::unordered_map<std::string, std::size_t> index_;
    ArtifactMeta meta_;
};

struct CorpusLoad {
    Corpus corpus;
    std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline std::optional<std::string> json_id(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return std::nullopt;
}

inline std::optional<int> json_positive_int(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer()) return std::nullopt;
    const auto v = it->get<long long>();
    if (v < 1 || v > std::numeric_limits<int>::max()) return std::nullopt;
    return static_cast<int>(v);
}

inline std::optional<std::vector<std::string>> json_string_array(const nlohmann::json& obj,
                                                                 const char* key) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) return std::nullopt;
    for (const auto& e : *it) {
        if (!e.is_string()) return std::nullopt;
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace detail

/// Parses a corpus dump in the canonical JSONL schema: one object per
/// episode with show_id, show_title, show_genres, season, episode, title,
/// description (and optional per-episode `tags`). Bad records become
/// diagnostics. Throws IoError when unreadable and DataError when nothing
/// parses.
inline CorpusLoad parse_corpus(std::istream& in, std::string_view source = "<stream>") {
    CorpusLoad result;
    std::vector<Show> shows;
    std::unordered_map<std::string, std::size_t> show_index;
    // show -> season number -> episodes
    std::vector<std::map<int, std::vector<Episode>>> seasons_by_show;
    std::size_t parsed = 0;
    std::size_t line_no = 0;
    std::string line;
    auto diag = [&](std::string msg) { result.diagnostics.push_back({line_no, std::move(msg)}); };

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            diag(std::string("invalid JSON: ") + e.what());
            continue;
        }
        if (!rec.is_object()) {
            diag("record is not an object");
            continue;
        }
        if (!rec.contains("show_id") && rec.contains("artifact")) {
            if (parsed == 0) result.corpus.set_meta(ArtifactMeta::read_from(rec));
            continue;
        }
        auto sid = rec.contains("show_id") ? detail::json_id(rec["show_id"]) : std::nullopt;
        if (!sid) {
            diag("missing or invalid show_id");
            continue;
        }
        auto season = detail::json_positive_int(rec, "season");
        auto number = detail::json_positive_int(rec, "episode");
        if (!season || !number) {
            diag("missing or non-positive season/episode number");
            continue;
        }
        auto genres = detail::json_string_array(rec, "show_genres");
        auto tags = detail::json_string_array(rec, "tags");
        if (!genres || !tags) {
            diag("show_genres/tags must be arrays of strings");
            continue;
        }
        Episode ep;
        ep.show_id = *sid;
        ep.season_number = *season;
        ep.episode_number = *number;
        ep.tags = std::move(*tags);
        if (auto it = rec.find("title"); it != rec.end() && it->is_string()) ep.title = it->get<std::string>();
        if (auto it = rec.find("description"); it != rec.end() && it->is_string()) {
            ep.description = it->get<std::string>();
        } else if (it == rec.end() || it->is_null()) {
            ep.description_missing = true;
            diag("episode " + ep.show_id + "/" + std::to_string(ep.season_number) + "/" +
                 std::to_string(ep.episode_number) + " has no description; kept as empty text");
        } else {
            diag("description is not a string");
            continue;
        }
        if (auto it = rec.find("description_missing"); it != rec.end() && it->is_boolean()) {
            ep.description_missing = ep.description_missing || it->get<bool>();
        }

        auto [sit, inserted] = show_index.emplace(ep.show_id, shows.size());
        if (inserted) {
            Show show;
            show.id = ep.show_id;
            if (auto it = rec.find("show_title"); it != rec.end() && it->is_string()) {
                show.title = it->get<std::string>();
            }
            show.genre_tags = std::move(*genres);
            shows.push_back(std::move(show));
            seasons_by_show.emplace_back();
        }
        auto& episodes = seasons_by_show[sit->second][ep.season_number];
        const bool dup = std::any_of(episodes.begin(), episodes.end(), [&](const Episode& e) {
            return e.episode_number == ep.episode_number;
        });
        if (dup) {
            diag("duplicate episode " + ep.show_id + "/" + std::to_string(ep.season_number) + "/" +
                 std::to_string(ep.episode_number) + " dropped");
            continue;
        }
        episodes.push_back(std::move(ep));
        ++parsed;
    }
    if (parsed == 0) {
        throw DataError("no parseable episode records in " + std::string(source));
    }
    for (std::size_t i = 0; i < shows.size(); ++i) {
        const std::string id = shows[i].id;
        result.corpus.add_show(std::move(shows[i]));
        for (auto& [number, episodes] : seasons_by_show[i]) {
            std::sort(episodes.begin(), episodes.end(), [](const Episode& a, const Episode& b) {
                return a.episode_number < b.episode_number;
            });
            Season s;
            s.show_id = id;
            s.season_number = number;
            s.episodes = std::move(episodes);
            result.corpus.add_season(std::move(s));
        }
    }
    return result;
}

inline CorpusLoad load_corpus(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_corpus(in, path.string());
}

/// Writes the canonical JSONL dump, preceded by a header line when the corpus
/// carries provenance.
inline void write_corpus(std::ostream& out, const Corpus& corpus) {
    if (!corpus.meta().config_hash.empty()) {
        nlohmann::ordered_json h;
        auto meta = corpus.meta();
        meta.kind = "corpus";
        meta.write_to(h);
        out << h.dump() << '\n';
    }
    for (const auto& season : corpus.seasons()) {
        const Show& show = *corpus.find_show(season.show_id);
        for (const auto& ep : season.episodes) {
            nlohmann::ordered_json j;
            j["show_id"] = ep.show_id;
            j["show_title"] = show.title;
            j["show_genres"] = show.genre_tags;
            j["season"] = ep.season_number;
            j["episode"] = ep.episode_number;
            j["title"] = ep.title;
            j["description"] = ep.description;
            if (ep.description_missing) j["description_missing"] = true;
            if (!ep.tags.empty()) j["tags"] = ep.tags;
            out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        }
    }
}

inline void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
    auto out = open_output(path);
    write_corpus(out, corpus);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Season-level static tag: the majority episode tag (ties broken by the
/// lexicographically smallest tag); otherwise the show's genre when it has
/// one or two (two become a compound tag); otherwise none.
inline std::optional<StaticTag> derive_season_tag(const Season& season, const Show& show) {
    std::map<std::string, std::size_t> counts;
    for (const auto& ep : season.episodes) {
        for (const auto& t : ep.tags) ++counts[t];
    }
    if (!counts.empty()) {
        // std::map iterates in lexicographic order, so the first maximum wins ties.
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        return StaticTag{best->first};
    }
    switch (show.genre_tags.size()) {
        case 1:
            return StaticTag{show.genre_tags[0]};
        case 2:
            return StaticTag::compound(show.genre_tags[0], show.genre_tags[1]);
        default:
            return std::nullopt;
    }
}

/// Fills Season::derived_tag for every season.
inline void annotate_tags(Corpus& corpus) {
    for (auto& season : corpus.seasons()) {
        season.derived_tag = derive_season_tag(season, *corpus.find_show(season.show_id));
    }
}

struct TaggedSeason {
    const Season* season;
    StaticTag tag;
};

/// Seasons that carry a derived tag, in corpus order. Pointers refer into
/// the given corpus.
inline std::vector<TaggedSeason> filter_tagged_seasons(const Corpus& corpus) {
    std::vector<TaggedSeason> out;
    for (const auto& season : corpus.seasons()) {
        if (auto tag = derive_season_tag(season, *corpus.find_show(season.show_id))) {
            out.push_back({&season, std::move(*tag)});
        }
    }
    return out;
}

}  // namespace plotdyn
