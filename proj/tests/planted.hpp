#pragma once

// Planted-signal corpus: every season follows one of four score-dynamics
// templates, blurred with random simplex noise. The archetype is written as
// the show's single genre so the pipeline sees it as the static tag.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plotdyn/labelset.hpp"
#include "plotdyn/util.hpp"
#include "support.hpp"

namespace planted {

namespace fs = std::filesystem;

inline const std::vector<std::string>& archetypes() {
    static const std::vector<std::string> names{"Drama", "Comedy", "Crime", "Horror"};
    return names;
}

struct Options {
    std::size_t shows = 300;
    int seasons_per_show = 2;
    int min_episodes = 8;
    int max_episodes = 16;
    double noise = 0.5;  // weight of the random simplex in each score row
    std::uint64_t seed = 2024;
};

struct Files {
    fs::path corpus, genres, emoji;
    std::size_t seasons = 0;
};

// Template weight of each label at relative position t in [0, 1].
inline plotdyn::Distribution template_row(int archetype, double t, std::size_t n, bool emotions) {
    plotdyn::Distribution row(n, 0.2 / static_cast<double>(n));
    const double pi = std::acos(-1.0);
    const std::size_t a = emotions ? 1 : 0, b = emotions ? 4 : 2, c = emotions ? 6 : 5;
    switch (archetype) {
        case 0:  // slow build
            row[a] += 0.1 + 0.8 * t;
            row[b] += 0.6 * (1.0 - t);
            break;
        case 1:  // early peak, fading
            row[a] += 0.9 * (1.0 - t);
            row[c] += 0.2 + 0.5 * t;
            break;
        case 2:  // mid-season spike
            row[b] += 0.1 + 0.9 * std::exp(-40.0 * (t - 0.5) * (t - 0.5));
            row[a] += 0.2;
            break;
        default:  // oscillation between two labels
            row[b] += 0.5 + 0.45 * std::sin(4.0 * pi * t);
            row[c] += 0.5 - 0.45 * std::sin(4.0 * pi * t);
            break;
    }
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
    return row;
}

/// Writes corpus.jsonl, genres20.jsonl and emoji11.jsonl under `dir`.
inline Files generate(const fs::path& dir, const Options& opt) {
    plotdyn::Rng rng(opt.seed);
    Files f{dir / "planted_corpus.jsonl", dir / "planted_genres20.jsonl", dir / "planted_emoji11.jsonl", 0};
    std::ofstream corpus(f.corpus), genres(f.genres), emoji(f.emoji);
    const auto& g = plotdyn::genres20();
    const auto& e = plotdyn::emoji11();
    genres << nlohmann::json{{"labelset", g.name()}, {"labels", g.labels()}}.dump() << "\n";
    emoji << nlohmann::json{{"labelset", e.name()}, {"labels", e.labels()}}.dump() << "\n";

    for (std::size_t show = 0; show < opt.shows; ++show) {
        const int archetype = static_cast<int>(show % 4);
        const std::string id = std::to_string(1000 + show);
        for (int season = 1; season <= opt.seasons_per_show; ++season) {
            const int episodes =
                opt.min_episodes + static_cast<int>(plotdyn::uniform_index(
                                       rng, static_cast<std::size_t>(opt.max_episodes - opt.min_episodes + 1)));
            for (int ep = 1; ep <= episodes; ++ep) {
                const double t = static_cast<double>(ep - 1) / static_cast<double>(episodes - 1);
                corpus << testing::episode_line(id, {archetypes()[static_cast<std::size_t>(archetype)]}, season, ep,
                                                "planted episode");
                for (auto [set, out] : {std::pair{&g, &genres}, std::pair{&e, &emoji}}) {
                    auto row = template_row(archetype, t, set->size(), set == &e);
                    const auto noise = testing::random_simplex(rng, set->size());
                    for (std::size_t u = 0; u < row.size(); ++u) row[u] = (1.0 - opt.noise) * row[u] + opt.noise * noise[u];
                    *out << nlohmann::json{{"show_id", id}, {"season", season}, {"episode", ep}, {"scores", row}}.dump()
                         << "\n";
                }
            }
            ++f.seasons;
        }
    }
    return f;
}

}  // namespace planted
