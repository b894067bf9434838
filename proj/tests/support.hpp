#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "plotdyn/labelset.hpp"
#include "plotdyn/scores.hpp"
#include "plotdyn/util.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("plotdyn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// One corpus JSONL record.
inline std::string episode_line(const std::string& show_id, const std::vector<std::string>& genres, int season,
                                int episode, const std::string& description,
                                const std::vector<std::string>& tags = {}) {
    nlohmann::ordered_json j;
    j["show_id"] = show_id;
    j["show_title"] = "Show " + show_id;
    j["show_genres"] = genres;
    j["season"] = season;
    j["episode"] = episode;
    j["title"] = "Episode " + std::to_string(episode);
    j["description"] = description;
    if (!tags.empty()) j["tags"] = tags;
    return j.dump() + "\n";
}

/// Strictly positive random point on the simplex of size n.
inline plotdyn::Distribution random_simplex(plotdyn::Rng& rng, std::size_t n) {
    plotdyn::Distribution d(n);
    double sum = 0.0;
    for (auto& x : d) {
        x = -std::log(1.0 - plotdyn::uniform01(rng)) + 1e-6;
        sum += x;
    }
    for (auto& x : d) x /= sum;
    return d;
}

inline plotdyn::ScoreMatrix random_scores(plotdyn::Rng& rng, const plotdyn::LabelSet& set, std::size_t episodes,
                                          std::string show = "s", int season = 1) {
    plotdyn::ScoreMatrix m;
    m.key = {std::move(show), season};
    m.labelset = set;
    for (std::size_t e = 0; e < episodes; ++e) {
        m.episodes.push_back(static_cast<int>(e + 1));
        m.rows.push_back(random_simplex(rng, set.size()));
    }
    return m;
}

}  // namespace testing
