#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "artifact.hpp"
#include "corpus.hpp"
#include "util.hpp"

namespace plotdyn {

/// Drops HTML tags, decodes the common entities and collapses whitespace.
inline std::string strip_html(std::string_view html) {
    std::string text;
    bool in_tag = false;
    for (std::size_t i = 0; i < html.size(); ++i) {
        const char c = html[i];
        if (in_tag) {
            if (c == '>') {
                in_tag = false;
                text += ' ';
            }
            continue;
        }
        if (c == '<') {
            in_tag = true;
            continue;
        }
        if (c == '&') {
            static const std::pair<std::string_view, char> entities[] = {
                {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''}, {"&nbsp;", ' '}};
            bool matched = false;
            for (const auto& [ent, ch] : entities) {
                if (html.substr(i, ent.size()) == ent) {
                    text += ch;
                    i += ent.size() - 1;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        text += c;
    }
    std::string out;
    bool space = false;
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

struct IdRange {
    long first = 1;
    long last = 1;

    /// Parses "a..b" (inclusive) or a single id.
    static IdRange parse(std::string_view s) {
        try {
            const auto dots = s.find("..");
            IdRange r;
            if (dots == std::string_view::npos) {
                r.first = r.last = std::stol(std::string(s));
            } else {
                r.first = std::stol(std::string(s.substr(0, dots)));
                r.last = std::stol(std::string(s.substr(dots + 2)));
            }
            if (r.first < 1 || r.last < r.first) throw ConfigError("");
            return r;
        } catch (const std::exception&) {
            throw ConfigError("id range must look like 1..500 with 1 <= a <= b, got '" + std::string(s) + "'");
        }
    }
};

struct FetchOptions {
    std::string base_url = "https://api.tvmaze.com";
    IdRange ids;
    std::chrono::milliseconds min_interval{500};  // the public API allows ~20 calls / 10 s
    int max_retries = 4;
    std::chrono::milliseconds backoff{1000};  // doubled on every retry
    std::chrono::seconds timeout{20};
};

struct FetchReport {
    long resumed_after = 0;  // highest show id already present in the output
    std::size_t shows_written = 0;
    std::size_t episodes_written = 0;
    std::size_t shows_skipped = 0;
    std::vector<Diagnostic> diagnostics;
};

/// Highest numeric show_id in an existing dump, 0 if none.
inline long last_fetched_show(const std::filesystem::path& path) {
    std::ifstream in(path);
    long best = 0;
    std::string line;
    while (std::getline(in, line)) {
        try {
            auto j = nlohmann::json::parse(line);
            if (!j.is_object() || !j.contains("show_id")) continue;
            auto id = detail::json_id(j["show_id"]);
            if (id) best = std::max(best, std::stol(*id));
        } catch (const std::exception&) {
        }
    }
    return best;
}

/// Downloads shows ids.first..ids.last from a TVmaze-compatible API and
/// appends canonical JSONL records. Resumes after the highest show id already
/// in `output`. Missing shows (404) and shows that keep failing after the
/// retries are skipped with a diagnostic.
inline FetchReport fetch_tvmaze(const FetchOptions& opt, const std::filesystem::path& output,
                                const std::function<void(const std::string&)>& log = {}) {
    FetchReport report;
    std::unique_ptr<httplib::Client> owned;
    try {
        owned = std::make_unique<httplib::Client>(opt.base_url);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("unsupported base URL '" + opt.base_url + "': " + e.what());
    }
    auto& client = *owned;
    if (!client.is_valid()) throw ConfigError("unsupported base URL '" + opt.base_url + "'");
    client.set_connection_timeout(opt.timeout);
    client.set_read_timeout(opt.timeout);
    client.set_follow_location(true);

    report.resumed_after = std::filesystem::exists(output) ? last_fetched_show(output) : 0;
    if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());
    std::ofstream out(output, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot write '" + output.string() + "'");

    auto last_call = std::chrono::steady_clock::now() - opt.min_interval;
    // GET with pacing and retry; nullopt + reason on permanent failure.
    auto get = [&](const std::string& path, std::string& reason) -> std::optional<nlohmann::json> {
        auto wait = opt.backoff;
        for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
            std::this_thread::sleep_until(last_call + opt.min_interval);
            last_call = std::chrono::steady_clock::now();
            auto res = client.Get(path);
            if (res && res->status == 200) {
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::parse_error&) {
                    reason = "invalid JSON from " + path;
                    return std::nullopt;
                }
            }
            if (res && res->status == 404) {
                reason = "not found: " + path;
                return std::nullopt;
            }
            reason = res ? "HTTP " + std::to_string(res->status) + " for " + path
                         : "request failed for " + path + ": " + httplib::to_string(res.error());
            if (attempt < opt.max_retries) {
                if (log) log(reason + ", retrying");
                std::this_thread::sleep_for(wait);
                wait *= 2;
            }
        }
        return std::nullopt;
    };

    const long start = std::max(opt.ids.first, report.resumed_after + 1);
    for (long id = start; id <= opt.ids.last; ++id) {
        std::string reason;
        auto show = get("/shows/" + std::to_string(id), reason);
        std::optional<nlohmann::json> episodes;
        if (show) episodes = get("/shows/" + std::to_string(id) + "/episodes", reason);
        if (!show || !episodes || !show->is_object() || !episodes->is_array()) {
            if (reason.empty()) reason = "unexpected payload for show " + std::to_string(id);
            report.diagnostics.push_back({0, "show " + std::to_string(id) + " skipped: " + reason});
            ++report.shows_skipped;
            continue;
        }
        std::vector<std::string> genres;
        if (auto it = show->find("genres"); it != show->end() && it->is_array()) {
            for (const auto& g : *it) {
                if (g.is_string()) genres.push_back(g.get<std::string>());
            }
        }
        const std::string title = show->value("name", std::string());
        std::string block;
        std::size_t written = 0;
        for (const auto& ep : *episodes) {
            if (!ep.is_object() || !ep.contains("season") || !ep["season"].is_number_integer() ||
                !ep.contains("number") || !ep["number"].is_number_integer()) {
                report.diagnostics.push_back({0, "show " + std::to_string(id) + ": episode without number skipped"});
                continue;
            }
            nlohmann::ordered_json r;
            r["show_id"] = std::to_string(id);
            r["show_title"] = title;
            r["show_genres"] = genres;
            r["season"] = ep["season"];
            r["episode"] = ep["number"];
            r["title"] = ep.value("name", std::string());
            if (ep.contains("summary") && ep["summary"].is_string()) {
                r["description"] = strip_html(ep["summary"].get<std::string>());
            } else {
                r["description"] = nullptr;
            }
            block += r.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
            block += '\n';
            ++written;
        }
        // one write per show keeps the dump resumable at show granularity
        out << block;
        out.flush();
        ++report.shows_written;
        report.episodes_written += written;
        if (log) log("show " + std::to_string(id) + ": " + std::to_string(written) + " episodes");
    }
    return report;
}

}  // namespace plotdyn
