#include <atomic>
#include <thread>

#include <catch_amalgamated.hpp>

#include "plotdyn/corpus.hpp"
#include "plotdyn/tvmaze.hpp"
#include "support.hpp"

using namespace plotdyn;

namespace {

// Serves shows 1..4: 2 is missing, 3 fails twice with 500 before answering.
class MockApi {
public:
    MockApi() {
        server_.Get(R"(/shows/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            const int id = std::stoi(req.matches[1]);
            ++calls_;
            if (id == 2) {
                res.status = 404;
                return;
            }
            if (id == 3 && failures_++ < 2) {
                res.status = 500;
                return;
            }
            nlohmann::json show{{"id", id}, {"name", "Show " + std::to_string(id)}, {"genres", {"Drama", "Crime"}}};
            res.set_content(show.dump(), "application/json");
        });
        server_.Get(R"(/shows/(\d+)/episodes)", [this](const httplib::Request& req, httplib::Response& res) {
            const int id = std::stoi(req.matches[1]);
            ++calls_;
            nlohmann::json eps = nlohmann::json::array();
            for (int s = 1; s <= 2; ++s) {
                for (int e = 1; e <= 3; ++e) {
                    eps.push_back({{"season", s},
                                   {"number", e},
                                   {"name", "Ep"},
                                   {"summary", "<p>Show " + std::to_string(id) + " &amp; friends, part " +
                                                   std::to_string(e) + ".</p>"}});
                }
            }
            eps.push_back({{"season", 3}, {"number", nullptr}, {"name", "Special"}});
            res.set_content(eps.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockApi() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int calls() const { return calls_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> calls_{0};
    std::atomic<int> failures_{0};
};

FetchOptions options(const std::string& url, long last) {
    FetchOptions o;
    o.base_url = url;
    o.ids = {1, last};
    o.min_interval = std::chrono::milliseconds(1);
    o.backoff = std::chrono::milliseconds(5);
    o.timeout = std::chrono::seconds(5);
    return o;
}

}  // namespace

TEST_CASE("strip_html") {
    CHECK(strip_html("<p>Tom &amp; Jerry&#39;s <b>big</b>   day</p>") == "Tom & Jerry's big day");
    CHECK(strip_html("") == "");
}

TEST_CASE("id ranges") {
    CHECK(IdRange::parse("3..9").first == 3);
    CHECK(IdRange::parse("3..9").last == 9);
    CHECK(IdRange::parse("7").last == 7);
    CHECK_THROWS_AS(IdRange::parse("9..3"), ConfigError);
    CHECK_THROWS_AS(IdRange::parse("0..3"), ConfigError);
    CHECK_THROWS_AS(IdRange::parse("a..b"), ConfigError);
}

TEST_CASE("fetch against a local API") {
    MockApi api;
    testing::TempDir dir;
    const auto out = dir / "dump.jsonl";

    auto report = fetch_tvmaze(options(api.url(), 3), out);
    CHECK(report.resumed_after == 0);
    CHECK(report.shows_written == 2);
    CHECK(report.shows_skipped == 1);
    CHECK(report.episodes_written == 12);

    auto loaded = load_corpus(out);
    CHECK(loaded.corpus.shows().size() == 2);
    CHECK(loaded.corpus.seasons().size() == 4);
    const auto& ep = loaded.corpus.seasons().front().episodes.front();
    CHECK(ep.description == "Show 1 & friends, part 1.");

    SECTION("resume continues after the last complete show") {
        const int before = api.calls();
        auto more = fetch_tvmaze(options(api.url(), 4), out);
        CHECK(more.resumed_after == 3);
        CHECK(more.shows_written == 1);
        CHECK(api.calls() - before == 2);
        CHECK(load_corpus(out).corpus.shows().size() == 3);
    }
    SECTION("retries give up after the limit") {
        MockApi fresh;
        auto o = options(fresh.url(), 3);
        o.ids.first = 3;
        o.max_retries = 1;
        auto r = fetch_tvmaze(o, dir / "other.jsonl");
        CHECK(r.shows_skipped == 1);
        CHECK(r.shows_written == 0);
    }
}

TEST_CASE("unreachable server is skipped per show") {
    testing::TempDir dir;
    auto o = options("http://127.0.0.1:1", 1);
    o.max_retries = 0;
    const auto r = fetch_tvmaze(o, dir / "x.jsonl");
    CHECK(r.shows_skipped == 1);
    CHECK_THROWS_AS(fetch_tvmaze(options("ftp://nowhere", 1), dir / "y.jsonl"), ConfigError);
}
