#include <doctest.h>

// Must match the core build's httplib configuration or the linker merges
// incompatible inline definitions.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "persona/errors.hpp"
#include "persona/providers.hpp"
#include "persona/rng.hpp"
#include "persona/storage.hpp"

using namespace persona;
using namespace persona::providers;
using nlohmann::json;

TEST_CASE("request hashes are stable and collision-free across runs and traits") {
    const ProviderRequest base{RequestKind::personality, "some text", 3, 0};
    CHECK(request_hash(base) == request_hash(base));
    CHECK(request_hash(base).size() == 64);

    std::set<std::string> hashes;
    for (int trait = 1; trait <= 5; ++trait)
        for (int run = 0; run < 10; ++run)
            hashes.insert(request_hash({RequestKind::personality, "some text", trait, run}));
    CHECK(hashes.size() == 50); // run_index and trait keep cache entries distinct

    hashes.insert(request_hash({RequestKind::classify, "some text", 0, 0}));
    hashes.insert(request_hash({RequestKind::offense, "some text", 0, 0}));
    CHECK(hashes.size() == 52);
}

TEST_CASE("mock personality provider is a pure function of request and seed") {
    MockPersonalityProvider provider(42);
    const double a = provider.score_personality("hello world", 1, 0);
    CHECK(a == provider.score_personality("hello world", 1, 0));
    CHECK(a >= 1.0);
    CHECK(a < 5.0);
    CHECK(a != provider.score_personality("hello world", 1, 1));
    CHECK(a != provider.score_personality("hello world", 2, 0));

    MockPersonalityProvider other_seed(43);
    CHECK(a != other_seed.score_personality("hello world", 1, 0));

    // Spread check: scores cover the scale rather than clustering.
    Rng rng(1);
    double lo = 5, hi = 1;
    for (int i = 0; i < 200; ++i) {
        const double v = provider.score_personality("text" + std::to_string(i), 1, 0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo < 1.5);
    CHECK(hi > 4.5);
}

TEST_CASE("mock offensiveness scorer keeps benign text below 0.5 and triggers above 0.8") {
    MockOffensivenessScorer scorer(7, {{"grudge", "insult"}, {"wallop", "threat"}});
    SUBCASE("benign text") {
        for (const auto& text : {"a pleasant walk", "compilers are neat", "lunch was fine"}) {
            const auto scores = scorer.score_offense(text);
            CHECK(scores.size() == 6);
            for (const auto& [attr, value] : scores) {
                CHECK(value >= 0.0);
                CHECK(value < 0.5);
            }
        }
    }
    SUBCASE("trigger word raises its attribute and toxicity") {
        const auto scores = scorer.score_offense("holding a grudge against compilers");
        CHECK(scores.at("insult") >= 0.8);
        CHECK(scores.at("toxicity") >= 0.8);
        CHECK(scores.at("threat") < 0.5);

        const auto threat = scorer.score_offense("I will wallop that keyboard");
        CHECK(threat.at("threat") >= 0.8);
        CHECK(threat.at("toxicity") >= 0.8);
    }
    SUBCASE("determinism") {
        CHECK(scorer.score_offense("same text") == scorer.score_offense("same text"));
    }
}

TEST_CASE("replay cache round-trips records and rejects misses") {
    fixtures::TempDir dir("cache");
    const std::string hash = request_hash({RequestKind::personality, "abc", 1, 0});
    {
        ReplayCache cache(dir.path(), CacheMode::record);
        CHECK_FALSE(cache.lookup(hash).has_value());
        cache.store(hash, RequestKind::personality, R"({"trait_index":1})", R"({"score":4.25})");
        // One record per distinct hash: a second store is a no-op.
        cache.store(hash, RequestKind::personality, R"({"trait_index":1})", R"({"score":1.0})");
    }
    {
        ReplayCache cache(dir.path(), CacheMode::replay);
        const auto hit = cache.lookup(hash);
        REQUIRE(hit.has_value());
        CHECK(json::parse(*hit).at("score").get<double>() == 4.25);
    }
    SUBCASE("replay mode requires the directory to exist") {
        CHECK_THROWS_AS(ReplayCache(dir.path() / "missing", CacheMode::replay), ConfigError);
    }
}

TEST_CASE("cached personality provider: record then replay byte-identically, misses name the hash") {
    fixtures::TempDir dir("cache_provider");
    auto cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::record);
    auto inner = std::make_shared<MockPersonalityProvider>(11);
    CachedPersonalityProvider recorder(cache, inner);

    const double recorded = recorder.score_personality("sample", 2, 3);

    auto replay_cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::replay);
    CachedPersonalityProvider replayer(replay_cache, nullptr);
    CHECK(replayer.score_personality("sample", 2, 3) == recorded);

    const std::string missing_hash = request_hash({RequestKind::personality, "sample", 2, 4});
    try {
        replayer.score_personality("sample", 2, 4);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(std::string(e.what()).find(missing_hash) != std::string::npos);
    }
}

TEST_CASE("cached classifier and offense scorer replay recorded responses") {
    fixtures::TempDir dir("cache_more");
    {
        auto cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::record);
        auto classifier = std::make_shared<LexiconClassifier>(
            std::map<std::string, std::string>{{"chess", "/Games/Board Games"}});
        CachedContentClassifier recording(cache, classifier);
        const auto live = recording.classify("weekend chess club");
        REQUIRE(live.size() == 1);

        auto scorer = std::make_shared<MockOffensivenessScorer>(
            5, std::map<std::string, std::string>{});
        CachedOffensivenessScorer recording_scorer(cache, scorer);
        recording_scorer.score_offense("weekend chess club");
    }
    auto cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::replay);
    CachedContentClassifier replay(cache, nullptr);
    const auto categories = replay.classify("weekend chess club");
    REQUIRE(categories.size() == 1);
    CHECK(categories[0].str() == "/Games/Board Games");
    CHECK(categories[0].confidence == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CachedOffensivenessScorer replay_scorer(cache, nullptr);
    const auto scores = replay_scorer.score_offense("weekend chess club");
    CHECK(scores.size() == 6);
}

TEST_CASE("cache records never contain raw text or env secrets") {
    fixtures::TempDir dir("cache_privacy");
    ::setenv("PERSONA_TEST_SECRET", "hunter2-very-secret", 1);
    auto cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::record);
    CachedPersonalityProvider recorder(cache, std::make_shared<MockPersonalityProvider>(3));
    recorder.score_personality("the raw user text", 1, 0);

    for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
        const std::string contents = storage::read_text_file(entry.path());
        CHECK(contents.find("the raw user text") == std::string::npos);
        CHECK(contents.find("hunter2") == std::string::npos);
    }
}

TEST_CASE("parse_first_number handles model-style replies") {
    CHECK(parse_first_number("4") == 4.0);
    CHECK(parse_first_number("Score: 4.5/5") == 4.5);
    CHECK(parse_first_number("I would rate this a 3.25 overall") == 3.25);
    CHECK(parse_first_number("minus -2 is fine") == -2.0);
    CHECK_THROWS_AS(parse_first_number("no digits here"), ProviderError);
}

TEST_CASE("token bucket enforces capacity with an injected clock") {
    auto now = std::chrono::steady_clock::now();
    auto clock = [&now] { return now; };
    TokenBucket bucket(2.0, 1.0, clock);
    CHECK(bucket.try_acquire());
    CHECK(bucket.try_acquire());
    CHECK_FALSE(bucket.try_acquire()); // burst exhausted
    now += std::chrono::milliseconds(1500);
    CHECK(bucket.try_acquire()); // 1.5 tokens refilled
    CHECK_FALSE(bucket.try_acquire());

    TokenBucket unlimited(1.0, 0.0);
    for (int i = 0; i < 100; ++i) CHECK(unlimited.try_acquire());
}

TEST_CASE("http providers against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto body = json::parse(req.body);
        json reply;
        reply["choices"] = json::array();
        reply["choices"].push_back(
            {{"message", {{"content", "Score: 4.5/5 for " + body.value("trait", "?")}}}});
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/classify", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        json reply;
        reply["categories"] = json::array();
        reply["categories"].push_back({{"name", "/Science/Engineering"}, {"confidence", 0.62}});
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/offense", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        json reply;
        for (const auto attr : kOffenseAttributes) {
            std::string upper(attr);
            for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            reply["attributeScores"][upper]["summaryScore"]["value"] = 0.25;
        }
        res.set_content(reply.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    auto stats = std::make_shared<TransportStats>();

    SUBCASE("personality scoring parses the first number") {
        RemoteEndpoint endpoint;
        endpoint.url = base + "/score";
        endpoint.body_template = R"({"trait": "{{trait_name}}", "text": "{{text}}", "run": {{run_index}}})";
        endpoint.response_path = "choices.0.message.content";
        HttpPersonalityProvider provider(endpoint, stats);
        CHECK(provider.score_personality("posts", 3, 1) == 4.5);
        CHECK(stats->requests.load() == 1);
    }
    SUBCASE("classification maps name/confidence entries") {
        RemoteEndpoint endpoint;
        endpoint.url = base + "/classify";
        endpoint.body_template = R"({"text": "{{text}}"})";
        endpoint.response_path = "categories";
        HttpContentClassifier classifier(endpoint, stats);
        const auto categories = classifier.classify("bridge design");
        REQUIRE(categories.size() == 1);
        CHECK(categories[0].str() == "/Science/Engineering");
        CHECK(categories[0].confidence == 0.62);
    }
    SUBCASE("offense extraction resolves each attribute path") {
        RemoteEndpoint endpoint;
        endpoint.url = base + "/offense";
        endpoint.body_template = R"({"comment": {"text": "{{text}}"}})";
        endpoint.attribute_path = "attributeScores.{{attribute}}.summaryScore.value";
        for (const auto attr : kOffenseAttributes) {
            std::string upper(attr);
            for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            endpoint.attribute_wire_names[std::string(attr)] = upper;
        }
        HttpOffensivenessScorer scorer(endpoint, stats);
        const auto scores = scorer.score_offense("hello");
        CHECK(scores.size() == 6);
        for (const auto& [attr, value] : scores) CHECK(value == 0.25);
    }
    SUBCASE("record mode caches, then replay answers with zero network calls") {
        fixtures::TempDir dir("cache_http");
        RemoteEndpoint endpoint;
        endpoint.url = base + "/score";
        endpoint.body_template = R"({"trait": "{{trait_name}}", "text": "{{text}}"})";
        endpoint.response_path = "choices.0.message.content";

        double recorded = 0.0;
        {
            auto cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::record);
            CachedPersonalityProvider recorder(
                cache, std::make_shared<HttpPersonalityProvider>(endpoint, stats));
            recorded = recorder.score_personality("posts", 1, 0);
        }
        const long before = stats->requests.load();
        {
            auto cache = std::make_shared<ReplayCache>(dir.path(), CacheMode::replay);
            CachedPersonalityProvider replayer(cache, nullptr);
            CHECK(replayer.score_personality("posts", 1, 0) == recorded);
        }
        CHECK(stats->requests.load() == before); // no network in replay mode
    }
    SUBCASE("http error surfaces as ProviderError") {
        RemoteEndpoint endpoint;
        endpoint.url = base + "/missing";
        endpoint.body_template = "{}";
        endpoint.response_path = "x";
        HttpPersonalityProvider provider(endpoint, stats);
        CHECK_THROWS_AS(provider.score_personality("posts", 1, 0), ProviderError);
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("extract_json_path errors name the missing path") {
    CHECK(extract_json_path(R"({"a": {"b": [10, 20]}})", "a.b.1") == "20");
    CHECK(extract_json_path(R"({"a": "text"})", "a") == "text");
    CHECK_THROWS_AS(extract_json_path(R"({"a": 1})", "b"), ProviderError);
    CHECK_THROWS_AS(extract_json_path(R"({"a": [1]})", "a.5"), ProviderError);
    CHECK_THROWS_AS(extract_json_path("not json", "a"), ProviderError);
}
