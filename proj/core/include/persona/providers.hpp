#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "persona/domain.hpp"
#include "persona/errors.hpp"

namespace persona::providers {

std::string sha256_hex(std::string_view bytes);

enum class RequestKind { personality, classify, offense };
std::string_view kind_name(RequestKind kind);

struct ProviderRequest {
    RequestKind kind;
    std::string text;
    int trait_index = 0; // 1..5 for personality requests, 0 otherwise
    int run_index = 0;   // distinguishes repeated runs over identical text
};

// SHA-256 of kind|trait|run|text with 0x1f separators. run_index is part of
// the key so repeated runs stay distinct cache entries.
std::string request_hash(const ProviderRequest& request);

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_backoff{250};
};

// Runs fn, retrying on ProviderError with exponential backoff.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& fn) -> decltype(fn()) {
    const int attempts = policy.attempts < 1 ? 1 : policy.attempts;
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const ProviderError&) {
            if (attempt + 1 >= attempts) throw;
            if (policy.base_backoff.count() > 0)
                std::this_thread::sleep_for(policy.base_backoff * (1 << attempt));
        }
    }
}

class PersonalityProvider {
public:
    virtual ~PersonalityProvider() = default;
    // Score for one OCEAN trait (1..5 index) over the submitted text.
    virtual double score_personality(const std::string& text, int trait_index, int run_index) = 0;
    virtual int max_in_flight() const { return 0; } // 0 = unbounded
};

class ContentClassifier {
public:
    virtual ~ContentClassifier() = default;
    virtual CategorySet classify(const std::string& text) = 0;
    virtual int max_in_flight() const { return 0; }
};

class OffensivenessScorer {
public:
    virtual ~OffensivenessScorer() = default;
    // All six attributes present, each in [0, 1].
    virtual std::map<std::string, double> score_offense(const std::string& text) = 0;
    virtual std::size_t request_text_limit() const { return 20480; }
    virtual int max_in_flight() const { return 0; }
};

// ---------------------------------------------------------------------------
// Deterministic mocks: pure functions of (request_hash, seed).

class MockPersonalityProvider final : public PersonalityProvider {
public:
    explicit MockPersonalityProvider(std::uint64_t seed) : seed_(seed) {}
    double score_personality(const std::string& text, int trait_index, int run_index) override;

private:
    std::uint64_t seed_;
};

// Keyword lexicon: term -> category path. Confidence of a returned path is
// the share of text tokens matched by that path's terms.
class LexiconClassifier final : public ContentClassifier {
public:
    explicit LexiconClassifier(std::map<std::string, std::string> term_to_path);
    static LexiconClassifier from_file(const std::filesystem::path& path);
    CategorySet classify(const std::string& text) override;

private:
    std::map<std::string, std::string> term_to_path_;
};

// Hash-derived attribute scores below 0.5 for benign text; a trigger word
// forces its mapped attribute (and toxicity) to at least 0.8.
class MockOffensivenessScorer final : public OffensivenessScorer {
public:
    MockOffensivenessScorer(std::uint64_t seed, std::map<std::string, std::string> trigger_to_attribute);
    static MockOffensivenessScorer from_file(std::uint64_t seed, const std::filesystem::path& path);
    std::map<std::string, double> score_offense(const std::string& text) override;

private:
    std::uint64_t seed_;
    std::map<std::string, std::string> trigger_to_attribute_;
};

// ---------------------------------------------------------------------------
// Record/replay cache. One JSON record per request hash; writes are atomic
// (temp file + rename) so concurrent recording is safe.

enum class CacheMode { record, replay, passthrough };

class ReplayCache {
public:
    ReplayCache(std::filesystem::path directory, CacheMode mode);

    CacheMode mode() const { return mode_; }
    const std::filesystem::path& directory() const { return directory_; }

    // Canonical response payload for the hash, if recorded.
    std::optional<std::string> lookup(const std::string& hash) const;
    void store(const std::string& hash, RequestKind kind, const std::string& request_meta_json,
               const std::string& response_json) const;

private:
    std::filesystem::path record_path(const std::string& hash) const;

    std::filesystem::path directory_;
    CacheMode mode_;
};

// Decorators wiring a cache around an inner provider. In replay mode the
// inner provider may be null; a cache miss is an error naming the hash.
class CachedPersonalityProvider final : public PersonalityProvider {
public:
    CachedPersonalityProvider(std::shared_ptr<ReplayCache> cache,
                              std::shared_ptr<PersonalityProvider> inner);
    double score_personality(const std::string& text, int trait_index, int run_index) override;
    int max_in_flight() const override;

private:
    std::shared_ptr<ReplayCache> cache_;
    std::shared_ptr<PersonalityProvider> inner_;
};

class CachedContentClassifier final : public ContentClassifier {
public:
    CachedContentClassifier(std::shared_ptr<ReplayCache> cache,
                            std::shared_ptr<ContentClassifier> inner);
    CategorySet classify(const std::string& text) override;
    int max_in_flight() const override;

private:
    std::shared_ptr<ReplayCache> cache_;
    std::shared_ptr<ContentClassifier> inner_;
};

class CachedOffensivenessScorer final : public OffensivenessScorer {
public:
    CachedOffensivenessScorer(std::shared_ptr<ReplayCache> cache,
                              std::shared_ptr<OffensivenessScorer> inner);
    std::map<std::string, double> score_offense(const std::string& text) override;
    std::size_t request_text_limit() const override;
    int max_in_flight() const override;

private:
    std::shared_ptr<ReplayCache> cache_;
    std::shared_ptr<OffensivenessScorer> inner_;
};

// ---------------------------------------------------------------------------
// Remote HTTP providers.

// Counts actual network operations; tests assert it stays zero in replay mode.
struct TransportStats {
    std::atomic<long> requests{0};
};

class TokenBucket {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    // rate_per_second <= 0 disables limiting.
    TokenBucket(double capacity, double rate_per_second, Clock clock = nullptr);

    bool try_acquire();
    // Blocks (sleeping) until a token is available.
    void acquire();

private:
    void refill();

    double capacity_;
    double rate_;
    double tokens_;
    Clock clock_;
    std::chrono::steady_clock::time_point last_refill_;
    std::mutex mutex_;
};

struct RemoteEndpoint {
    std::string url; // http(s)://host[:port]/path
    // Header values may reference environment variables as ${VAR}; expansion
    // happens at send time and the expanded value is never logged or cached.
    std::vector<std::pair<std::string, std::string>> headers;
    // Body template; placeholders: {{text}}, {{trait_name}}, {{trait_index}},
    // {{run_index}}, {{attribute}}.
    std::string body_template;
    // Dotted path to the scored field in the JSON reply, e.g.
    // "choices.0.message.content". Offense replies are addressed per attribute
    // via attribute_path with an {{attribute}} placeholder.
    std::string response_path;
    std::string attribute_path;
    std::map<std::string, std::string> attribute_wire_names;
    double requests_per_second = 0.0;
    int max_in_flight = 4;
    int timeout_seconds = 30;
};

// First number in a model reply: "Score: 4.5/5" -> 4.5. Throws ProviderError
// when no number is present.
double parse_first_number(const std::string& reply);

class HttpPersonalityProvider final : public PersonalityProvider {
public:
    HttpPersonalityProvider(RemoteEndpoint endpoint, std::shared_ptr<TransportStats> stats);
    double score_personality(const std::string& text, int trait_index, int run_index) override;
    int max_in_flight() const override { return endpoint_.max_in_flight; }

private:
    RemoteEndpoint endpoint_;
    std::shared_ptr<TransportStats> stats_;
    std::shared_ptr<TokenBucket> bucket_;
};

class HttpContentClassifier final : public ContentClassifier {
public:
    HttpContentClassifier(RemoteEndpoint endpoint, std::shared_ptr<TransportStats> stats);
    CategorySet classify(const std::string& text) override;
    int max_in_flight() const override { return endpoint_.max_in_flight; }

private:
    RemoteEndpoint endpoint_;
    std::shared_ptr<TransportStats> stats_;
    std::shared_ptr<TokenBucket> bucket_;
};

class HttpOffensivenessScorer final : public OffensivenessScorer {
public:
    HttpOffensivenessScorer(RemoteEndpoint endpoint, std::shared_ptr<TransportStats> stats);
    std::map<std::string, double> score_offense(const std::string& text) override;
    int max_in_flight() const override { return endpoint_.max_in_flight; }

private:
    RemoteEndpoint endpoint_;
    std::shared_ptr<TransportStats> stats_;
    std::shared_ptr<TokenBucket> bucket_;
};

// Shared by the HTTP providers and their tests: POST body to url, return the
// reply body. Increments stats.requests.
std::string http_post_json(const RemoteEndpoint& endpoint, const std::string& body,
                           TransportStats& stats);

// Extracts a dotted path ("a.0.b") from a JSON document; throws ProviderError
// when the path is missing. Returns the raw text for strings, the numeric
// literal otherwise.
std::string extract_json_path(const std::string& json_text, const std::string& dotted_path);

} // namespace persona::providers
