#include "persona/providers.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "persona/rng.hpp"
#include "persona/text.hpp"

using nlohmann::json;

namespace persona::providers {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char b : digest) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

std::string_view kind_name(RequestKind kind) {
    switch (kind) {
        case RequestKind::personality: return "personality";
        case RequestKind::classify: return "classify";
        case RequestKind::offense: return "offense";
    }
    throw StructuralError("unknown request kind");
}

std::string request_hash(const ProviderRequest& request) {
    std::string preimage;
    preimage += kind_name(request.kind);
    preimage += '\x1f';
    preimage += std::to_string(request.trait_index);
    preimage += '\x1f';
    preimage += std::to_string(request.run_index);
    preimage += '\x1f';
    preimage += request.text;
    return sha256_hex(preimage);
}

namespace {

// Uniform [0,1) derived from a request hash and a seed; the only randomness
// source the mocks use.
double hash01(const std::string& request_hash_hex, std::uint64_t seed, std::string_view salt) {
    std::string preimage = request_hash_hex;
    preimage += ':';
    preimage += std::to_string(seed);
    if (!salt.empty()) {
        preimage += ':';
        preimage += salt;
    }
    const std::string digest = sha256_hex(preimage);
    std::uint64_t v = 0;
    for (int i = 0; i < 16; ++i) {
        const char c = digest[static_cast<std::size_t>(i)];
        v = (v << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
    }
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

} // namespace

double MockPersonalityProvider::score_personality(const std::string& text, int trait_index,
                                                  int run_index) {
    const ProviderRequest req{RequestKind::personality, text, trait_index, run_index};
    return 1.0 + 4.0 * hash01(request_hash(req), seed_, "");
}

LexiconClassifier::LexiconClassifier(std::map<std::string, std::string> term_to_path)
    : term_to_path_(std::move(term_to_path)) {}

LexiconClassifier LexiconClassifier::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open classifier lexicon: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed lexicon file " + path.string() + ": " + e.what());
    }
    std::map<std::string, std::string> terms;
    for (const auto& [term, target] : doc.items())
        terms[text::to_lower(term)] = target.get<std::string>();
    return LexiconClassifier(std::move(terms));
}

CategorySet LexiconClassifier::classify(const std::string& raw) {
    const auto tokens = text::tokenize_words(raw);
    if (tokens.empty()) return {};
    std::string joined;
    for (const auto& t : tokens) {
        if (!joined.empty()) joined.push_back(' ');
        joined += t;
    }
    joined = " " + joined + " ";

    std::map<std::string, std::size_t> matched_tokens_per_path;
    for (const auto& [term, path] : term_to_path_) {
        std::size_t occurrences = 0;
        const std::string needle = " " + term + " ";
        for (std::size_t pos = joined.find(needle); pos != std::string::npos;
             pos = joined.find(needle, pos + 1))
            ++occurrences;
        if (occurrences == 0) continue;
        const std::size_t term_tokens = text::tokenize_words(term).size();
        matched_tokens_per_path[path] += occurrences * term_tokens;
    }

    std::vector<CategoryPath> out;
    for (const auto& [path, matched] : matched_tokens_per_path) {
        const double confidence =
            std::min(1.0, static_cast<double>(matched) / static_cast<double>(tokens.size()));
        out.push_back(CategoryPath::parse(path, confidence));
    }
    return make_category_set(std::move(out));
}

MockOffensivenessScorer::MockOffensivenessScorer(std::uint64_t seed,
                                                 std::map<std::string, std::string> triggers)
    : seed_(seed), trigger_to_attribute_(std::move(triggers)) {}

MockOffensivenessScorer MockOffensivenessScorer::from_file(std::uint64_t seed,
                                                           const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open offense trigger lexicon: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed trigger lexicon " + path.string() + ": " + e.what());
    }
    std::map<std::string, std::string> triggers;
    for (const auto& [term, attribute] : doc.items()) {
        const std::string attr = attribute.get<std::string>();
        if (std::find(kOffenseAttributes.begin(), kOffenseAttributes.end(), attr) ==
            kOffenseAttributes.end())
            throw DataError("trigger lexicon maps '" + term + "' to unknown attribute '" + attr + "'");
        triggers[text::to_lower(term)] = attr;
    }
    return MockOffensivenessScorer(seed, std::move(triggers));
}

std::map<std::string, double> MockOffensivenessScorer::score_offense(const std::string& raw) {
    const ProviderRequest req{RequestKind::offense, raw, 0, 0};
    const std::string hash = request_hash(req);

    const auto tokens = text::tokenize_words(raw);
    std::string joined = " ";
    for (const auto& t : tokens) {
        joined += t;
        joined.push_back(' ');
    }
    std::map<std::string, bool> triggered;
    for (const auto& [term, attribute] : trigger_to_attribute_)
        if (joined.find(" " + term + " ") != std::string::npos) triggered[attribute] = true;

    std::map<std::string, double> scores;
    for (const auto attr : kOffenseAttributes) {
        const std::string name(attr);
        const double u = hash01(hash, seed_, name);
        const bool hot = triggered.contains(name) || (name == "toxicity" && !triggered.empty());
        scores[name] = hot ? 0.8 + 0.2 * u : 0.5 * u;
    }
    return scores;
}

// ---------------------------------------------------------------------------

ReplayCache::ReplayCache(std::filesystem::path directory, CacheMode mode)
    : directory_(std::move(directory)), mode_(mode) {
    if (mode_ == CacheMode::record) {
        std::filesystem::create_directories(directory_);
    } else if (mode_ == CacheMode::replay && !std::filesystem::is_directory(directory_)) {
        throw ConfigError("replay cache directory does not exist: " + directory_.string());
    }
}

std::filesystem::path ReplayCache::record_path(const std::string& hash) const {
    return directory_ / (hash + ".json");
}

std::optional<std::string> ReplayCache::lookup(const std::string& hash) const {
    std::ifstream in(record_path(hash));
    if (!in) return std::nullopt;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("corrupt cache record " + record_path(hash).string() + ": " + e.what());
    }
    if (!doc.contains("response")) throw DataError("cache record missing response: " + hash);
    return doc["response"].dump();
}

void ReplayCache::store(const std::string& hash, RequestKind kind,
                        const std::string& request_meta_json,
                        const std::string& response_json) const {
    const auto path = record_path(hash);
    if (std::filesystem::exists(path)) return; // one record per distinct hash
    json doc;
    doc["hash"] = hash;
    doc["kind"] = std::string(kind_name(kind));
    doc["request_meta"] = json::parse(request_meta_json);
    doc["response"] = json::parse(response_json);
    doc["recorded_at"] = text::format_iso8601(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw DataError("cannot write cache record: " + tmp);
        out << doc.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string personality_meta(const std::string& text, int trait_index, int run_index) {
    json meta;
    meta["trait_index"] = trait_index;
    meta["run_index"] = run_index;
    meta["text_sha256"] = sha256_hex(text);
    meta["text_chars"] = text.size();
    return meta.dump();
}

std::string plain_meta(const std::string& text) {
    json meta;
    meta["text_sha256"] = sha256_hex(text);
    meta["text_chars"] = text.size();
    return meta.dump();
}

[[noreturn]] void throw_cache_miss(const std::string& hash) {
    throw ProviderError("replay cache has no record for request hash " + hash);
}

} // namespace

CachedPersonalityProvider::CachedPersonalityProvider(std::shared_ptr<ReplayCache> cache,
                                                     std::shared_ptr<PersonalityProvider> inner)
    : cache_(std::move(cache)), inner_(std::move(inner)) {}

double CachedPersonalityProvider::score_personality(const std::string& text, int trait_index,
                                                    int run_index) {
    const std::string hash =
        request_hash({RequestKind::personality, text, trait_index, run_index});
    if (cache_->mode() != CacheMode::passthrough) {
        if (const auto hit = cache_->lookup(hash)) {
            const json doc = json::parse(*hit);
            return doc.at("score").get<double>();
        }
        if (cache_->mode() == CacheMode::replay) throw_cache_miss(hash);
    }
    if (!inner_) throw ProviderError("no live personality provider configured");
    const double score = inner_->score_personality(text, trait_index, run_index);
    if (cache_->mode() == CacheMode::record) {
        json response;
        response["score"] = score;
        cache_->store(hash, RequestKind::personality, personality_meta(text, trait_index, run_index),
                      response.dump());
    }
    return score;
}

int CachedPersonalityProvider::max_in_flight() const {
    return inner_ ? inner_->max_in_flight() : 0;
}

CachedContentClassifier::CachedContentClassifier(std::shared_ptr<ReplayCache> cache,
                                                 std::shared_ptr<ContentClassifier> inner)
    : cache_(std::move(cache)), inner_(std::move(inner)) {}

CategorySet CachedContentClassifier::classify(const std::string& text) {
    const std::string hash = request_hash({RequestKind::classify, text, 0, 0});
    if (cache_->mode() != CacheMode::passthrough) {
        if (const auto hit = cache_->lookup(hash)) {
            const json doc = json::parse(*hit);
            std::vector<CategoryPath> paths;
            for (const auto& entry : doc.at("categories"))
                paths.push_back(CategoryPath::parse(entry.at("path").get<std::string>(),
                                                    entry.at("confidence").get<double>()));
            return make_category_set(std::move(paths));
        }
        if (cache_->mode() == CacheMode::replay) throw_cache_miss(hash);
    }
    if (!inner_) throw ProviderError("no live content classifier configured");
    CategorySet categories = inner_->classify(text);
    if (cache_->mode() == CacheMode::record) {
        json response;
        response["categories"] = json::array();
        for (const auto& c : categories)
            response["categories"].push_back({{"path", c.str()}, {"confidence", c.confidence}});
        cache_->store(hash, RequestKind::classify, plain_meta(text), response.dump());
    }
    return categories;
}

int CachedContentClassifier::max_in_flight() const { return inner_ ? inner_->max_in_flight() : 0; }

CachedOffensivenessScorer::CachedOffensivenessScorer(std::shared_ptr<ReplayCache> cache,
                                                     std::shared_ptr<OffensivenessScorer> inner)
    : cache_(std::move(cache)), inner_(std::move(inner)) {}

std::map<std::string, double> CachedOffensivenessScorer::score_offense(const std::string& text) {
    const std::string hash = request_hash({RequestKind::offense, text, 0, 0});
    if (cache_->mode() != CacheMode::passthrough) {
        if (const auto hit = cache_->lookup(hash)) {
            const json doc = json::parse(*hit);
            std::map<std::string, double> scores;
            for (const auto& [attr, value] : doc.at("attributes").items())
                scores[attr] = value.get<double>();
            return scores;
        }
        if (cache_->mode() == CacheMode::replay) throw_cache_miss(hash);
    }
    if (!inner_) throw ProviderError("no live offensiveness scorer configured");
    auto scores = inner_->score_offense(text);
    if (cache_->mode() == CacheMode::record) {
        json response;
        response["attributes"] = scores;
        cache_->store(hash, RequestKind::offense, plain_meta(text), response.dump());
    }
    return scores;
}

std::size_t CachedOffensivenessScorer::request_text_limit() const {
    return inner_ ? inner_->request_text_limit() : OffensivenessScorer::request_text_limit();
}

int CachedOffensivenessScorer::max_in_flight() const {
    return inner_ ? inner_->max_in_flight() : 0;
}

// ---------------------------------------------------------------------------

TokenBucket::TokenBucket(double capacity, double rate_per_second, Clock clock)
    : capacity_(capacity), rate_(rate_per_second), tokens_(capacity),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      last_refill_(clock_()) {}

void TokenBucket::refill() {
    const auto now = clock_();
    const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
    last_refill_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
}

bool TokenBucket::try_acquire() {
    if (rate_ <= 0.0) return true;
    std::lock_guard lock(mutex_);
    refill();
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return true;
    }
    return false;
}

void TokenBucket::acquire() {
    if (rate_ <= 0.0) return;
    while (!try_acquire()) {
        double deficit;
        {
            std::lock_guard lock(mutex_);
            deficit = 1.0 - tokens_;
        }
        const auto wait = std::chrono::duration<double>(std::max(deficit, 0.01) / rate_);
        std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(wait));
    }
}

double parse_first_number(const std::string& reply) {
    const char* s = reply.c_str();
    const char* end = s + reply.size();
    for (const char* p = s; p < end; ++p) {
        if (std::isdigit(static_cast<unsigned char>(*p)) ||
            ((*p == '-' || *p == '+') && p + 1 < end && std::isdigit(static_cast<unsigned char>(p[1])))) {
            char* after = nullptr;
            const double value = std::strtod(p, &after);
            if (after != p) return value;
        }
    }
    throw ProviderError("no numeric score in provider reply: '" + reply + "'");
}

} // namespace persona::providers
