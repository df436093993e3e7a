#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "persona/domain.hpp"
#include "persona/providers.hpp"

namespace fixtures {

inline persona::PostCorpus make_corpus(const std::string& user, const std::string& platform,
                                       const std::vector<std::string>& texts) {
    persona::PostCorpus corpus;
    corpus.user = user;
    corpus.platform = persona::PlatformId(platform);
    std::int64_t ts = 1700000000;
    for (const auto& text : texts) {
        persona::Post post;
        post.platform = corpus.platform;
        post.author_key = user;
        post.posted_at = ts;
        ts -= 86400;
        post.text = text;
        corpus.posts.push_back(std::move(post));
    }
    return corpus;
}

// Returns the same score for every trait and run.
class ConstantPersonalityProvider final : public persona::providers::PersonalityProvider {
public:
    explicit ConstantPersonalityProvider(double score) : score_(score) {}
    double score_personality(const std::string&, int, int) override { return score_; }

private:
    double score_;
};

// Scores come from a per-trait table indexed by run; also usable to feed
// out-of-range values for the clamping path.
class TablePersonalityProvider final : public persona::providers::PersonalityProvider {
public:
    explicit TablePersonalityProvider(std::map<int, std::vector<double>> per_trait_runs)
        : table_(std::move(per_trait_runs)) {}
    double score_personality(const std::string&, int trait_index, int run_index) override {
        return table_.at(trait_index).at(static_cast<std::size_t>(run_index));
    }

private:
    std::map<int, std::vector<double>> table_;
};

// Echoes a fixed vector regardless of the text; the perfect predictor when
// fed that vector as the truth.
class EchoPersonalityProvider final : public persona::providers::PersonalityProvider {
public:
    explicit EchoPersonalityProvider(persona::TraitVector traits) : traits_(traits) {}
    double score_personality(const std::string&, int trait_index, int) override {
        return traits_[static_cast<std::size_t>(trait_index - 1)];
    }

private:
    persona::TraitVector traits_;
};

// Fails the first `failures` calls, then succeeds with the given score.
class FlakyPersonalityProvider final : public persona::providers::PersonalityProvider {
public:
    FlakyPersonalityProvider(int failures, double score) : failures_(failures), score_(score) {}
    double score_personality(const std::string&, int, int) override {
        if (calls_++ < failures_) throw persona::ProviderError("synthetic failure");
        return score_;
    }
    int calls() const { return calls_; }

private:
    int failures_;
    double score_;
    int calls_ = 0;
};

// Per-text attribute scores from a table; unknown text throws.
class TableOffenseScorer final : public persona::providers::OffensivenessScorer {
public:
    explicit TableOffenseScorer(std::map<std::string, std::map<std::string, double>> by_text,
                                std::size_t limit = 20480)
        : by_text_(std::move(by_text)), limit_(limit) {}
    std::map<std::string, double> score_offense(const std::string& text) override {
        const auto it = by_text_.find(text);
        if (it == by_text_.end()) throw persona::ProviderError("no scripted score for text");
        auto scores = it->second;
        for (const auto attr : persona::kOffenseAttributes)
            scores.try_emplace(std::string(attr), 0.0);
        return scores;
    }
    std::size_t request_text_limit() const override { return limit_; }

private:
    std::map<std::string, std::map<std::string, double>> by_text_;
    std::size_t limit_;
};

// Unique temp directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("persona_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter_++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

} // namespace fixtures
