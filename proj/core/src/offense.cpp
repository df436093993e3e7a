#include "persona/offense.hpp"

#include <algorithm>

#include "persona/errors.hpp"

namespace persona::offense {

void OffenseConfig::validate() const {
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("offense threshold must lie in [0, 1]");
}

std::vector<std::string> split_into_chunks(const std::string& text, std::size_t limit) {
    if (limit == 0 || text.size() <= limit) return {text};

    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.' || c == '!' || c == '?' || c == '\n') {
            sentences.push_back(text.substr(start, i - start + 1));
            start = i + 1;
        }
    }
    if (start < text.size()) sentences.push_back(text.substr(start));

    std::vector<std::string> chunks;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            chunks.push_back(std::move(current));
            current.clear();
        }
    };
    for (auto& sentence : sentences) {
        if (sentence.size() > limit) {
            // A single sentence beyond the wire limit gets hard-split.
            flush();
            for (std::size_t pos = 0; pos < sentence.size(); pos += limit)
                chunks.push_back(sentence.substr(pos, limit));
            continue;
        }
        if (current.size() + sentence.size() > limit) flush();
        current += sentence;
    }
    flush();
    return chunks;
}

ScoreOutcome score_offensiveness(const PostCorpus& corpus, providers::OffensivenessScorer& scorer,
                                 const providers::RetryPolicy& retry) {
    if (corpus.posts.empty())
        throw DataError("cannot score offensiveness of an empty corpus for '" + corpus.user + "'");

    ScoreOutcome outcome;
    outcome.scores = OffenseScores::zeros();
    const std::size_t limit = scorer.request_text_limit();

    for (std::size_t post_index = 0; post_index < corpus.posts.size(); ++post_index) {
        const auto& post = corpus.posts[post_index];
        if (post.text.empty()) continue;
        std::map<std::string, double> post_max;
        bool failed = false;
        for (const auto& chunk : split_into_chunks(post.text, limit)) {
            std::map<std::string, double> scores;
            try {
                scores = providers::with_retries(retry, [&] { return scorer.score_offense(chunk); });
            } catch (const ProviderError&) {
                failed = true;
                break;
            }
            for (const auto attr : kOffenseAttributes) {
                const std::string name(attr);
                const auto it = scores.find(name);
                if (it == scores.end())
                    throw ProviderError("offensiveness reply missing attribute '" + name + "'");
                auto [entry, inserted] = post_max.try_emplace(name, it->second);
                if (!inserted) entry->second = std::max(entry->second, it->second);
            }
        }
        if (failed) {
            ++outcome.scores.n_posts_failed;
            continue;
        }
        ++outcome.scores.n_posts_scored;
        for (const auto& [attribute, score] : post_max) {
            auto& best = outcome.scores.attribute_max[attribute];
            best = std::max(best, score);
            outcome.audit.push_back({corpus.user, corpus.platform, static_cast<int>(post_index),
                                     attribute, score});
        }
    }

    if (outcome.scores.n_posts_scored == 0) {
        if (outcome.scores.n_posts_failed > 0)
            throw ProviderError("all " + std::to_string(outcome.scores.n_posts_failed) +
                                " posts failed offensiveness scoring for '" + corpus.user + "'");
        throw DataError("corpus for '" + corpus.user + "' has no nonempty posts to score");
    }
    return outcome;
}

bool classify_offensive(const OffenseScores& scores, const OffenseConfig& cfg) {
    cfg.validate();
    for (const auto& [attribute, value] : scores.attribute_max)
        if (value >= cfg.threshold) return true;
    return false;
}

} // namespace persona::offense
