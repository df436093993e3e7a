#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "persona/domain.hpp"
#include "persona/providers.hpp"

namespace persona::personality {

struct InferenceConfig {
    int runs = 10;                 // independent provider runs averaged per trait
    double stddev_threshold = 0.6; // drop when any trait's run stddev exceeds this
    int min_posts = 2;             // drop when fewer nonempty posts than this
    int max_posts = 200;           // cap on posts submitted to the provider
    std::uint64_t rng_seed = 0;    // feeds mock providers
    providers::RetryPolicy retry{};

    void validate() const;
};

struct InferenceAudit {
    std::string user;
    PlatformId platform;
    // Post-clamp scores, per trait (index 0 = openness), runs in order.
    std::array<std::vector<double>, kTraitCount> run_scores;
    int clamp_count = 0;
    std::vector<std::string> clamp_notes; // "extraversion run 3: 7 -> 5"
    int posts_submitted = 0;
};

struct Inference {
    PersonalityVector vector;
    InferenceAudit audit;
};

// Most-recent-first nonempty post texts, capped at max_posts, joined by a
// fixed delimiter line. Exposed because replay cache keys hash this text.
std::string concatenate_posts(const PostCorpus& corpus, int max_posts);

// trait i = mean of `runs` provider scores, run_stddev i = population stddev
// of those scores. Provider outputs outside [1,5] are clamped before
// averaging and noted in the audit.
Inference infer_personality(const PostCorpus& corpus, providers::PersonalityProvider& provider,
                            const InferenceConfig& cfg);

enum class FilterRule { none, stddev, min_posts };
std::string_view filter_rule_name(FilterRule rule);

struct FilterVerdict {
    bool keep = true;
    FilterRule rule = FilterRule::none; // which rule fired when dropped
    std::string reason;
};

FilterVerdict apply_stability_filter(const PersonalityVector& v, const PostCorpus& corpus,
                                     const InferenceConfig& cfg);

enum class FilterMode { none, stddev, posts, both };
FilterMode parse_filter_mode(std::string_view name);
std::string_view filter_mode_name(FilterMode mode);

struct LabeledUser {
    std::string user_key;
    PostCorpus posts;
    TraitVector true_traits{};
};

struct ErrorReport {
    TraitVector rmse{};
    TraitVector mse{};
    TraitVector mae{};
    int n_users = 0;
};

// Infers every labeled user, applies the chosen filter mode, and reports
// per-trait errors over the survivors.
ErrorReport validate_against_labels(const std::vector<LabeledUser>& labeled,
                                    providers::PersonalityProvider& provider,
                                    const InferenceConfig& cfg, FilterMode mode);

} // namespace persona::personality
