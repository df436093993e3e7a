#include "persona/personality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "persona/errors.hpp"
#include "persona/text.hpp"

namespace persona::personality {

namespace {
constexpr std::string_view kPostDelimiter = "\n---\n";
}

void InferenceConfig::validate() const {
    if (runs < 1) throw ConfigError("inference.runs must be at least 1");
    if (stddev_threshold < 0.0) throw ConfigError("inference.stddev_threshold must be >= 0");
    if (min_posts < 0) throw ConfigError("inference.min_posts must be >= 0");
    if (max_posts < 1) throw ConfigError("inference.max_posts must be at least 1");
}

std::string concatenate_posts(const PostCorpus& corpus, int max_posts) {
    std::string out;
    int used = 0;
    for (const auto& post : corpus.posts) {
        if (post.text.empty()) continue;
        if (used == max_posts) break;
        if (used > 0) out += kPostDelimiter;
        out += post.text;
        ++used;
    }
    return out;
}

Inference infer_personality(const PostCorpus& corpus, providers::PersonalityProvider& provider,
                            const InferenceConfig& cfg) {
    cfg.validate();
    if (corpus.nonempty_count() == 0)
        throw DataError("cannot infer personality for '" + corpus.user + "' on " +
                        corpus.platform.name + ": corpus has no nonempty posts");

    const std::string text = concatenate_posts(corpus, cfg.max_posts);

    Inference result;
    result.audit.user = corpus.user;
    result.audit.platform = corpus.platform;
    result.audit.posts_submitted = std::min(corpus.nonempty_count(), cfg.max_posts);
    result.vector.runs = cfg.runs;

    for (int trait = 1; trait <= kTraitCount; ++trait) {
        const auto idx = static_cast<std::size_t>(trait - 1);
        auto& scores = result.audit.run_scores[idx];
        scores.reserve(static_cast<std::size_t>(cfg.runs));
        for (int run = 0; run < cfg.runs; ++run) {
            double raw;
            try {
                raw = providers::with_retries(cfg.retry, [&] {
                    return provider.score_personality(text, trait, run);
                });
            } catch (const ProviderError& e) {
                throw ProviderError("personality run " + std::to_string(run) + " for trait " +
                                    std::string(trait_name(trait)) + " of '" + corpus.user +
                                    "' failed: " + e.what());
            }
            double score = std::clamp(raw, 1.0, 5.0);
            if (score != raw) {
                ++result.audit.clamp_count;
                result.audit.clamp_notes.push_back(std::string(trait_name(trait)) + " run " +
                                                   std::to_string(run) + ": " +
                                                   text::format_sig6(raw) + " -> " +
                                                   text::format_sig6(score));
            }
            scores.push_back(score);
        }
        const bool all_equal =
            std::all_of(scores.begin(), scores.end(), [&](double s) { return s == scores[0]; });
        if (all_equal) {
            // Keeps "sigma == 0 iff all runs agree" exact; the summed mean can
            // be off by an ulp when runs * score is not representable.
            result.vector.traits[idx] = scores[0];
            result.vector.run_stddev[idx] = 0.0;
            continue;
        }
        double sum = 0.0;
        for (const double s : scores) sum += s;
        const double mean = sum / static_cast<double>(cfg.runs);
        double sq = 0.0;
        for (const double s : scores) sq += (s - mean) * (s - mean);
        result.vector.traits[idx] = mean;
        // Population stddev: the runs are the whole population, not a sample.
        result.vector.run_stddev[idx] = std::sqrt(sq / static_cast<double>(cfg.runs));
    }
    return result;
}

std::string_view filter_rule_name(FilterRule rule) {
    switch (rule) {
        case FilterRule::none: return "none";
        case FilterRule::stddev: return "stddev";
        case FilterRule::min_posts: return "min_posts";
    }
    throw StructuralError("unknown filter rule");
}

FilterVerdict apply_stability_filter(const PersonalityVector& v, const PostCorpus& corpus,
                                     const InferenceConfig& cfg) {
    for (int i = 0; i < kTraitCount; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (v.run_stddev[idx] > cfg.stddev_threshold) {
            FilterVerdict verdict;
            verdict.keep = false;
            verdict.rule = FilterRule::stddev;
            verdict.reason = std::string(trait_name(i + 1)) + " run stddev " +
                             text::format_sig6(v.run_stddev[idx]) + " exceeds " +
                             text::format_sig6(cfg.stddev_threshold);
            return verdict;
        }
    }
    if (corpus.nonempty_count() < cfg.min_posts) {
        FilterVerdict verdict;
        verdict.keep = false;
        verdict.rule = FilterRule::min_posts;
        verdict.reason = std::to_string(corpus.nonempty_count()) + " posts, need at least " +
                         std::to_string(cfg.min_posts);
        return verdict;
    }
    return {};
}

FilterMode parse_filter_mode(std::string_view name) {
    if (name == "none") return FilterMode::none;
    if (name == "stddev") return FilterMode::stddev;
    if (name == "posts") return FilterMode::posts;
    if (name == "both") return FilterMode::both;
    throw ConfigError("unknown filter mode: '" + std::string(name) + "'");
}

std::string_view filter_mode_name(FilterMode mode) {
    switch (mode) {
        case FilterMode::none: return "none";
        case FilterMode::stddev: return "stddev";
        case FilterMode::posts: return "posts";
        case FilterMode::both: return "both";
    }
    throw StructuralError("unknown filter mode");
}

ErrorReport validate_against_labels(const std::vector<LabeledUser>& labeled,
                                    providers::PersonalityProvider& provider,
                                    const InferenceConfig& cfg, FilterMode mode) {
    if (labeled.empty()) throw DataError("validation requires at least one labeled user");

    // The mode decides which of the two rules applies; thresholds come from cfg.
    InferenceConfig stddev_only = cfg;
    stddev_only.min_posts = 0;
    InferenceConfig posts_only = cfg;
    posts_only.stddev_threshold = std::numeric_limits<double>::infinity();

    ErrorReport report;
    for (const auto& user : labeled) {
        const Inference inferred = infer_personality(user.posts, provider, cfg);
        bool keep = true;
        switch (mode) {
            case FilterMode::none: break;
            case FilterMode::stddev:
                keep = apply_stability_filter(inferred.vector, user.posts, stddev_only).keep;
                break;
            case FilterMode::posts:
                keep = apply_stability_filter(inferred.vector, user.posts, posts_only).keep;
                break;
            case FilterMode::both:
                keep = apply_stability_filter(inferred.vector, user.posts, cfg).keep;
                break;
        }
        if (!keep) continue;
        ++report.n_users;
        for (int i = 0; i < kTraitCount; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double err = inferred.vector.traits[idx] - user.true_traits[idx];
            report.mae[idx] += std::fabs(err);
            report.mse[idx] += err * err;
        }
    }
    if (report.n_users == 0)
        throw DataError("no labeled user survived filter mode '" +
                        std::string(filter_mode_name(mode)) + "'");
    for (int i = 0; i < kTraitCount; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        report.mae[idx] /= report.n_users;
        report.mse[idx] /= report.n_users;
        report.rmse[idx] = std::sqrt(report.mse[idx]);
    }
    return report;
}

} // namespace persona::personality
