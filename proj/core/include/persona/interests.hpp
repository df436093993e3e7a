#pragma once

#include <string>
#include <utility>
#include <vector>

#include "persona/domain.hpp"
#include "persona/providers.hpp"

namespace persona::interests {

// Which top-level categories count as professional is a per-dataset choice,
// so it lives in config rather than code.
struct InterestTaxonomy {
    std::vector<std::string> professional_roots;
    double confidence_floor = 0.0;

    void validate() const;
    bool is_professional_root(const std::string& root) const;
};

// Union of classifier categories over the corpus posts, deduplicated by path
// keeping the max confidence, with paths below the confidence floor dropped.
CategorySet classify_interests(const PostCorpus& corpus, providers::ContentClassifier& classifier,
                               const InterestTaxonomy& tax);

// Partition: professional = paths rooted in a professional root, personal =
// everything else.
std::pair<CategorySet, CategorySet> split_interests(const CategorySet& categories,
                                                    const InterestTaxonomy& tax);

enum class Level { top, leaf };
enum class InterestKind { professional, personal };

Level parse_level(std::string_view name);
InterestKind parse_kind(std::string_view name);
std::string_view level_name(Level level);
std::string_view kind_name(InterestKind kind);

struct FrequencyRow {
    std::string category;
    std::size_t count = 0;
    double rfreq = 0.0;
};

// Relative frequencies of interest categories over a set of platform
// profiles, counting one occurrence per (user, category) at the chosen level.
// Sorted by descending frequency, ties lexicographic; top_n = 0 returns all.
std::vector<FrequencyRow> interest_frequencies(const std::vector<PlatformProfile>& profiles,
                                               Level level, InterestKind kind,
                                               std::size_t top_n = 0);

} // namespace persona::interests
