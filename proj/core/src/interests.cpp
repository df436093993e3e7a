#include "persona/interests.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "persona/errors.hpp"

namespace persona::interests {

void InterestTaxonomy::validate() const {
    if (professional_roots.empty())
        throw ConfigError("interest taxonomy needs at least one professional root for a "
                          "professional/personal split to be meaningful");
    if (confidence_floor < 0.0 || confidence_floor > 1.0)
        throw ConfigError("confidence_floor must lie in [0, 1]");
}

bool InterestTaxonomy::is_professional_root(const std::string& root) const {
    return std::find(professional_roots.begin(), professional_roots.end(), root) !=
           professional_roots.end();
}

CategorySet classify_interests(const PostCorpus& corpus, providers::ContentClassifier& classifier,
                               const InterestTaxonomy& tax) {
    std::vector<CategoryPath> all;
    for (const auto& post : corpus.posts) {
        if (post.text.empty()) continue;
        CategorySet categories = classifier.classify(post.text);
        all.insert(all.end(), std::make_move_iterator(categories.begin()),
                   std::make_move_iterator(categories.end()));
    }
    CategorySet merged = make_category_set(std::move(all));
    std::erase_if(merged, [&](const CategoryPath& p) { return p.confidence < tax.confidence_floor; });
    return merged;
}

std::pair<CategorySet, CategorySet> split_interests(const CategorySet& categories,
                                                    const InterestTaxonomy& tax) {
    CategorySet professional, personal;
    for (const auto& path : categories) {
        if (tax.is_professional_root(path.root()))
            professional.push_back(path);
        else
            personal.push_back(path);
    }
    return {std::move(professional), std::move(personal)};
}

Level parse_level(std::string_view name) {
    if (name == "top") return Level::top;
    if (name == "leaf") return Level::leaf;
    throw ConfigError("unknown interest level: '" + std::string(name) + "'");
}

InterestKind parse_kind(std::string_view name) {
    if (name == "professional") return InterestKind::professional;
    if (name == "personal") return InterestKind::personal;
    throw ConfigError("unknown interest kind: '" + std::string(name) + "'");
}

std::string_view level_name(Level level) { return level == Level::top ? "top" : "leaf"; }

std::string_view kind_name(InterestKind kind) {
    return kind == InterestKind::professional ? "professional" : "personal";
}

std::vector<FrequencyRow> interest_frequencies(const std::vector<PlatformProfile>& profiles,
                                               Level level, InterestKind kind, std::size_t top_n) {
    if (profiles.empty()) throw DataError("interest frequencies need at least one profile");

    // One count per (user, category) at the chosen level, so prolific posters
    // and multi-platform users do not dominate the table.
    std::set<std::pair<std::string, std::string>> seen;
    std::map<std::string, std::size_t> counts;
    for (const auto& profile : profiles) {
        const CategorySet& set = kind == InterestKind::professional ? profile.professional_interests
                                                                    : profile.personal_interests;
        for (const auto& path : set) {
            const std::string label = level == Level::top ? path.root() : path.leaf();
            if (seen.emplace(profile.user, label).second) ++counts[label];
        }
    }

    std::size_t total = 0;
    for (const auto& [label, count] : counts) total += count;

    std::vector<FrequencyRow> rows;
    rows.reserve(counts.size());
    for (const auto& [label, count] : counts)
        rows.push_back({label, count, static_cast<double>(count) / static_cast<double>(total)});
    std::sort(rows.begin(), rows.end(), [](const FrequencyRow& a, const FrequencyRow& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.category < b.category;
    });
    if (top_n > 0 && rows.size() > top_n) rows.resize(top_n);
    return rows;
}

} // namespace persona::interests
