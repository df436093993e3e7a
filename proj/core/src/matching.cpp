#include "persona/matching.hpp"

#include <algorithm>

#include "persona/errors.hpp"
#include "persona/rng.hpp"
#include "persona/text.hpp"

namespace persona::matching {

void MatchConfig::validate() const {
    if (target_platforms.empty()) throw ConfigError("match.target_platforms must be nonempty");
    if (sample_size && *sample_size == 0) throw ConfigError("match.sample_size must be positive");
}

std::string normalize_handle(std::string_view raw) {
    std::string s = text::trim(raw);
    // Keep the last nonempty path segment of anything that looks like a URL.
    const auto scheme = s.find("://");
    if (scheme != std::string::npos || s.starts_with("www.")) {
        while (!s.empty() && s.back() == '/') s.pop_back();
        const auto slash = s.rfind('/');
        if (slash != std::string::npos) s = s.substr(slash + 1);
    }
    const auto query = s.find_first_of("?#");
    if (query != std::string::npos) s = s.substr(0, query);
    if (!s.empty() && s.front() == '@') s.erase(s.begin());
    return text::to_lower(s);
}

namespace {

bool matches_targets(const LinkedIdentity& user, const MatchConfig& cfg) {
    std::size_t overlap = 0;
    for (const auto& p : cfg.target_platforms)
        if (user.links.contains(p)) ++overlap;
    return cfg.require_all ? overlap == cfg.target_platforms.size() : overlap > 0;
}

} // namespace

std::vector<LinkedIdentity> select_linked_users(const std::vector<LinkedIdentity>& universe,
                                                const MatchConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> matched;
    for (std::size_t i = 0; i < universe.size(); ++i)
        if (matches_targets(universe[i], cfg)) matched.push_back(i);

    if (cfg.sample_size) {
        if (*cfg.sample_size > matched.size())
            throw DataError("sample_size " + std::to_string(*cfg.sample_size) +
                            " exceeds matched user count " + std::to_string(matched.size()));
        // Partial Fisher-Yates over the matched indices, then restore
        // universe order so output order is independent of the draw order.
        Rng rng(cfg.rng_seed);
        for (std::size_t i = 0; i < *cfg.sample_size; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(matched.size() - i));
            std::swap(matched[i], matched[j]);
        }
        matched.resize(*cfg.sample_size);
        std::sort(matched.begin(), matched.end());
    }

    std::vector<LinkedIdentity> out;
    out.reserve(matched.size());
    for (const std::size_t i : matched) out.push_back(universe[i]);
    return out;
}

LinkedIdentity verify_activity(LinkedIdentity user, const CorpusMap& corpora) {
    user.verified.clear();
    for (const auto& [platform, handle] : user.links) {
        const auto it = corpora.find({user.user_key, platform});
        const bool active = it != corpora.end() && it->second.nonempty_count() > 0;
        user.verified[platform] = active;
    }
    return user;
}

LinkedIdentity apply_manual_overrides(LinkedIdentity user) {
    for (const auto& [platform, flag] : user.manual_verified)
        if (user.links.contains(platform)) user.verified[platform] = flag;
    return user;
}

} // namespace persona::matching
