#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "persona/domain.hpp"

namespace persona::matching {

// One person's self-reported handle set across platforms.
struct LinkedIdentity {
    std::string user_key;
    std::map<PlatformId, std::string> links;
    std::map<PlatformId, bool> verified;        // keys are a subset of links
    std::map<PlatformId, bool> manual_verified; // per-file overrides, applied on top

    bool operator==(const LinkedIdentity&) const = default;
};

struct MatchConfig {
    std::vector<PlatformId> target_platforms;
    bool require_all = false; // intersection vs. any-overlap with the target set
    std::optional<std::size_t> sample_size;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Case-folds and strips URL decoration ("https://x.com/@Foo/" -> "foo").
std::string normalize_handle(std::string_view raw);

// Keeps users whose linked platforms overlap the target set (or cover it when
// require_all), then draws a seeded uniform sample without replacement.
// Output preserves universe order and is deterministic given rng_seed.
std::vector<LinkedIdentity> select_linked_users(const std::vector<LinkedIdentity>& universe,
                                                const MatchConfig& cfg);

// verified[p] = true iff a corpus exists for (user, p) and holds at least one
// post with nonempty text. Absence is a verdict, not an error.
LinkedIdentity verify_activity(LinkedIdentity user, const CorpusMap& corpora);

// Manual verification entries in the identity file win over the corpus rule.
LinkedIdentity apply_manual_overrides(LinkedIdentity user);

} // namespace persona::matching
