#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace persona {

inline constexpr int kTraitCount = 5;

// Five trait scores in fixed OCEAN order. Trait indices are 1-based in every
// file format and provider call; only array storage is 0-based.
using TraitVector = std::array<double, kTraitCount>;

std::string_view trait_name(int trait_index); // trait_index in 1..5
int trait_index_of(std::string_view name);    // inverse, throws DataError

inline constexpr std::array<std::string_view, 6> kOffenseAttributes = {
    "toxicity", "severe_toxicity", "identity_attack", "insult", "profanity", "threat"};

// Short lowercase platform identifier ("github", "linkedin", "x").
struct PlatformId {
    std::string name;

    PlatformId() = default;
    explicit PlatformId(std::string n) : name(std::move(n)) {}

    // Lowercases and validates nonempty.
    static PlatformId parse(std::string_view raw);

    auto operator<=>(const PlatformId&) const = default;
};

struct Post {
    PlatformId platform;
    std::string author_key;
    std::optional<std::int64_t> posted_at; // UTC epoch seconds
    std::string text;
    bool is_bio = false; // bios may carry empty text, regular posts may not

    bool operator==(const Post&) const = default;
};

// The recent posts of one user on one platform, most recent first.
struct PostCorpus {
    std::string user;
    PlatformId platform;
    std::vector<Post> posts;

    int nonempty_count() const;

    bool operator==(const PostCorpus&) const = default;
};

using CorpusKey = std::pair<std::string, PlatformId>;
using CorpusMap = std::map<CorpusKey, PostCorpus>;

struct PersonalityVector {
    TraitVector traits{};     // each in [1, 5]
    TraitVector run_stddev{}; // population stddev across the runs, >= 0
    int runs = 1;             // number of provider runs averaged

    void validate() const; // throws StructuralError on violated invariants

    bool operator==(const PersonalityVector&) const = default;
};

// One hierarchical content category, root segment first.
struct CategoryPath {
    std::vector<std::string> segments;
    double confidence = 1.0;

    static CategoryPath parse(std::string_view slash_path, double confidence = 1.0);
    std::string str() const; // "/Root/Mid/Leaf"
    const std::string& root() const { return segments.front(); }
    const std::string& leaf() const { return segments.back(); }

    bool operator==(const CategoryPath&) const = default;
};

bool path_equal(const CategoryPath& a, const CategoryPath& b); // segments only
bool path_less(const CategoryPath& a, const CategoryPath& b);  // segments only

// Sorted by segments, unique per path, confidence = max seen.
using CategorySet = std::vector<CategoryPath>;

CategorySet make_category_set(std::vector<CategoryPath> paths);

struct OffenseScores {
    // Per-attribute maxima over a user's posts; all six attributes present.
    std::map<std::string, double> attribute_max;
    int n_posts_scored = 0;
    int n_posts_failed = 0;

    static OffenseScores zeros();
    double at(std::string_view attribute) const;

    bool operator==(const OffenseScores&) const = default;
};

// F(u, p): one user's assembled profile on one platform.
struct PlatformProfile {
    std::string user;
    PlatformId platform;
    std::optional<PersonalityVector> personality; // absent when filtered out
    CategorySet professional_interests;
    CategorySet personal_interests;
    bool offensive = false;
    OffenseScores offense;

    bool operator==(const PlatformProfile&) const = default;
};

struct CrossPlatformProfile {
    std::string user;
    std::map<PlatformId, PlatformProfile> per_platform;
    // Mean of trait i over the platforms that kept a personality vector;
    // absent when every platform was filtered.
    std::optional<TraitVector> averaged_traits;

    bool operator==(const CrossPlatformProfile&) const = default;
};

PlatformProfile build_profile(std::string user, PlatformId platform,
                              std::optional<PersonalityVector> personality,
                              CategorySet professional, CategorySet personal,
                              OffenseScores offense, bool offensive);

CrossPlatformProfile synthesize_cross_platform(const std::vector<PlatformProfile>& profiles);

} // namespace persona
