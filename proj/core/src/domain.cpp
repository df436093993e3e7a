#include "persona/domain.hpp"

#include <algorithm>
#include <sstream>

#include "persona/errors.hpp"
#include "persona/text.hpp"

namespace persona {

namespace {
constexpr std::array<std::string_view, kTraitCount> kTraitNames = {
    "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"};
}

std::string_view trait_name(int trait_index) {
    if (trait_index < 1 || trait_index > kTraitCount)
        throw StructuralError("trait index out of range: " + std::to_string(trait_index));
    return kTraitNames[static_cast<std::size_t>(trait_index - 1)];
}

int trait_index_of(std::string_view name) {
    for (int i = 0; i < kTraitCount; ++i)
        if (kTraitNames[static_cast<std::size_t>(i)] == name) return i + 1;
    throw DataError("unknown trait name: " + std::string(name));
}

PlatformId PlatformId::parse(std::string_view raw) {
    std::string name = text::to_lower(text::trim(raw));
    if (name.empty()) throw DataError("platform identifier must be nonempty");
    return PlatformId(std::move(name));
}

int PostCorpus::nonempty_count() const {
    int n = 0;
    for (const auto& p : posts)
        if (!p.text.empty()) ++n;
    return n;
}

void PersonalityVector::validate() const {
    if (runs < 1) throw StructuralError("personality vector must average at least one run");
    for (int i = 0; i < kTraitCount; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (traits[idx] < 1.0 || traits[idx] > 5.0)
            throw StructuralError("trait score out of [1,5]: " + std::string(kTraitNames[idx]));
        if (run_stddev[idx] < 0.0)
            throw StructuralError("negative run stddev for trait " + std::string(kTraitNames[idx]));
    }
}

CategoryPath CategoryPath::parse(std::string_view slash_path, double confidence) {
    CategoryPath path;
    path.confidence = confidence;
    std::string segment;
    std::istringstream in{std::string(slash_path)};
    while (std::getline(in, segment, '/')) {
        segment = text::trim(segment);
        if (!segment.empty()) path.segments.push_back(segment);
    }
    if (path.segments.empty())
        throw DataError("category path has no segments: '" + std::string(slash_path) + "'");
    return path;
}

std::string CategoryPath::str() const {
    std::string out;
    for (const auto& s : segments) {
        out += '/';
        out += s;
    }
    return out;
}

bool path_equal(const CategoryPath& a, const CategoryPath& b) { return a.segments == b.segments; }
bool path_less(const CategoryPath& a, const CategoryPath& b) { return a.segments < b.segments; }

CategorySet make_category_set(std::vector<CategoryPath> paths) {
    std::sort(paths.begin(), paths.end(), [](const CategoryPath& a, const CategoryPath& b) {
        if (a.segments != b.segments) return a.segments < b.segments;
        return a.confidence > b.confidence;
    });
    CategorySet out;
    for (auto& p : paths) {
        if (!out.empty() && path_equal(out.back(), p)) continue; // keep max confidence
        out.push_back(std::move(p));
    }
    return out;
}

OffenseScores OffenseScores::zeros() {
    OffenseScores s;
    for (auto attr : kOffenseAttributes) s.attribute_max[std::string(attr)] = 0.0;
    return s;
}

double OffenseScores::at(std::string_view attribute) const {
    const auto it = attribute_max.find(std::string(attribute));
    if (it == attribute_max.end())
        throw StructuralError("missing offense attribute: " + std::string(attribute));
    return it->second;
}

PlatformProfile build_profile(std::string user, PlatformId platform,
                              std::optional<PersonalityVector> personality,
                              CategorySet professional, CategorySet personal,
                              OffenseScores offense, bool offensive) {
    for (const auto& p : professional) {
        const auto hit = std::find_if(personal.begin(), personal.end(),
                                      [&](const CategoryPath& q) { return path_equal(p, q); });
        if (hit != personal.end())
            throw StructuralError("professional and personal interests overlap on " + p.str());
    }
    if (personality) personality->validate();
    PlatformProfile profile;
    profile.user = std::move(user);
    profile.platform = std::move(platform);
    profile.personality = std::move(personality);
    profile.professional_interests = std::move(professional);
    profile.personal_interests = std::move(personal);
    profile.offense = std::move(offense);
    profile.offensive = offensive;
    return profile;
}

CrossPlatformProfile synthesize_cross_platform(const std::vector<PlatformProfile>& profiles) {
    if (profiles.empty()) throw DataError("cannot synthesize a cross-platform profile from zero platforms");
    CrossPlatformProfile out;
    out.user = profiles.front().user;
    for (const auto& p : profiles) {
        if (p.user != out.user)
            throw StructuralError("profiles for different users: '" + out.user + "' vs '" + p.user + "'");
        if (!out.per_platform.emplace(p.platform, p).second)
            throw DataError("duplicate platform profile for user '" + out.user + "' on " + p.platform.name);
    }
    // Mean over the platforms that actually carry a vector; platforms whose
    // inference was filtered out do not drag the average toward anything.
    TraitVector sums{};
    int with_vector = 0;
    for (const auto& [platform, profile] : out.per_platform) {
        if (!profile.personality) continue;
        ++with_vector;
        for (int i = 0; i < kTraitCount; ++i)
            sums[static_cast<std::size_t>(i)] += profile.personality->traits[static_cast<std::size_t>(i)];
    }
    if (with_vector > 0) {
        TraitVector mean{};
        for (int i = 0; i < kTraitCount; ++i)
            mean[static_cast<std::size_t>(i)] = sums[static_cast<std::size_t>(i)] / with_vector;
        out.averaged_traits = mean;
    }
    return out;
}

} // namespace persona
