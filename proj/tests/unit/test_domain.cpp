#include <doctest.h>

#include <algorithm>

#include "persona/domain.hpp"
#include "persona/errors.hpp"
#include "persona/rng.hpp"

using namespace persona;

namespace {

PersonalityVector vector_of(TraitVector traits) {
    PersonalityVector v;
    v.traits = traits;
    v.runs = 10;
    return v;
}

PlatformProfile simple_profile(const std::string& user, const std::string& platform,
                               std::optional<PersonalityVector> personality) {
    return build_profile(user, PlatformId(platform), std::move(personality),
                         {CategoryPath::parse("/Computers & Electronics/Development Tools")},
                         {CategoryPath::parse("/Online Communities")}, OffenseScores::zeros(),
                         false);
}

} // namespace

TEST_CASE("trait names map both ways") {
    CHECK(trait_name(1) == "openness");
    CHECK(trait_name(5) == "neuroticism");
    CHECK(trait_index_of("conscientiousness") == 2);
    CHECK_THROWS_AS(trait_name(0), StructuralError);
    CHECK_THROWS_AS(trait_index_of("charisma"), DataError);
}

TEST_CASE("platform ids are lowercased and nonempty") {
    CHECK(PlatformId::parse(" GitHub ").name == "github");
    CHECK_THROWS_AS(PlatformId::parse("  "), DataError);
}

TEST_CASE("category paths parse and print") {
    const auto path = CategoryPath::parse("/Computers & Electronics/Programming/Java", 0.7);
    CHECK(path.segments.size() == 3);
    CHECK(path.root() == "Computers & Electronics");
    CHECK(path.leaf() == "Java");
    CHECK(path.str() == "/Computers & Electronics/Programming/Java");
    CHECK_THROWS_AS(CategoryPath::parse("///"), DataError);
}

TEST_CASE("make_category_set dedups by path keeping max confidence") {
    auto set = make_category_set({CategoryPath::parse("/Games/Board Games", 0.4),
                                  CategoryPath::parse("/Games/Board Games", 0.9),
                                  CategoryPath::parse("/Arts & Entertainment", 0.2)});
    REQUIRE(set.size() == 2);
    CHECK(set[0].str() == "/Arts & Entertainment");
    CHECK(set[1].str() == "/Games/Board Games");
    CHECK(set[1].confidence == 0.9);
}

TEST_CASE("build_profile aggregates and rejects overlap") {
    const auto profile = simple_profile("u1", "x", vector_of({4, 4, 4, 4, 2}));
    CHECK(profile.personality.has_value());
    CHECK(profile.professional_interests.size() == 1);
    CHECK(profile.personal_interests.size() == 1);
    CHECK_FALSE(profile.offensive);

    SUBCASE("personality may be absent") {
        const auto filtered = simple_profile("u1", "x", std::nullopt);
        CHECK_FALSE(filtered.personality.has_value());
        CHECK(filtered.professional_interests.size() == 1);
    }
    SUBCASE("overlapping interest sets are a structural error") {
        const CategorySet overlap = {CategoryPath::parse("/Games/Board Games")};
        CHECK_THROWS_AS(build_profile("u1", PlatformId("x"), std::nullopt, overlap, overlap,
                                      OffenseScores::zeros(), false),
                        StructuralError);
    }
    SUBCASE("out-of-range traits are rejected") {
        CHECK_THROWS_AS(simple_profile("u1", "x", vector_of({0.5, 4, 4, 4, 4})), StructuralError);
    }
}

TEST_CASE("synthesize_cross_platform averages over platforms with vectors") {
    SUBCASE("singleton mean") {
        const auto cross = synthesize_cross_platform(
            {simple_profile("u", "x", vector_of({3, 3, 3, 3, 3}))});
        REQUIRE(cross.averaged_traits.has_value());
        for (const double t : *cross.averaged_traits) CHECK(t == 3.0);
    }
    SUBCASE("two platforms, symmetric mean") {
        const auto cross = synthesize_cross_platform(
            {simple_profile("u", "x", vector_of({2, 2, 2, 2, 2})),
             simple_profile("u", "linkedin", vector_of({4, 4, 4, 4, 4}))});
        for (const double t : *cross.averaged_traits) CHECK(t == 3.0);
        CHECK(cross.per_platform.size() == 2);
    }
    SUBCASE("filtered platform drops out of the mean") {
        const auto cross = synthesize_cross_platform(
            {simple_profile("u", "x", vector_of({4.5, 2.5, 3.5, 1.5, 5.0})),
             simple_profile("u", "linkedin", std::nullopt)});
        // Hand-computed: mean over the single surviving vector is that vector.
        const TraitVector expected = {4.5, 2.5, 3.5, 1.5, 5.0};
        for (int i = 0; i < kTraitCount; ++i)
            CHECK((*cross.averaged_traits)[static_cast<std::size_t>(i)] ==
                  expected[static_cast<std::size_t>(i)]);
    }
    SUBCASE("no platform carries a vector") {
        const auto cross = synthesize_cross_platform({simple_profile("u", "x", std::nullopt)});
        CHECK_FALSE(cross.averaged_traits.has_value());
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(synthesize_cross_platform({}), DataError);
        CHECK_THROWS_AS(synthesize_cross_platform(
                            {simple_profile("u", "x", std::nullopt),
                             simple_profile("u", "x", std::nullopt)}),
                        DataError);
        CHECK_THROWS_AS(synthesize_cross_platform(
                            {simple_profile("u", "x", std::nullopt),
                             simple_profile("v", "linkedin", std::nullopt)}),
                        StructuralError);
    }
}

TEST_CASE("synthesis is permutation invariant and means stay within bounds") {
    Rng rng(88);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PlatformProfile> profiles;
        const int n = 2 + static_cast<int>(rng.below(4));
        for (int p = 0; p < n; ++p) {
            TraitVector traits;
            for (auto& t : traits) t = rng.uniform(1, 5);
            profiles.push_back(
                simple_profile("u", "platform" + std::to_string(p), vector_of(traits)));
        }
        const auto forward = synthesize_cross_platform(profiles);

        std::vector<PlatformProfile> shuffled = profiles;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.below(i))]);
        const auto reversed = synthesize_cross_platform(shuffled);
        CHECK(forward == reversed);

        for (int i = 0; i < kTraitCount; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            double lo = 5.0, hi = 1.0;
            for (const auto& p : profiles) {
                lo = std::min(lo, p.personality->traits[idx]);
                hi = std::max(hi, p.personality->traits[idx]);
            }
            CHECK((*forward.averaged_traits)[idx] >= lo - 1e-12);
            CHECK((*forward.averaged_traits)[idx] <= hi + 1e-12);
        }
    }
}
