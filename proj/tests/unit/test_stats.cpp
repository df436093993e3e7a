#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "persona/errors.hpp"
#include "persona/rng.hpp"
#include "persona/stats.hpp"

using namespace persona;
using namespace persona::stats;

namespace {

CrossPlatformProfile profile_with_traits(const std::string& user,
                                         const std::map<std::string, TraitVector>& traits) {
    CrossPlatformProfile profile;
    profile.user = user;
    for (const auto& [platform, t] : traits) {
        PlatformProfile p;
        p.user = user;
        p.platform = PlatformId(platform);
        PersonalityVector v;
        v.traits = t;
        v.runs = 1;
        p.personality = v;
        p.offense = OffenseScores::zeros();
        profile.per_platform[p.platform] = std::move(p);
    }
    return profile;
}

} // namespace

TEST_CASE("trait_changes basic arithmetic and antisymmetry") {
    const PlatformId li("linkedin"), x("x");
    std::vector<CrossPlatformProfile> profiles;
    profiles.push_back(profile_with_traits("u1", {{"linkedin", {3, 3, 3, 3, 2.0}},
                                                  {"x", {3, 3, 3, 3, 3.2}}}));
    profiles.push_back(profile_with_traits("u2", {{"linkedin", {2, 2, 2, 2, 2}},
                                                  {"x", {2, 2, 2, 2, 2}}}));

    auto changes = trait_changes(profiles, li, x);
    REQUIRE(changes.size() == 2);
    CHECK(changes[0].signed_delta[4] == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(changes[0].abs_delta[4] == doctest::Approx(1.2).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) CHECK(changes[0].signed_delta[i] == 0.0);
    for (int i = 0; i < kTraitCount; ++i) CHECK(changes[1].signed_delta[i] == 0.0);

    auto reversed = trait_changes(profiles, x, li);
    for (int i = 0; i < kTraitCount; ++i)
        CHECK(reversed[0].signed_delta[i] == -changes[0].signed_delta[i]);
}

TEST_CASE("trait_changes skips users missing a side and errors when none remain") {
    const PlatformId li("linkedin"), x("x");
    std::vector<CrossPlatformProfile> profiles;
    profiles.push_back(profile_with_traits("only_li", {{"linkedin", {3, 3, 3, 3, 3}}}));
    std::size_t skipped = 0;
    CHECK_THROWS_AS(trait_changes(profiles, li, x, &skipped), DataError);

    profiles.push_back(profile_with_traits("both", {{"linkedin", {1, 1, 1, 1, 1}},
                                                    {"x", {5, 5, 5, 5, 5}}}));
    const auto changes = trait_changes(profiles, li, x, &skipped);
    CHECK(changes.size() == 1);
    CHECK(skipped == 1);
    CHECK(changes[0].user_key == "both");
}

TEST_CASE("change_magnitude_table single user") {
    TraitChange change;
    change.user_key = "u";
    change.abs_delta = {1.5, 0, 0, 0, 0};
    const auto table = change_magnitude_table({change});
    CHECK(table.share[0][0] == 1.0); // >=1 trait changed by >=1.0
    CHECK(table.share[1][0] == 0.0); // >=2 traits
    CHECK(table.share[0][1] == 0.0); // >=1 trait by >=2.0
}

TEST_CASE("change_magnitude_table hand-enumerated ten-user fixture") {
    // Hand-set |delta| profiles; expected cells enumerated by hand below.
    const std::vector<TraitVector> deltas = {
        {1.2, 0.1, 0.0, 0.3, 2.5}, // >=1: 2 traits, >=2: 1
        {0.5, 0.4, 0.3, 0.2, 0.1}, // none
        {1.0, 1.0, 1.0, 1.0, 1.0}, // >=1: 5
        {2.0, 2.1, 0.0, 0.0, 0.0}, // >=1: 2, >=2: 2
        {3.0, 0.0, 0.0, 0.0, 0.9}, // >=1: 1, >=2: 1, >=3: 1
        {0.0, 0.0, 0.0, 0.0, 4.0}, // >=1: 1, >=2: 1, >=3: 1
        {1.1, 1.2, 1.3, 0.0, 0.0}, // >=1: 3
        {0.9, 0.9, 0.9, 0.9, 0.9}, // none
        {2.2, 2.2, 2.2, 2.2, 2.2}, // >=1: 5, >=2: 5
        {1.0, 2.0, 3.0, 0.5, 0.0}, // >=1: 3, >=2: 2, >=3: 1
    };
    std::vector<TraitChange> changes;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        TraitChange c;
        c.user_key = "u" + std::to_string(i);
        c.abs_delta = deltas[i];
        changes.push_back(c);
    }
    const auto table = change_magnitude_table(changes);
    // counts of users with >= n traits >= 1.0: n=1: 8, n=2: 6, n=3: 4, n=4: 2, n=5: 2
    CHECK(table.share[0][0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(table.share[1][0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(table.share[2][0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(table.share[3][0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(table.share[4][0] == doctest::Approx(0.2).epsilon(1e-12));
    // >= 2.0: n=1: 6, n=2: 3, n=3..4: 1, n=5: 1
    CHECK(table.share[0][1] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(table.share[1][1] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(table.share[2][1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(table.share[3][1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(table.share[4][1] == doctest::Approx(0.1).epsilon(1e-12));
    // >= 3.0: only u4 (3.0), u5 (4.0), u9 (3.0) qualify, one trait each
    CHECK(table.share[0][2] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(table.share[1][2] == 0.0);

    // Rows non-increasing down each column, columns non-increasing across.
    for (std::size_t m = 0; m < table.magnitudes.size(); ++m)
        for (int n = 1; n < kTraitCount; ++n)
            CHECK(table.share[n][m] <= table.share[n - 1][m]);
    for (int n = 0; n < kTraitCount; ++n)
        for (std::size_t m = 1; m < table.magnitudes.size(); ++m)
            CHECK(table.share[n][m] <= table.share[n][m - 1]);
}

TEST_CASE("ccdf examples and brute-force comparison") {
    const auto points = ccdf({1.0, 2.0, 3.0});
    REQUIRE(points.size() == 3);
    CHECK(points[0] == std::pair{1.0, 1.0});
    CHECK(points[1].second == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(points[2].second == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const auto flat = ccdf({4.2, 4.2, 4.2});
    REQUIRE(flat.size() == 1);
    CHECK(flat[0] == std::pair{4.2, 1.0});

    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values;
        const int n = 1 + static_cast<int>(rng.below(40));
        for (int i = 0; i < n; ++i) values.push_back(std::floor(rng.uniform(-5, 5) * 4) / 4);
        const auto result = ccdf(values);
        CHECK(result.front().second == 1.0);
        double prev = 2.0;
        for (const auto& [x, fraction] : result) {
            CHECK(fraction == doctest::Approx(oracles::ccdf_at(values, x)).epsilon(1e-15));
            CHECK(fraction <= prev);
            prev = fraction;
        }
    }
}

TEST_CASE("ks_two_sample examples") {
    SUBCASE("identical multisets give D = 0") {
        const auto result = ks_two_sample({1, 2, 2, 3}, {3, 2, 1, 2});
        CHECK(result.d_statistic == 0.0);
        CHECK(result.p_value == 1.0);
    }
    SUBCASE("disjoint supports give D = 1") {
        const auto result = ks_two_sample({1, 2}, {3, 4});
        CHECK(result.d_statistic == 1.0);
    }
    SUBCASE("merged-grid hand example") {
        const auto result = ks_two_sample({1, 2, 3, 4}, {2, 3, 4, 5});
        CHECK(result.d_statistic == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(result.n1 == 4);
        CHECK(result.n2 == 4);
        // lambda = 0.25 * (sqrt(2) + 0.12 + 0.11/sqrt(2)); frozen scipy value.
        CHECK(result.p_value == doctest::Approx(0.99687568852021213).epsilon(1e-12));
    }
}

TEST_CASE("ks_two_sample brute-force oracle, symmetry, transform invariance") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a, b;
        const int na = 1 + static_cast<int>(rng.below(50));
        const int nb = 1 + static_cast<int>(rng.below(50));
        for (int i = 0; i < na; ++i) a.push_back(std::floor(rng.uniform(0, 8)) / 2);
        for (int i = 0; i < nb; ++i) b.push_back(std::floor(rng.uniform(0, 8)) / 2);

        const auto result = ks_two_sample(a, b);
        const double oracle = oracles::ks_d_brute_force(a, b);
        CHECK(std::fabs(result.d_statistic - oracle) <= 1e-12);

        const auto swapped = ks_two_sample(b, a);
        CHECK(swapped.d_statistic == result.d_statistic);
        CHECK(swapped.p_value == result.p_value);

        // Strictly increasing transform leaves D unchanged.
        auto transform = [](double v) { return std::exp(v) + 3.0 * v; };
        std::vector<double> ta, tb;
        for (const double v : a) ta.push_back(transform(v));
        for (const double v : b) tb.push_back(transform(v));
        CHECK(ks_two_sample(ta, tb).d_statistic == doctest::Approx(result.d_statistic).epsilon(1e-15));
    }
}

TEST_CASE("kolmogorov survival function frozen values") {
    CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.96394524366487511).epsilon(1e-12));
    CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-12));
    CHECK(kolmogorov_sf(1.5) == doctest::Approx(0.022217962616525127).epsilon(1e-12));
    CHECK(kolmogorov_sf(2.0) == doctest::Approx(0.00067092525577969533).epsilon(1e-12));
    CHECK(kolmogorov_sf(0.3) == doctest::Approx(0.99999069419866549).epsilon(1e-10));
    CHECK(kolmogorov_sf(0.0) == 1.0);
    CHECK(kolmogorov_sf(1e-9) == 1.0);
}

TEST_CASE("regularized incomplete beta and t cdf frozen values") {
    CHECK(regularized_incomplete_beta(2, 3, 0.3) ==
          doctest::Approx(0.34829999999999994).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.5, 0.5, 0.7) ==
          doctest::Approx(0.63098988043445459).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(5, 0.5, 0.9) ==
          doctest::Approx(0.31664291502001218).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(49, 0.5, 0.99) ==
          doctest::Approx(0.32221736303061954).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);

    CHECK(student_t_cdf(2.0, 10) == doctest::Approx(0.96330598261462974).epsilon(1e-10));
    CHECK(student_t_cdf(-1.5, 3) == doctest::Approx(0.11529193262241141).epsilon(1e-10));
    CHECK(student_t_cdf(0.5, 7) == doctest::Approx(0.68379643215535779).epsilon(1e-10));
    CHECK(student_t_cdf(0.0, 5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_cdf(3.7, 98) == doctest::Approx(0.99982199069840649).epsilon(1e-10));
}

TEST_CASE("point_biserial examples") {
    SUBCASE("perfect alignment") {
        const auto result = point_biserial({0, 1, 0, 1}, {1, 2, 1, 2});
        CHECK(result.r == 1.0);
        CHECK(result.p_value == 0.0);
    }
    SUBCASE("zero variance is an error") {
        CHECK_THROWS_AS(point_biserial({0, 1, 0, 1}, {2, 2, 2, 2}), DataError);
    }
    SUBCASE("single class is an error") {
        CHECK_THROWS_AS(point_biserial({1, 1, 1, 1}, {1, 2, 3, 4}), DataError);
    }
    SUBCASE("length mismatch and short input") {
        CHECK_THROWS_AS(point_biserial({1, 0}, {1, 2, 3}), DataError);
        CHECK_THROWS_AS(point_biserial({1, 0}, {1, 2}), DataError);
    }
    SUBCASE("frozen scipy reference") {
        const auto result = point_biserial({0, 0, 1, 1, 1}, {1.0, 2.0, 2.0, 3.0, 4.0});
        CHECK(result.r == doctest::Approx(0.72057669212289222).epsilon(1e-12));
        CHECK(result.p_value == doctest::Approx(0.16967992890125816).epsilon(1e-10));

        const auto r2 = point_biserial({1, 0, 1, 0, 1, 1, 0}, {3.2, 1.1, 4.0, 2.2, 5.0, 3.3, 0.5});
        CHECK(r2.r == doctest::Approx(0.87546368451895429).epsilon(1e-12));
        CHECK(r2.p_value == doctest::Approx(0.0098194401588739232).epsilon(1e-10));
    }
}

TEST_CASE("point_biserial equals the Pearson 0/1 oracle and flips with labels") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(60));
        std::vector<int> binary(static_cast<std::size_t>(n));
        std::vector<double> values(static_cast<std::size_t>(n));
        int ones = 0;
        for (int i = 0; i < n; ++i) {
            binary[static_cast<std::size_t>(i)] = rng.uniform01() < 0.5 ? 0 : 1;
            ones += binary[static_cast<std::size_t>(i)];
            values[static_cast<std::size_t>(i)] = rng.uniform(1, 5);
        }
        if (ones == 0 || ones == n) continue;

        const auto result = point_biserial(binary, values);
        std::vector<double> encoded(binary.begin(), binary.end());
        CHECK(std::fabs(result.r - oracles::pearson(encoded, values)) <= 1e-12);
        CHECK(std::fabs(result.r) <= 1.0);
        CHECK(result.p_value >= 0.0);
        CHECK(result.p_value <= 1.0);

        std::vector<int> flipped;
        for (const int v : binary) flipped.push_back(1 - v);
        const auto flipped_result = point_biserial(flipped, values);
        CHECK(flipped_result.r == doctest::Approx(-result.r).epsilon(1e-12));
    }
}
