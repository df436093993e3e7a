#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "persona/domain.hpp"

namespace persona::stats {

struct TraitChange {
    std::string user_key;
    TraitVector signed_delta{}; // to - from, per trait, in [-4, 4]
    TraitVector abs_delta{};
};

struct KsResult {
    double d_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

struct CorrelationResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

// Per-user signed trait deltas between two platforms. Users lacking a
// personality vector on either side are skipped and counted in *skipped.
std::vector<TraitChange> trait_changes(const std::vector<CrossPlatformProfile>& profiles,
                                       const PlatformId& from, const PlatformId& to,
                                       std::size_t* skipped = nullptr);

struct MagnitudeTable {
    std::vector<double> magnitudes; // column thresholds, e.g. {1, 2, 3}
    // share[n - 1][m] = fraction of users with >= n traits changed by >= magnitudes[m]
    std::vector<std::vector<double>> share;
    std::size_t n_users = 0;
};

MagnitudeTable change_magnitude_table(const std::vector<TraitChange>& changes,
                                      std::vector<double> magnitudes = {1.0, 2.0, 3.0});

// Complementary CDF evaluated at the sorted distinct values:
// (x, count(v >= x) / n). Starts at 1.0 and is non-increasing.
std::vector<std::pair<double, double>> ccdf(std::vector<double> values);

// Two-sample Kolmogorov-Smirnov. D is the sup over the merged grid of the
// absolute ECDF difference; the p-value uses the asymptotic Kolmogorov series
// with the small-sample correction lambda = D * (sqrt(ne) + 0.12 + 0.11/sqrt(ne)).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson correlation of a 0/1 vector with a real vector (the point-biserial
// identity), two-sided p via the t distribution with n - 2 dof.
CorrelationResult point_biserial(const std::vector<int>& binary, const std::vector<double>& values);

// Exposed numeric kernels (tested directly against frozen references).
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
double kolmogorov_sf(double lambda); // Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}

} // namespace persona::stats
