#include "persona/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "persona/errors.hpp"

namespace persona::stats {

std::vector<TraitChange> trait_changes(const std::vector<CrossPlatformProfile>& profiles,
                                       const PlatformId& from, const PlatformId& to,
                                       std::size_t* skipped) {
    if (skipped) *skipped = 0;
    std::vector<TraitChange> out;
    for (const auto& profile : profiles) {
        const auto from_it = profile.per_platform.find(from);
        const auto to_it = profile.per_platform.find(to);
        const bool eligible = from_it != profile.per_platform.end() &&
                              to_it != profile.per_platform.end() &&
                              from_it->second.personality.has_value() &&
                              to_it->second.personality.has_value();
        if (!eligible) {
            if (skipped) ++*skipped;
            continue;
        }
        TraitChange change;
        change.user_key = profile.user;
        for (int i = 0; i < kTraitCount; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            change.signed_delta[idx] =
                to_it->second.personality->traits[idx] - from_it->second.personality->traits[idx];
            change.abs_delta[idx] = std::fabs(change.signed_delta[idx]);
        }
        out.push_back(std::move(change));
    }
    if (out.empty())
        throw DataError("no user has personality vectors on both " + from.name + " and " + to.name);
    return out;
}

MagnitudeTable change_magnitude_table(const std::vector<TraitChange>& changes,
                                      std::vector<double> magnitudes) {
    if (changes.empty()) throw DataError("change magnitude table needs at least one user");
    MagnitudeTable table;
    table.magnitudes = std::move(magnitudes);
    table.n_users = changes.size();
    table.share.assign(kTraitCount, std::vector<double>(table.magnitudes.size(), 0.0));
    for (std::size_t m = 0; m < table.magnitudes.size(); ++m) {
        const double threshold = table.magnitudes[m];
        for (const auto& change : changes) {
            int traits_changed = 0;
            for (int i = 0; i < kTraitCount; ++i)
                if (change.abs_delta[static_cast<std::size_t>(i)] >= threshold) ++traits_changed;
            for (int n = 1; n <= traits_changed; ++n)
                table.share[static_cast<std::size_t>(n - 1)][m] += 1.0;
        }
        for (int n = 0; n < kTraitCount; ++n)
            table.share[static_cast<std::size_t>(n)][m] /= static_cast<double>(table.n_users);
    }
    return table;
}

std::vector<std::pair<double, double>> ccdf(std::vector<double> values) {
    if (values.empty()) throw DataError("ccdf needs at least one value");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] == values[i - 1]) continue;
        // values[i..] are all >= values[i]
        out.emplace_back(values[i], static_cast<double>(values.size() - i) / n);
    }
    return out;
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    bool converged = false;
    for (int j = 1; j <= 256; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-12) {
            converged = true;
            break;
        }
    }
    // The series only converges slowly for tiny lambda, where Q -> 1.
    if (!converged) return 1.0;
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DataError("ks_two_sample requires two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const auto n1 = a.size();
    const auto n2 = b.size();
    double d = 0.0;
    std::size_t i = 0, j = 0;
    // Walk the merged grid; after consuming every sample equal to the current
    // grid value both ECDFs are right-continuous at that value.
    while (i < n1 || j < n2) {
        const double x = (i < n1 && (j >= n2 || a[i] <= b[j])) ? a[i] : b[j];
        while (i < n1 && a[i] == x) ++i;
        while (j < n2 && b[j] == x) ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(n1);
        const double fb = static_cast<double>(j) / static_cast<double>(n2);
        d = std::max(d, std::fabs(fa - fb));
    }

    const double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                      static_cast<double>(n1 + n2);
    const double lambda = d * (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne));

    KsResult result;
    result.d_statistic = d;
    result.p_value = kolmogorov_sf(lambda);
    result.n1 = n1;
    result.n2 = n2;
    return result;
}

namespace {

// Continued-fraction evaluation of the regularized incomplete beta function
// (modified Lentz), good to ~1e-14 for the argument ranges used here.
double ibeta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    constexpr int max_iterations = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw StructuralError("incomplete beta continued fraction failed to converge");
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw StructuralError("incomplete beta requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * ibeta_continued_fraction(a, b, x) / a;
    return 1.0 - front * ibeta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw StructuralError("t distribution requires dof > 0");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = dof / (dof + t * t);
    const double half_tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

CorrelationResult point_biserial(const std::vector<int>& binary,
                                 const std::vector<double>& values) {
    if (binary.size() != values.size())
        throw DataError("point_biserial inputs differ in length: " + std::to_string(binary.size()) +
                        " vs " + std::to_string(values.size()));
    const std::size_t n = binary.size();
    if (n < 3) throw DataError("point_biserial needs at least 3 observations");

    std::size_t ones = 0;
    for (const int v : binary) {
        if (v != 0 && v != 1) throw DataError("binary vector may only contain 0 and 1");
        ones += static_cast<std::size_t>(v);
    }
    if (ones == 0 || ones == n)
        throw DataError("point_biserial needs both binary classes present (got " +
                        std::to_string(ones) + " of " + std::to_string(n) + " positive)");

    const double nd = static_cast<double>(n);
    double mean_b = 0.0, mean_v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_b += binary[i];
        mean_v += values[i];
    }
    mean_b /= nd;
    mean_v /= nd;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double db = binary[i] - mean_b;
        const double dv = values[i] - mean_v;
        sxy += db * dv;
        sxx += db * db;
        syy += dv * dv;
    }
    if (syy == 0.0) throw DataError("point_biserial values have zero variance");

    CorrelationResult result;
    result.n = n;
    result.r = sxy / std::sqrt(sxx * syy);
    // Guard tiny excursions beyond [-1, 1] from the division.
    result.r = std::clamp(result.r, -1.0, 1.0);

    const double dof = nd - 2.0;
    const double one_minus_r2 = 1.0 - result.r * result.r;
    if (one_minus_r2 <= 0.0) {
        result.p_value = 0.0;
        return result;
    }
    const double t = std::fabs(result.r) * std::sqrt(dof / one_minus_r2);
    // Two-sided tail; identical to 2 * (1 - cdf(|t|)).
    result.p_value = regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
    return result;
}

} // namespace persona::stats
