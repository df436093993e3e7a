#pragma once

// Brute-force reference implementations used as oracles. These deliberately
// avoid the library's code paths: direct counting, naive loops, no shared
// helpers beyond the standard library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <vector>

namespace oracles {

// KS D by evaluating both empirical CDFs at every merged sample value.
inline double ks_d_brute_force(const std::vector<double>& a, const std::vector<double>& b) {
    std::set<double> grid(a.begin(), a.end());
    grid.insert(b.begin(), b.end());
    double d = 0.0;
    for (const double x : grid) {
        std::size_t ca = 0, cb = 0;
        for (const double v : a)
            if (v <= x) ++ca;
        for (const double v : b)
            if (v <= x) ++cb;
        const double fa = static_cast<double>(ca) / static_cast<double>(a.size());
        const double fb = static_cast<double>(cb) / static_cast<double>(b.size());
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

// Plain Pearson correlation; the point-biserial oracle encodes the binary
// variable as 0/1 and calls this.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Silhouette from the full pairwise distance matrix, one formula application
// per point.
inline std::vector<double> silhouette_brute_force(const std::vector<std::vector<double>>& points,
                                                  const std::vector<int>& assignments) {
    const std::size_t n = points.size();
    auto dist = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t d = 0; d < points[i].size(); ++d)
            acc += (points[i][d] - points[j][d]) * (points[i][d] - points[j][d]);
        return std::sqrt(acc);
    };
    std::map<int, std::size_t> sizes;
    for (const int a : assignments) ++sizes[a];

    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assignments[i]] <= 1) {
            out[i] = 0.0;
            continue;
        }
        std::map<int, double> sum;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum[assignments[j]] += dist(i, j);
        const double a = sum[assignments[i]] / static_cast<double>(sizes[assignments[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [cluster, total] : sum)
            if (cluster != assignments[i])
                b = std::min(b, total / static_cast<double>(sizes[cluster]));
        const double denom = std::max(a, b);
        out[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return out;
}

inline double ccdf_at(const std::vector<double>& values, double x) {
    std::size_t count = 0;
    for (const double v : values)
        if (v >= x) ++count;
    return static_cast<double>(count) / static_cast<double>(values.size());
}

inline double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

inline double population_stddev(const std::vector<double>& values) {
    const double mean = mean_of(values);
    double acc = 0.0;
    for (const double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

} // namespace oracles
