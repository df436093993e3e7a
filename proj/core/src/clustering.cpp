#include "persona/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "persona/errors.hpp"
#include "persona/rng.hpp"

namespace persona::clustering {

void FeatureMatrix::add(std::string key, std::vector<double> row) {
    if (!rows.empty() && row.size() != dim())
        throw DataError("feature row for '" + key + "' has dimension " +
                        std::to_string(row.size()) + ", expected " + std::to_string(dim()));
    keys.push_back(std::move(key));
    rows.push_back(std::move(row));
}

void FeatureMatrix::validate() const {
    if (keys.size() != rows.size()) throw StructuralError("feature matrix keys/rows mismatch");
    if (!rows.empty() && dim() == 0) throw DataError("feature rows must have dimension >= 1");
    for (const auto& r : rows)
        if (r.size() != dim()) throw DataError("feature rows disagree on dimension");
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

// Nearest centroid; ties go to the lowest index so assignment is deterministic.
int nearest(const std::vector<std::vector<double>>& centroids, const std::vector<double>& point) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(centroids[c], point);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<std::vector<double>> kmeanspp_seed(const FeatureMatrix& data, int k, Rng& rng) {
    const std::size_t n = data.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(data.rows[static_cast<std::size_t>(rng.below(n))]);

    std::vector<double> d2(n);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, squared_distance(c, data.rows[i]));
            d2[i] = best;
            total += best;
        }
        std::size_t chosen;
        if (total <= 0.0) {
            // All points coincide with existing centroids; any pick is valid.
            chosen = static_cast<std::size_t>(rng.below(n));
        } else {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(data.rows[chosen]);
    }
    return centroids;
}

double objective(const FeatureMatrix& data, const std::vector<int>& assignments,
                 const std::vector<std::vector<double>>& centroids) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        acc += squared_distance(data.rows[i], centroids[static_cast<std::size_t>(assignments[i])]);
    return acc;
}

} // namespace

ClusteringResult kmeans(const FeatureMatrix& data, int k, std::uint64_t seed, int max_iterations) {
    data.validate();
    const std::size_t n = data.size();
    if (n < 2) throw DataError("clustering needs at least 2 rows, got " + std::to_string(n));
    if (k < 2) throw DataError("k must be at least 2, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > n)
        throw DataError("k=" + std::to_string(k) + " exceeds row count " + std::to_string(n));

    Rng rng(seed);
    ClusteringResult result;
    result.k = k;
    result.rng_seed = seed;
    result.centroids = kmeanspp_seed(data, k, rng);
    result.assignments.assign(n, -1);

    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int a = nearest(result.centroids, data.rows[i]);
            if (a != result.assignments[i]) {
                result.assignments[i] = a;
                changed = true;
            }
        }

        // Reseed empty clusters with the point farthest from its centroid so
        // k stays fixed for the silhouette comparison across k values.
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (const int a : result.assignments) ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t farthest = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(result.assignments[i])] <= 1) continue;
                const double d = squared_distance(
                    data.rows[i], result.centroids[static_cast<std::size_t>(result.assignments[i])]);
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            --counts[static_cast<std::size_t>(result.assignments[farthest])];
            result.assignments[farthest] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            changed = true;
        }

        result.iterations_run = iter + 1;

        // Recompute centroids as the mean of their members.
        std::vector<std::vector<double>> updated(static_cast<std::size_t>(k),
                                                 std::vector<double>(data.dim(), 0.0));
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignments[i]);
            ++sizes[c];
            for (std::size_t d = 0; d < data.dim(); ++d) updated[c][d] += data.rows[i][d];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
            for (std::size_t d = 0; d < data.dim(); ++d)
                updated[c][d] /= static_cast<double>(sizes[c]);
        result.centroids = std::move(updated);

        result.objective_trace.push_back(objective(data, result.assignments, result.centroids));
        if (!changed) break;
    }
    return result;
}

SilhouetteResult silhouette(const FeatureMatrix& data, const std::vector<int>& assignments) {
    data.validate();
    const std::size_t n = data.size();
    if (assignments.size() != n) throw StructuralError("assignment count does not match rows");

    int k = 0;
    for (const int a : assignments) {
        if (a < 0) throw StructuralError("negative cluster assignment");
        k = std::max(k, a + 1);
    }
    std::vector<std::size_t> cluster_size(static_cast<std::size_t>(k), 0);
    for (const int a : assignments) ++cluster_size[static_cast<std::size_t>(a)];
    const auto nonempty = static_cast<int>(
        std::count_if(cluster_size.begin(), cluster_size.end(), [](std::size_t s) { return s > 0; }));
    if (nonempty < 2) throw DataError("silhouette needs at least 2 nonempty clusters");

    SilhouetteResult out;
    out.per_point.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignments[i]);
        if (cluster_size[own] <= 1) {
            out.per_point[i] = 0.0; // singleton convention
            continue;
        }
        std::vector<double> dist_sum(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            dist_sum[static_cast<std::size_t>(assignments[j])] +=
                std::sqrt(squared_distance(data.rows[i], data.rows[j]));
        }
        const double a = dist_sum[own] / static_cast<double>(cluster_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c == own || cluster_size[c] == 0) continue;
            b = std::min(b, dist_sum[c] / static_cast<double>(cluster_size[c]));
        }
        const double denom = std::max(a, b);
        out.per_point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    double total = 0.0;
    for (const double s : out.per_point) total += s;
    out.mean = total / static_cast<double>(n);
    return out;
}

KSelectionResult select_k(const FeatureMatrix& data, int k_min, int k_max, int repeats,
                          std::uint64_t seed) {
    data.validate();
    if (data.size() < 3) throw DataError("k selection needs at least 3 rows");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    const int feasible_max = std::min<int>(k_max, static_cast<int>(data.size()) - 1);
    if (k_min < 2) throw ConfigError("k_min must be at least 2");
    if (feasible_max < k_min)
        throw DataError("no feasible k in [" + std::to_string(k_min) + ", " +
                        std::to_string(k_max) + "] for " + std::to_string(data.size()) + " rows");

    KSelectionResult out;
    out.repeats = repeats;
    out.base_seed = seed;
    bool have_best = false;
    for (int k = k_min; k <= feasible_max; ++k) {
        double best_mean = -std::numeric_limits<double>::infinity();
        ClusteringResult best_run;
        std::uint64_t best_seed = 0;
        for (int r = 0; r < repeats; ++r) {
            const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
            ClusteringResult run = kmeans(data, k, run_seed);
            const SilhouetteResult sil = silhouette(data, run.assignments);
            if (sil.mean > best_mean) {
                best_mean = sil.mean;
                run.per_point_silhouette = sil.per_point;
                run.mean_silhouette = sil.mean;
                best_run = std::move(run);
                best_seed = run_seed;
            }
        }
        out.per_k[k] = best_mean;
        out.per_k_seed[k] = best_seed;
        if (!have_best || best_mean > out.per_k[out.best_k]) {
            out.best_k = k;
            out.best = best_run;
            have_best = true;
        }
    }
    return out;
}

} // namespace persona::clustering
