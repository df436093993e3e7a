#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace persona::clustering {

struct FeatureMatrix {
    std::vector<std::string> keys;          // one user key per row
    std::vector<std::vector<double>> rows;  // all rows share dimension d >= 1

    std::size_t size() const { return rows.size(); }
    std::size_t dim() const { return rows.empty() ? 0 : rows.front().size(); }
    void add(std::string key, std::vector<double> row);
    void validate() const;
};

struct ClusteringResult {
    int k = 0;
    std::vector<int> assignments;               // row -> cluster in [0, k)
    std::vector<std::vector<double>> centroids; // k centroids
    std::vector<double> per_point_silhouette;   // empty until silhouette runs
    double mean_silhouette = 0.0;
    std::uint64_t rng_seed = 0;
    int iterations_run = 0;
    std::vector<double> objective_trace; // sum of squared distances, per iteration
};

struct KSelectionResult {
    int best_k = 0;
    std::map<int, double> per_k; // k -> best-of-repeats mean silhouette
    int repeats = 0;
    std::uint64_t base_seed = 0;
    std::map<int, std::uint64_t> per_k_seed; // seed of the winning repeat
    ClusteringResult best;                   // winning clustering, silhouette filled
};

// Lloyd iterations from k-means++ seeding until the assignment fixpoint or
// max_iterations, Euclidean distance, deterministic given seed. Empty clusters
// are reseeded with the point farthest from its assigned centroid.
ClusteringResult kmeans(const FeatureMatrix& data, int k, std::uint64_t seed,
                        int max_iterations = 300);

struct SilhouetteResult {
    std::vector<double> per_point;
    double mean = 0.0;
};

// s(i) = (b - a) / max(a, b); a = mean intra-cluster distance excluding self,
// b = min over other clusters of the mean distance. Points in singleton
// clusters score 0, as does the a = b = 0 degenerate case.
SilhouetteResult silhouette(const FeatureMatrix& data, const std::vector<int>& assignments);

// For each k in [k_min, k_max] (clipped to rows - 1) runs `repeats` seeded
// kmeans rounds (seed + repeat index), keeps the round with the highest mean
// silhouette, and picks the k maximizing that value; ties go to the smaller k.
KSelectionResult select_k(const FeatureMatrix& data, int k_min = 2, int k_max = 20,
                          int repeats = 10, std::uint64_t seed = 0);

} // namespace persona::clustering
