#pragma once

#include "sead/train/ldr.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace sead::eval {

// Row-major N x D points.
struct Points {
    std::vector<double> data;
    int n = 0;
    int dim = 0;
    std::span<const double> row(int i) const { return std::span<const double>(data).subspan(static_cast<std::size_t>(i) * dim, dim); }
};

struct KMeansResult {
    std::vector<int> labels;
    double inertia = 0.0;
};

// k-means++ seeding, Lloyd iterations; best of `restarts` by inertia.
KMeansResult kmeans(const Points& pts, int k, int restarts, std::uint64_t seed, int max_iter = 300);

// Mean silhouette coefficient (Euclidean); a singleton cluster contributes 0.
double silhouette_score(const Points& pts, std::span<const int> labels);

struct HCV {
    double homogeneity = 1.0;
    double completeness = 1.0;
    double v_measure = 1.0;
};
HCV homogeneity_completeness_v(std::span<const int> labels_true, std::span<const int> labels_pred);
double adjusted_rand_index(std::span<const int> labels_true, std::span<const int> labels_pred);
double mutual_information(std::span<const int> labels_true, std::span<const int> labels_pred);
double expected_mutual_information(std::span<const int> labels_true, std::span<const int> labels_pred);
// Arithmetic-mean normalisation.
double adjusted_mutual_info(std::span<const int> labels_true, std::span<const int> labels_pred);

struct ClusteringIndices {
    double silhouette = 0.0;
    double homogeneity = 0.0;
    double completeness = 0.0;
    double v_measure = 0.0;
    double ari = 0.0;
    double ami = 0.0;
    std::array<double, 6> as_array() const { return {silhouette, homogeneity, completeness, v_measure, ari, ami}; }
    bool operator==(const ClusteringIndices&) const = default;
};

struct ClusteringParams {
    bool cn_only = true;
    bool train_domains_only = true;
    int restarts = 10;
};

// k-means with k = number of domains present, scored against the domain labels.
ClusteringIndices clustering_indices(const train::LdrStore& ldrs, std::uint64_t seed, const ClusteringParams& params = {});

// Mean relative change in percent over indices whose baseline magnitude is >= 1e-9.
double clustering_reduction(const ClusteringIndices& method, const ClusteringIndices& baseline);

} // namespace sead::eval
