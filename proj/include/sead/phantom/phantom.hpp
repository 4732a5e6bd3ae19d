#pragma once

#include "sead/core/store.hpp"
#include "sead/core/volume.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sead::phantom {

// Acquisition-context distortion: out = clip01(blur(vol) * gain + bias + noise).
struct DomainEffect {
    double gain = 1.0;
    double bias = 0.0;
    double noise_sigma = 0.0;
    double blur_sigma = 0.0; // voxels

    bool operator==(const DomainEffect&) const = default;
    void validate() const;
};

struct DiseaseEffect {
    double atrophy_factor = 1.0;            // 1 = none, 0 = annihilated core
    std::array<double, 3> lesion_center{};  // (d, h, w) voxel coordinates
    double lesion_radius = 1.0;             // voxels
};

// Width of the cosine falloff outside the lesion sphere.
inline constexpr double kLesionMargin = 2.0;

struct DomainSpec {
    std::string name;
    bool train = true;
    DomainEffect effect;
    int cn = 0;
    int ad = 0;
    int mci = 0;
};

struct PhantomConfig {
    Shape3 shape{32, 32, 32};
    double voxel_size_mm = 2.0;
    std::vector<DomainSpec> domains;
    std::uint64_t seed = 1;
    int scans_per_patient = 1;
    double ad_atrophy = 0.3;
    double mci_atrophy = 0.65;
    double lesion_radius_fraction = 0.14; // of the smallest dimension
    bool normalize = false;               // apply normalize_intensity to every scan

    void validate() const;
};

// 5 train + 2 held-out domains, 40+40 (train) and 20+20 (test) CN/AD patients per domain.
PhantomConfig default_phantom_config();

Volume generate_base_anatomy(std::uint64_t patient_seed, Shape3 shape);
Volume apply_disease(const Volume& vol, const DiseaseEffect& effect);
Volume apply_domain(const Volume& vol, const DomainEffect& effect, std::uint64_t scan_seed);

// Separable Gaussian, kernel truncated at 3 sigma, edge-replicated boundaries.
Volume gaussian_blur(const Volume& vol, double sigma);

// Lesion placement for a patient; lies inside the anatomy for every patient seed.
DiseaseEffect disease_effect_for(Disease disease, std::uint64_t patient_seed, const PhantomConfig& config);

VolumeStore generate_dataset(const PhantomConfig& config);

// Table-1-like count summary (domain x disease, with roles).
std::string count_table(const DatasetManifest& manifest);

} // namespace sead::phantom
