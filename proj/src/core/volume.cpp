#include "sead/core/volume.hpp"

#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sead {

std::string to_string(const Shape3& s) {
    return std::to_string(s.depth) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

Volume::Volume(Shape3 shape, float fill, double voxel_size_mm)
    : shape_(shape), voxel_size_mm_(voxel_size_mm), data_(shape.voxels(), fill) {
    require(shape.positive(), ErrorCode::InvalidArgument, "volume shape must be positive, got " + to_string(shape));
    require(voxel_size_mm > 0, ErrorCode::InvalidArgument, "voxel size must be positive");
}

Volume::Volume(Shape3 shape, std::vector<float> data, double voxel_size_mm)
    : shape_(shape), voxel_size_mm_(voxel_size_mm), data_(std::move(data)) {
    require(shape.positive(), ErrorCode::InvalidArgument, "volume shape must be positive, got " + to_string(shape));
    require(data_.size() == shape.voxels(), ErrorCode::InvalidArgument,
            "volume data has " + std::to_string(data_.size()) + " values, shape " + to_string(shape) + " needs " +
                std::to_string(shape.voxels()));
    require(voxel_size_mm > 0, ErrorCode::InvalidArgument, "voxel size must be positive");
}

bool Volume::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::string_view to_string(Disease d) {
    switch (d) {
    case Disease::CN: return "CN";
    case Disease::AD: return "AD";
    case Disease::MCI: return "MCI";
    }
    return "?";
}

Disease parse_disease(std::string_view s) {
    if (s == "CN") return Disease::CN;
    if (s == "AD") return Disease::AD;
    if (s == "MCI") return Disease::MCI;
    fail(ErrorCode::Format, "unknown disease label '" + std::string(s) + "'");
}

std::vector<int> DatasetManifest::train_domains() const {
    std::vector<int> out;
    for (const auto& d : domains)
        if (d.train) out.push_back(d.index);
    return out;
}

std::vector<int> DatasetManifest::test_domains() const {
    std::vector<int> out;
    for (const auto& d : domains)
        if (!d.train) out.push_back(d.index);
    return out;
}

bool DatasetManifest::is_train_domain(int index) const {
    return index >= 0 && index < num_domains() && domains[index].train;
}

void DatasetManifest::validate() const {
    require(shape.positive(), ErrorCode::Format, "manifest shape must be positive");
    require(!domains.empty(), ErrorCode::Format, "manifest declares no domains");
    for (std::size_t i = 0; i < domains.size(); ++i) {
        require(domains[i].index == static_cast<int>(i), ErrorCode::Format,
                "domain indices must be dense and ordered; domain '" + domains[i].name + "' has index " +
                    std::to_string(domains[i].index) + " at position " + std::to_string(i));
        for (std::size_t j = 0; j < i; ++j)
            require(domains[j].name != domains[i].name, ErrorCode::Format, "duplicate domain name '" + domains[i].name + "'");
    }
    std::map<std::string, std::pair<int, Disease>> patients;
    for (const auto& s : samples) {
        require(!s.patient_id.empty(), ErrorCode::Format, "sample '" + s.file + "' has an empty patient_id");
        require(s.domain >= 0 && s.domain < num_domains(), ErrorCode::Format,
                "sample '" + s.file + "' references unknown domain " + std::to_string(s.domain));
        auto [it, inserted] = patients.emplace(s.patient_id, std::make_pair(s.domain, s.disease));
        if (!inserted) {
            require(it->second.first == s.domain && it->second.second == s.disease, ErrorCode::Format,
                    "patient '" + s.patient_id + "' appears with inconsistent domain or disease");
        }
    }
}

Volume normalize_intensity(const Volume& vol, double sigma_mult) {
    require(sigma_mult > 0, ErrorCode::InvalidArgument, "sigma_mult must be positive");
    require(vol.all_finite(), ErrorCode::Numeric, "normalize_intensity: volume contains non-finite values");

    // Population standard deviation over strictly positive voxels (foreground).
    double sum = 0.0, sum_sq = 0.0, max_pos = 0.0;
    std::size_t n = 0;
    for (float v : vol.values()) {
        if (v > 0.0f) {
            sum += v;
            sum_sq += static_cast<double>(v) * v;
            max_pos = std::max(max_pos, static_cast<double>(v));
            ++n;
        }
    }
    Volume out = vol;
    if (n == 0) {
        for (float& v : out.values()) v = 0.0f; // only zeros and negatives: clamp, nothing to scale
        return out;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    double ceiling = sigma_mult * std::sqrt(var);
    if (!(ceiling > 0.0)) ceiling = max_pos; // constant foreground: σ is zero
    for (float& v : out.values()) {
        const double c = std::clamp(static_cast<double>(v), 0.0, ceiling);
        v = static_cast<float>(c / ceiling);
    }
    return out;
}

Split split_patients(std::vector<std::string> patient_ids, double ratio, std::uint64_t seed) {
    require(ratio > 0.0 && ratio < 1.0, ErrorCode::InvalidArgument, "split ratio must lie in (0, 1)");
    std::sort(patient_ids.begin(), patient_ids.end());
    patient_ids.erase(std::unique(patient_ids.begin(), patient_ids.end()), patient_ids.end());
    require(patient_ids.size() >= 2, ErrorCode::Precondition,
            "patient split needs at least 2 patients, got " + std::to_string(patient_ids.size()));

    Rng rng(derive_seed_tag(seed, "patient-split"));
    shuffle(patient_ids, rng);
    const auto total = static_cast<long>(patient_ids.size());
    const long n_train = std::clamp(std::lround(ratio * static_cast<double>(total)), 1L, total - 1);

    Split split;
    for (long i = 0; i < total; ++i) {
        (i < n_train ? split.train_ids : split.eval_ids).insert(patient_ids[static_cast<std::size_t>(i)]);
    }
    return split;
}

Split make_patient_split(const DatasetManifest& manifest, double ratio, std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(manifest.samples.size());
    for (const auto& s : manifest.samples)
        if (manifest.is_train_domain(s.domain)) ids.push_back(s.patient_id);
    return split_patients(std::move(ids), ratio, seed);
}

} // namespace sead
