#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sead {

struct Shape3 {
    int depth = 0;
    int height = 0;
    int width = 0;

    std::size_t voxels() const {
        return static_cast<std::size_t>(depth) * static_cast<std::size_t>(height) *
               static_cast<std::size_t>(width);
    }
    bool positive() const { return depth > 0 && height > 0 && width > 0; }
    bool operator==(const Shape3&) const = default;
};

std::string to_string(const Shape3& s);

// 3D scalar intensity grid stored depth-major (d, h, w).
class Volume {
public:
    Volume() = default;
    explicit Volume(Shape3 shape, float fill = 0.0f, double voxel_size_mm = 2.0);
    Volume(Shape3 shape, std::vector<float> data, double voxel_size_mm = 2.0);

    const Shape3& shape() const { return shape_; }
    double voxel_size_mm() const { return voxel_size_mm_; }
    std::size_t size() const { return data_.size(); }

    float& at(int d, int h, int w) { return data_[index(d, h, w)]; }
    float at(int d, int h, int w) const { return data_[index(d, h, w)]; }
    std::size_t index(int d, int h, int w) const {
        return (static_cast<std::size_t>(d) * shape_.height + h) * shape_.width + w;
    }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    bool all_finite() const;
    bool operator==(const Volume& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    Shape3 shape_{};
    double voxel_size_mm_ = 2.0;
    std::vector<float> data_;
};

enum class Disease { CN = 0, AD = 1, MCI = 2 };

std::string_view to_string(Disease d);
Disease parse_disease(std::string_view s);

struct DomainId {
    int index = 0;
    std::string name;
    bool train = true;
    bool operator==(const DomainId&) const = default;
};

struct Sample {
    Volume volume;
    std::string patient_id;
    Disease disease = Disease::CN;
    int domain = 0;
};

struct SampleInfo {
    std::string file;
    std::string patient_id;
    Disease disease = Disease::CN;
    int domain = 0;
};

struct DatasetManifest {
    Shape3 shape;
    double voxel_size_mm = 2.0;
    std::vector<DomainId> domains;
    std::vector<SampleInfo> samples;

    int num_domains() const { return static_cast<int>(domains.size()); }
    std::vector<int> train_domains() const;
    std::vector<int> test_domains() const;
    bool is_train_domain(int index) const;
    void validate() const;
};

struct Split {
    std::set<std::string> train_ids;
    std::set<std::string> eval_ids;
};

Volume normalize_intensity(const Volume& vol, double sigma_mult = 4.0);

// Seeded partition of distinct patient ids; fraction in train is round(ratio * P).
Split split_patients(std::vector<std::string> patient_ids, double ratio, std::uint64_t seed);
// Split over the patients of the training domains only.
Split make_patient_split(const DatasetManifest& manifest, double ratio, std::uint64_t seed);

} // namespace sead
