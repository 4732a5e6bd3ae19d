#pragma once

#include "sead/core/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sead {

inline constexpr int kStoreSchemaVersion = 1;

// A directory holding manifest.json plus one raw little-endian float32 file per sample.
struct VolumeStore {
    DatasetManifest manifest;
    std::vector<Volume> volumes; // parallel to manifest.samples

    Sample sample(std::size_t i) const;
    std::vector<Sample> samples() const;
};

void save_volume_store(const std::filesystem::path& dir, const VolumeStore& store);
VolumeStore load_volume_store(const std::filesystem::path& dir);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);

// Digest over manifest text and every volume's bytes, in manifest order.
std::uint64_t store_digest(const VolumeStore& store);

} // namespace sead
