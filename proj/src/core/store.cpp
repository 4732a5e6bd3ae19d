#include "sead/core/store.hpp"

#include "sead/core/binary_io.hpp"
#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <json.hpp>

namespace sead {

using nlohmann::json;

Sample VolumeStore::sample(std::size_t i) const {
    const auto& info = manifest.samples.at(i);
    return Sample{volumes.at(i), info.patient_id, info.disease, info.domain};
}

std::vector<Sample> VolumeStore::samples() const {
    std::vector<Sample> out;
    out.reserve(volumes.size());
    for (std::size_t i = 0; i < volumes.size(); ++i) out.push_back(sample(i));
    return out;
}

std::string manifest_to_json(const DatasetManifest& m) {
    json j;
    j["schema_version"] = kStoreSchemaVersion;
    j["shape"] = {m.shape.depth, m.shape.height, m.shape.width};
    j["voxel_size_mm"] = m.voxel_size_mm;
    j["num_domains"] = m.num_domains();
    json domains = json::array();
    for (const auto& d : m.domains) {
        domains.push_back({{"index", d.index}, {"name", d.name}, {"role", d.train ? "train" : "test"}});
    }
    j["domains"] = domains;
    json samples = json::array();
    for (const auto& s : m.samples) {
        samples.push_back({{"file", s.file},
                           {"patient_id", s.patient_id},
                           {"disease", std::string(to_string(s.disease))},
                           {"domain", s.domain}});
    }
    j["samples"] = samples;
    return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
    DatasetManifest m;
    try {
        const json j = json::parse(text);
        const int version = j.at("schema_version").get<int>();
        require(version == kStoreSchemaVersion, ErrorCode::Format,
                "unsupported manifest schema_version " + std::to_string(version));
        const auto& shape = j.at("shape");
        require(shape.is_array() && shape.size() == 3, ErrorCode::Format, "manifest shape must have 3 entries");
        m.shape = Shape3{shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>()};
        m.voxel_size_mm = j.at("voxel_size_mm").get<double>();
        for (const auto& d : j.at("domains")) {
            const std::string role = d.at("role").get<std::string>();
            require(role == "train" || role == "test", ErrorCode::Format, "domain role must be train or test");
            m.domains.push_back(DomainId{d.at("index").get<int>(), d.at("name").get<std::string>(), role == "train"});
        }
        for (const auto& s : j.at("samples")) {
            m.samples.push_back(SampleInfo{s.at("file").get<std::string>(), s.at("patient_id").get<std::string>(),
                                           parse_disease(s.at("disease").get<std::string>()),
                                           s.at("domain").get<int>()});
        }
        if (j.contains("num_domains")) {
            require(j["num_domains"].get<int>() == m.num_domains(), ErrorCode::Format,
                    "manifest num_domains disagrees with domains[]");
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("corrupt manifest: ") + e.what());
    }
    m.validate();
    return m;
}

void save_volume_store(const std::filesystem::path& dir, const VolumeStore& store) {
    store.manifest.validate();
    require(store.volumes.size() == store.manifest.samples.size(), ErrorCode::InvalidArgument,
            "store has " + std::to_string(store.volumes.size()) + " volumes but " +
                std::to_string(store.manifest.samples.size()) + " manifest entries");
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < store.volumes.size(); ++i) {
        const auto& info = store.manifest.samples[i];
        require(store.volumes[i].shape() == store.manifest.shape, ErrorCode::InvalidArgument,
                "sample '" + info.file + "' has shape " + to_string(store.volumes[i].shape()) +
                    ", manifest declares " + to_string(store.manifest.shape));
        io::write_file(dir / info.file, io::floats_to_le(store.volumes[i].data()));
    }
    io::write_text(dir / "manifest.json", manifest_to_json(store.manifest));
}

VolumeStore load_volume_store(const std::filesystem::path& dir) {
    VolumeStore store;
    store.manifest = manifest_from_json(io::read_text(dir / "manifest.json"));
    const auto& m = store.manifest;
    store.volumes.reserve(m.samples.size());
    for (const auto& info : m.samples) {
        const auto bytes = io::read_file(dir / info.file);
        const std::size_t expected = m.shape.voxels() * sizeof(float);
        require(bytes.size() == expected, ErrorCode::Format,
                "sample '" + info.file + "' (patient " + info.patient_id + ") has " + std::to_string(bytes.size()) +
                    " bytes, expected " + std::to_string(expected) + " for shape " + to_string(m.shape));
        store.volumes.emplace_back(m.shape, io::floats_from_le(bytes), m.voxel_size_mm);
    }
    return store;
}

std::uint64_t store_digest(const VolumeStore& store) {
    Digest d;
    const std::string text = manifest_to_json(store.manifest);
    d.update(text.data(), text.size());
    for (const auto& v : store.volumes) {
        const auto le = io::floats_to_le(v.data());
        d.update(le.data(), le.size());
    }
    return d.value();
}

} // namespace sead
