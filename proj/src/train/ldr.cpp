#include "sead/train/ldr.hpp"

#include "sead/core/binary_io.hpp"
#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>

namespace sead::train {

using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'S', 'E', 'A', 'D', 'L', 'D', 'R', '1'};
}

bool LdrStore::is_train_domain(int domain) const {
    return domain >= 0 && domain < static_cast<int>(domain_table.size()) && domain_table[domain].train;
}

void LdrStore::validate() const {
    require(latent_dim > 0, ErrorCode::Format, "LDR store: latent dimension must be positive");
    const std::size_t n = patient_ids.size();
    require(diseases.size() == n && domains.size() == n, ErrorCode::Format, "LDR store: label arrays differ in length");
    require(values.size() == n * static_cast<std::size_t>(latent_dim), ErrorCode::Format,
            "LDR store: matrix has " + std::to_string(values.size()) + " entries, expected " +
                std::to_string(n * latent_dim));
    for (float v : values) require(std::isfinite(v), ErrorCode::Numeric, "LDR store: non-finite entry");
    for (int d : domains)
        require(d >= 0 && d < static_cast<int>(domain_table.size()), ErrorCode::Format,
                "LDR store: row references unknown domain " + std::to_string(d));
}

LdrStore add_noise(const LdrStore& ldrs, double sigma, std::uint64_t seed) {
    require(sigma >= 0.0, ErrorCode::InvalidArgument, "add_noise: sigma must be >= 0");
    LdrStore out = ldrs;
    if (sigma == 0.0) return out;
    Rng rng(derive_seed_tag(seed, "ldr-noise"));
    std::normal_distribution<double> n01(0.0, 1.0);
    for (float& v : out.values) v = static_cast<float>(static_cast<double>(v) + sigma * n01(rng));
    return out;
}

std::vector<unsigned char> serialize_ldr(const LdrStore& ldrs) {
    ldrs.validate();
    json domains = json::array();
    for (const auto& d : ldrs.domain_table)
        domains.push_back({{"index", d.index}, {"name", d.name}, {"role", d.train ? "train" : "test"}});
    const json schema{{"method", ldrs.method}, {"diseases", {"CN", "AD", "MCI"}}, {"domains", domains}};

    io::Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u64(ldrs.rows());
    w.u64(static_cast<std::uint64_t>(ldrs.latent_dim));
    w.str(schema.dump());
    w.floats(ldrs.values);
    for (std::size_t i = 0; i < ldrs.rows(); ++i) {
        w.str(ldrs.patient_ids[i]);
        w.u32(static_cast<std::uint32_t>(ldrs.diseases[i]));
        w.u32(static_cast<std::uint32_t>(ldrs.domains[i]));
    }
    return w.buffer();
}

LdrStore deserialize_ldr(std::span<const unsigned char> bytes) {
    io::Reader r(bytes, "LDR file");
    char magic[8];
    r.bytes(magic, sizeof magic);
    require(std::memcmp(magic, kMagic, sizeof kMagic) == 0, ErrorCode::Format, "LDR file: bad magic");
    const std::uint64_t n = r.u64();
    const std::uint64_t L = r.u64();
    require(L > 0 && L < (1u << 20) && n < (1ull << 32), ErrorCode::Format, "LDR file: implausible header");
    LdrStore out;
    out.latent_dim = static_cast<int>(L);
    try {
        const json schema = json::parse(r.str());
        out.method = schema.at("method").get<std::string>();
        for (const auto& d : schema.at("domains")) {
            out.domain_table.push_back(
                DomainId{d.at("index").get<int>(), d.at("name").get<std::string>(), d.at("role").get<std::string>() == "train"});
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("LDR file: corrupt label schema: ") + e.what());
    }
    out.values.resize(n * L);
    r.floats(out.values);
    for (std::uint64_t i = 0; i < n; ++i) {
        out.patient_ids.push_back(r.str());
        const std::uint32_t dis = r.u32();
        require(dis <= 2, ErrorCode::Format, "LDR file: bad disease code");
        out.diseases.push_back(static_cast<Disease>(dis));
        out.domains.push_back(static_cast<int>(r.u32()));
    }
    require(r.remaining() == 0, ErrorCode::Format, "LDR file: trailing bytes");
    out.validate();
    return out;
}

void save_ldr(const std::filesystem::path& path, const LdrStore& ldrs) { io::write_file(path, serialize_ldr(ldrs)); }

LdrStore load_ldr(const std::filesystem::path& path) { return deserialize_ldr(io::read_file(path)); }

} // namespace sead::train
