#pragma once

#include "sead/core/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sead::train {

// N x L latent matrix with per-row labels. Rows keep the order of the samples they came from.
struct LdrStore {
    std::string method;
    int latent_dim = 0;
    std::vector<float> values; // row-major N x L
    std::vector<std::string> patient_ids;
    std::vector<Disease> diseases;
    std::vector<int> domains;          // manifest domain index per row
    std::vector<DomainId> domain_table; // names and train/test roles

    std::size_t rows() const { return patient_ids.size(); }
    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(values).subspan(i * latent_dim, latent_dim);
    }
    bool is_train_domain(int domain) const;
    // Rows whose index satisfies keep, in order.
    template <typename Pred>
    LdrStore filter(Pred keep) const;
    void validate() const;
    bool operator==(const LdrStore&) const = default;
};

template <typename Pred>
LdrStore LdrStore::filter(Pred keep) const {
    LdrStore out;
    out.method = method;
    out.latent_dim = latent_dim;
    out.domain_table = domain_table;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (!keep(i)) continue;
        const auto r = row(i);
        out.values.insert(out.values.end(), r.begin(), r.end());
        out.patient_ids.push_back(patient_ids[i]);
        out.diseases.push_back(diseases[i]);
        out.domains.push_back(domains[i]);
    }
    return out;
}

// Gaussian perturbation of every entry, seeded.
LdrStore add_noise(const LdrStore& ldrs, double sigma, std::uint64_t seed);

std::vector<unsigned char> serialize_ldr(const LdrStore& ldrs);
LdrStore deserialize_ldr(std::span<const unsigned char> bytes);
void save_ldr(const std::filesystem::path& path, const LdrStore& ldrs);
LdrStore load_ldr(const std::filesystem::path& path);

} // namespace sead::train
