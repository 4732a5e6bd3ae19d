#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sead::combat {

// Row-major N x p design covariates (no intercept column; it is added internally).
struct DesignInfo {
    std::vector<int> batches;
    std::vector<double> covariates;
    int num_covariates = 0;
};

struct CombatModel {
    int num_features = 0;
    int num_covariates = 0;
    bool eb = true;
    std::vector<int> batch_ids;      // sorted
    std::vector<double> beta;        // (1 + p) x L: intercept row then covariate rows
    std::vector<double> pooled_sd;   // L
    std::vector<double> gamma_star;  // B x L
    std::vector<double> delta_star;  // B x L
    int iterations = 0;              // largest fixed-point iteration count across batches
    bool operator==(const CombatModel&) const = default;
};

// Standard parametric location/scale batch model fitted feature by feature.
CombatModel combat_fit(std::span<const double> features, int num_features, const DesignInfo& design, bool eb = true);

// Rows of an unseen batch raise an error naming the batch.
std::vector<double> combat_apply(const CombatModel& model, std::span<const double> features,
                                 std::span<const int> batches, std::span<const double> covariates = {});

std::string combat_to_json(const CombatModel& model);
CombatModel combat_from_json(const std::string& text);
void save_combat(const std::filesystem::path& path, const CombatModel& model);
CombatModel load_combat(const std::filesystem::path& path);

} // namespace sead::combat
