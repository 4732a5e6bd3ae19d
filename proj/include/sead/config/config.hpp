#pragma once

#include "sead/eval/evaluate.hpp"
#include "sead/nets/bundle.hpp"
#include "sead/phantom/phantom.hpp"
#include "sead/train/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sead::config {

inline constexpr int kConfigSchemaVersion = 1;

// Pipeline row kinds. NOISE and COMBAT transform CAE latents; the rest are trained models.
bool is_pipeline_method(const std::string& name);
bool is_trained_method(const std::string& name);

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::uint64_t seed = 1;
    std::string output_dir = "runs/default";
    phantom::PhantomConfig phantom; // phantom.seed is derived from seed
    nets::ArchConfig arch;          // domain names are filled from the phantom's training domains
    std::map<nets::Method, train::TrainConfig> train;
    std::vector<std::string> methods;
    eval::EvalSettings eval;

    // Sub-seeds, all functions of the master seed.
    std::uint64_t phantom_seed() const;
    std::uint64_t train_seed() const;
    std::uint64_t split_seed() const;
    std::uint64_t eval_seed() const;
    std::uint64_t noise_seed() const;

    // Phantom config with its derived seed filled in.
    phantom::PhantomConfig phantom_config() const;
    train::TrainConfig train_config(nets::Method m) const;
    void validate() const;
};

ExperimentConfig default_experiment_config();

// Strict JSON reader: every key is optional, unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Fully expanded form, accepted back by parse_experiment_config.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

} // namespace sead::config
