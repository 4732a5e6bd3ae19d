#pragma once

#include "sead/config/config.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace sead::app {

namespace fs = std::filesystem;

// On-disk layout under the output root.
struct Layout {
    fs::path root;

    fs::path data_dir() const { return root / "data"; }
    fs::path model_path(const std::string& method) const { return root / "models" / (method + ".ckpt"); }
    fs::path history_path(const std::string& method) const { return root / "models" / (method + ".loss.tsv"); }
    fs::path ldr_path(const std::string& name) const { return root / "ldr" / (name + ".ldr"); }
    fs::path report_json() const { return root / "report" / "report.json"; }
    fs::path report_text() const { return root / "report" / "report.txt"; }
    fs::path config_copy() const { return root / "config.json"; }
};

// Each command returns the human-readable summary it would print.
std::string gen_data(const config::ExperimentConfig& cfg, const Layout& out, bool force);
std::string train_method(const config::ExperimentConfig& cfg, const std::string& method, const Layout& out, bool force);
std::string extract(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& output, bool force);

struct HarmonizeOptions {
    std::optional<double> sigma; // NOISE; defaults to eval.noise_sigma
    std::optional<bool> eb;      // COMBAT; defaults to eval.combat_eb
    std::optional<bool> covariates;
    std::optional<fs::path> input;  // defaults to the CAE latents
    std::optional<fs::path> output; // defaults to ldr/<NAME>.ldr
};
std::string harmonize(const config::ExperimentConfig& cfg, const std::string& method, const Layout& out,
                      const HarmonizeOptions& opts, bool force);

std::string evaluate(const config::ExperimentConfig& cfg, const Layout& out, bool force);
std::string render_report(const fs::path& report_json);

} // namespace sead::app
