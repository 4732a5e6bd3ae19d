#pragma once

#include "sead/core/store.hpp"
#include "sead/eval/clustering.hpp"
#include "sead/eval/probes.hpp"
#include "sead/eval/report.hpp"
#include "sead/nets/bundle.hpp"

#include <cstdint>
#include <string>

namespace sead::eval {

struct EvalSettings {
    double split_ratio = 0.8;
    int knn_k = 5;
    DomainProbeParams probe;
    ClusteringParams clustering;
    SsimParams ssim;
    double noise_sigma = 0.1;
    bool combat_eb = true;
    bool combat_covariates = true;
    bool combat_both = true; // also emit the row without covariates

    void validate() const;
};

struct Preservation {
    MeanStd rmse;
    MeanStd ssim;
};

// RMSE/SSIM between x and its reconstruction over the held-out patients of the training domains.
Preservation reconstruction_metrics(const nets::ModelBundle& bundle, const VolumeStore& store, const Split& split,
                                    const SsimParams& ssim = {});

// Probe and clustering columns of one method's LDRs. split_seed selects the same patient
// split that training used; eval_seed drives k-means.
MetricsRow evaluate_ldrs(const std::string& method, const train::LdrStore& ldrs, const EvalSettings& settings,
                         std::uint64_t split_seed, std::uint64_t eval_seed);

} // namespace sead::eval
