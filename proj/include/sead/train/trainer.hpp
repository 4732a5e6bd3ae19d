#pragma once

#include "sead/core/store.hpp"
#include "sead/nets/bundle.hpp"
#include "sead/nn/adam.hpp"
#include "sead/train/ldr.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sead::train {

struct TrainConfig {
    nets::Method method = nets::Method::SEADA;
    int epochs = 50;
    int batch_size = 16;
    double lr_stage1 = 1e-3;
    double lr_stage2 = 1e-4;
    double lr_stage3 = 1e-4;
    // Adam epsilon of the stage-3 optimizer. Larger values damp steps on weights whose
    // confusion gradient is tiny instead of normalizing them up to a full lr step.
    double eps_stage3 = 1e-8;
    double w_recon = 1.0;
    double w_style = 0.1;
    double w_conf = 0.1;
    std::uint64_t seed = 1;
    bool cn_only_stage3 = true;
    int checkpoint_every = 0; // epochs; 0 = only at the end

    void validate() const;
};

struct LossRecord {
    std::int64_t step = 0;
    int epoch = 0;
    int stage = 1;
    double recon_loss = 0.0;
    double style_loss = 0.0;
    double domain_loss = 0.0;
    double confusion_loss = 0.0;
};

// One minibatch: volumes stacked as (N, 1, D, H, W) plus per-row labels.
struct Batch {
    nn::Tensor x;
    std::vector<int> domain_class; // in [0, K)
    std::vector<Disease> disease;

    int size() const { return static_cast<int>(domain_class.size()); }
};

Batch make_batch(std::span<const Sample* const> samples, const nets::ArchConfig& arch,
                 const std::vector<int>& class_of_domain);

// Owns the per-stage optimizers; each stage touches only its own parameter set.
class Trainer {
public:
    Trainer(nets::ModelBundle& bundle, TrainConfig config);

    // Encoder, decoder (and style encoder): w_recon * MSE + w_style * CE(s, domain).
    LossRecord stage1_step(const Batch& batch);
    // Domain predictor only, on encoder output with no gradient to the encoder.
    LossRecord stage2_step(const Batch& batch);
    // Encoder only: w_conf * CE(uniform, softmax(g_D(z))). Every row must be CN.
    LossRecord stage3_step(const Batch& cn_batch);

    const TrainConfig& config() const { return config_; }

private:
    void check_finite(const LossRecord& rec, int stage) const;

    nets::ModelBundle& bundle_;
    TrainConfig config_;
    nn::Adam opt1_, opt2_, opt3_;
};

struct TrainResult {
    nets::ModelBundle bundle;
    std::vector<LossRecord> history;
};

using CheckpointFn = std::function<void(const nets::ModelBundle&, int epoch)>;

// Full alternating schedule. train_domains lists the manifest domains that become the K classes.
TrainResult train(std::span<const Sample> samples, const std::vector<DomainId>& train_domains,
                  nets::ArchConfig arch, const TrainConfig& config, const CheckpointFn& on_checkpoint = {});

int stages_per_batch(nets::Method method);
std::size_t batches_per_epoch(std::size_t n_samples, int batch_size);

std::string history_to_tsv(const std::vector<LossRecord>& history);

// Inference-mode encoding of every sample, in order.
LdrStore extract_ldrs(const nets::ModelBundle& bundle, std::span<const Sample> samples,
                      const std::vector<DomainId>& domain_table);

} // namespace sead::train
