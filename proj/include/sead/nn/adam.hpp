#pragma once

#include "sead/nn/layers.hpp"

#include <unordered_map>
#include <vector>

namespace sead::nn {

// Adaptive-moment optimizer. State is keyed per parameter so several optimizers
// can own disjoint (or overlapping) parameter sets without interfering.
class Adam {
public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Param*>& params);
    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    struct Moments {
        std::vector<float> m, v;
        long t = 0;
    };
    double lr_, beta1_, beta2_, eps_;
    std::unordered_map<const Param*, Moments> state_;
};

} // namespace sead::nn
