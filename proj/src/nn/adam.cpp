#include "sead/nn/adam.hpp"

#include <cmath>

namespace sead::nn {

void Adam::step(const std::vector<Param*>& params) {
    for (Param* p : params) {
        auto& s = state_[p];
        const std::size_t n = p->value.size();
        if (s.m.empty()) {
            s.m.assign(n, 0.0f);
            s.v.assign(n, 0.0f);
        }
        ++s.t;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(s.t));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(s.t));
        const float step = static_cast<float>(lr_ / bc1);
        const float inv_bc2 = static_cast<float>(1.0 / bc2);
        const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
        const float eps = static_cast<float>(eps_);
        float* w = p->value.data();
        const float* g = p->grad.data();
        for (std::size_t i = 0; i < n; ++i) {
            s.m[i] = b1 * s.m[i] + (1.0f - b1) * g[i];
            s.v[i] = b2 * s.v[i] + (1.0f - b2) * g[i] * g[i];
            w[i] -= step * s.m[i] / (std::sqrt(s.v[i] * inv_bc2) + eps);
        }
    }
}

} // namespace sead::nn
