#pragma once

#include "sead/core/rng.hpp"
#include "sead/nn/tensor.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace sead::nn {

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    Param(std::string n, std::vector<int> shape) : name(std::move(n)), value(shape), grad(shape) {}
    void zero_grad() { grad.fill(0.0f); }
};

// A differentiable stage. infer() is pure; forward() additionally caches what backward() needs.
// backward() accumulates parameter gradients and returns the gradient w.r.t. the last forward input.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor infer(const Tensor& x) const = 0;
    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void collect(std::vector<Param*>& out) { (void)out; }
    virtual void init(Rng& rng) { (void)rng; }
};

struct ConvGeometry {
    int channels = 1;
    std::array<int, 3> big{};   // the finer grid
    std::array<int, 3> small{}; // the strided grid
    int kernel = 3;
    int stride = 2;
    int pad = 1;

    int small_voxels() const { return small[0] * small[1] * small[2]; }
    int big_voxels() const { return big[0] * big[1] * big[2]; }
    int rows() const { return channels * kernel * kernel * kernel; }
};

// cols[(c,kd,kh,kw), p_small] = big[c, p_small*stride - pad + k]
void im2col(const ConvGeometry& g, const float* big, float* cols);
// Adjoint of im2col: accumulates cols back onto the big grid.
void col2im(const ConvGeometry& g, const float* cols, float* big);

int conv_out_size(int in, int kernel, int stride, int pad);

class Conv3d final : public Layer {
public:
    Conv3d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad);
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect(std::vector<Param*>& out) override;
    void init(Rng& rng) override;
    // The first layer of a network never needs its input gradient.
    void set_input_grad(bool v) { input_grad_ = v; }

private:
    ConvGeometry geometry(const Tensor& x) const;
    int in_ch_, out_ch_, kernel_, stride_, pad_;
    Param weight_; // (out, in*k^3)
    Param bias_;
    Tensor x_;
    bool input_grad_ = true;
};

// Transposed convolution: the adjoint of a Conv3d with the same kernel/stride/pad, plus bias.
class ConvTranspose3d final : public Layer {
public:
    ConvTranspose3d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad, int output_pad);
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect(std::vector<Param*>& out) override;
    void init(Rng& rng) override;

private:
    ConvGeometry geometry(const std::vector<int>& in_shape) const;
    int in_ch_, out_ch_, kernel_, stride_, pad_, output_pad_;
    Param weight_; // (in, out*k^3)
    Param bias_;
    Tensor x_;
};

// Per-sample group normalization with a per-channel affine transform.
class GroupNorm final : public Layer {
public:
    GroupNorm(std::string name, int channels, int groups);
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect(std::vector<Param*>& out) override;
    void init(Rng& rng) override;

private:
    Tensor run(const Tensor& x, Tensor* xhat, std::vector<float>* inv_std) const;
    int channels_, groups_;
    Param gamma_, beta_;
    Tensor xhat_;
    std::vector<float> inv_std_;
    static constexpr float kEps = 1e-5f;
};

class SiLU final : public Layer {
public:
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor x_;
};

class Sigmoid final : public Layer {
public:
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor y_;
};

class Linear final : public Layer {
public:
    Linear(std::string name, int in, int out);
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect(std::vector<Param*>& out) override;
    void init(Rng& rng) override;

    Param& weight() { return weight_; }
    Param& bias() { return bias_; }
    int in_features() const { return in_; }
    int out_features() const { return out_; }

private:
    int in_, out_;
    Param weight_; // (out, in)
    Param bias_;
    Tensor x_;
};

// K independent fully connected maps; each batch row is routed through the branch named for it.
class BranchedLinear final {
public:
    BranchedLinear(std::string name, int in, int out, int branches);
    Tensor infer(const Tensor& x, const std::vector<int>& branch) const;
    Tensor forward(const Tensor& x, const std::vector<int>& branch);
    Tensor backward(const Tensor& dy);
    void collect(std::vector<Param*>& out);
    void init(Rng& rng);

    int branches() const { return static_cast<int>(weights_.size()); }
    int in_features() const { return in_; }
    int out_features() const { return out_; }
    std::size_t branch_param_count() const { return static_cast<std::size_t>(in_) * out_ + out_; }
    Param& weight(int b) { return weights_.at(b); }
    Param& bias(int b) { return biases_.at(b); }

private:
    void check(const Tensor& x, const std::vector<int>& branch) const;
    int in_, out_;
    std::vector<Param> weights_;
    std::vector<Param> biases_;
    Tensor x_;
    std::vector<int> branch_;
};

// Mean over all spatial positions: (N, C, ...) -> (N, C).
class GlobalAvgPool final : public Layer {
public:
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::vector<int> in_shape_;
};

// View change that keeps the batch dimension.
class Reshape final : public Layer {
public:
    explicit Reshape(std::vector<int> row_shape) : row_shape_(std::move(row_shape)) {}
    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::vector<int> row_shape_;
    std::vector<int> in_shape_;
};

class Sequential final : public Layer {
public:
    Sequential() = default;
    Sequential(Sequential&&) = default;
    Sequential& operator=(Sequential&&) = default;

    template <typename L, typename... Args>
    L& add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    Tensor infer(const Tensor& x) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect(std::vector<Param*>& out) override;
    void init(Rng& rng) override;
    bool empty() const { return layers_.empty(); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Row-wise softmax of (N, K) logits, computed in double for stability.
Tensor softmax_rows(const Tensor& logits);

std::size_t param_count(const std::vector<Param*>& params);

} // namespace sead::nn
