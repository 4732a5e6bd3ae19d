#include "sead/nn/layers.hpp"

#include "sead/core/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace sead::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void init_uniform(Tensor& t, double bound, Rng& rng) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (float& v : t.values()) v = static_cast<float>(u(rng));
}

void expect_rank(const Tensor& x, int rank, const char* who) {
    require(x.rank() == rank, ErrorCode::InvalidArgument,
            std::string(who) + ": expected rank-" + std::to_string(rank) + " input, got " + shape_string(x.shape()));
}

} // namespace

int conv_out_size(int in, int kernel, int stride, int pad) { return (in + 2 * pad - kernel) / stride + 1; }

void im2col(const ConvGeometry& g, const float* big, float* cols) {
    const int k = g.kernel;
    const int P = g.small_voxels();
    const int BD = g.big[0], BH = g.big[1], BW = g.big[2];
    const int SD = g.small[0], SH = g.small[1], SW = g.small[2];
    for (int c = 0; c < g.channels; ++c) {
        const float* src = big + static_cast<std::size_t>(c) * g.big_voxels();
        for (int kd = 0; kd < k; ++kd) {
            for (int kh = 0; kh < k; ++kh) {
                for (int kw = 0; kw < k; ++kw) {
                    float* dst = cols + static_cast<std::size_t>(((c * k + kd) * k + kh) * k + kw) * P;
                    for (int od = 0; od < SD; ++od) {
                        const int id = od * g.stride - g.pad + kd;
                        for (int oh = 0; oh < SH; ++oh) {
                            const int ih = oh * g.stride - g.pad + kh;
                            float* row = dst + (od * SH + oh) * SW;
                            if (id < 0 || id >= BD || ih < 0 || ih >= BH) {
                                std::fill(row, row + SW, 0.0f);
                                continue;
                            }
                            const float* line = src + (static_cast<std::size_t>(id) * BH + ih) * BW;
                            for (int ow = 0; ow < SW; ++ow) {
                                const int iw = ow * g.stride - g.pad + kw;
                                row[ow] = (iw >= 0 && iw < BW) ? line[iw] : 0.0f;
                            }
                        }
                    }
                }
            }
        }
    }
}

void col2im(const ConvGeometry& g, const float* cols, float* big) {
    const int k = g.kernel;
    const int P = g.small_voxels();
    const int BD = g.big[0], BH = g.big[1], BW = g.big[2];
    const int SD = g.small[0], SH = g.small[1], SW = g.small[2];
    for (int c = 0; c < g.channels; ++c) {
        float* dst = big + static_cast<std::size_t>(c) * g.big_voxels();
        for (int kd = 0; kd < k; ++kd) {
            for (int kh = 0; kh < k; ++kh) {
                for (int kw = 0; kw < k; ++kw) {
                    const float* src = cols + static_cast<std::size_t>(((c * k + kd) * k + kh) * k + kw) * P;
                    for (int od = 0; od < SD; ++od) {
                        const int id = od * g.stride - g.pad + kd;
                        if (id < 0 || id >= BD) continue;
                        for (int oh = 0; oh < SH; ++oh) {
                            const int ih = oh * g.stride - g.pad + kh;
                            if (ih < 0 || ih >= BH) continue;
                            const float* row = src + (od * SH + oh) * SW;
                            float* line = dst + (static_cast<std::size_t>(id) * BH + ih) * BW;
                            for (int ow = 0; ow < SW; ++ow) {
                                const int iw = ow * g.stride - g.pad + kw;
                                if (iw >= 0 && iw < BW) line[iw] += row[ow];
                            }
                        }
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Conv3d

Conv3d::Conv3d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad),
      weight_(name + ".weight", {out_ch, in_ch * kernel * kernel * kernel}), bias_(name + ".bias", {out_ch}) {}

ConvGeometry Conv3d::geometry(const Tensor& x) const {
    expect_rank(x, 5, "Conv3d");
    require(x.dim(1) == in_ch_, ErrorCode::InvalidArgument,
            "Conv3d: expected " + std::to_string(in_ch_) + " channels, got " + shape_string(x.shape()));
    ConvGeometry g;
    g.channels = in_ch_;
    g.kernel = kernel_;
    g.stride = stride_;
    g.pad = pad_;
    for (int a = 0; a < 3; ++a) {
        g.big[a] = x.dim(2 + a);
        g.small[a] = conv_out_size(g.big[a], kernel_, stride_, pad_);
        require(g.small[a] > 0, ErrorCode::InvalidArgument, "Conv3d: input too small " + shape_string(x.shape()));
    }
    return g;
}

Tensor Conv3d::infer(const Tensor& x) const {
    const ConvGeometry g = geometry(x);
    const int N = x.dim(0), P = g.small_voxels();
    Tensor y({N, out_ch_, g.small[0], g.small[1], g.small[2]});
    Buffer cols(static_cast<std::size_t>(g.rows()) * P);
    const CMapMat W(weight_.value.data(), out_ch_, g.rows());
    const Eigen::Map<const Eigen::VectorXf> b(bias_.value.data(), out_ch_);
    for (int n = 0; n < N; ++n) {
        im2col(g, x.data() + static_cast<std::size_t>(n) * x.row_size(), cols.data());
        MapMat out(y.data() + static_cast<std::size_t>(n) * y.row_size(), out_ch_, P);
        out.noalias() = W * CMapMat(cols.data(), g.rows(), P);
        out.colwise() += b;
    }
    return y;
}

Tensor Conv3d::forward(const Tensor& x) {
    x_ = x;
    return infer(x);
}

Tensor Conv3d::backward(const Tensor& dy) {
    const ConvGeometry g = geometry(x_);
    const int N = x_.dim(0), P = g.small_voxels();
    require(dy.size() == static_cast<std::size_t>(N) * out_ch_ * P, ErrorCode::InvalidArgument,
            "Conv3d: gradient shape mismatch");
    Tensor dx(x_.shape());
    Buffer cols(static_cast<std::size_t>(g.rows()) * P);
    Buffer dcols(input_grad_ ? cols.size() : 0);
    const CMapMat W(weight_.value.data(), out_ch_, g.rows());
    MapMat dW(weight_.grad.data(), out_ch_, g.rows());
    Eigen::Map<Eigen::VectorXf> db(bias_.grad.data(), out_ch_);
    for (int n = 0; n < N; ++n) {
        im2col(g, x_.data() + static_cast<std::size_t>(n) * x_.row_size(), cols.data());
        const CMapMat dY(dy.data() + static_cast<std::size_t>(n) * out_ch_ * P, out_ch_, P);
        dW.noalias() += dY * CMapMat(cols.data(), g.rows(), P).transpose();
        db += dY.rowwise().sum();
        if (input_grad_) {
            MapMat(dcols.data(), g.rows(), P).noalias() = W.transpose() * dY;
            col2im(g, dcols.data(), dx.data() + static_cast<std::size_t>(n) * dx.row_size());
        }
    }
    return dx;
}

void Conv3d::collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

void Conv3d::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch_) * kernel_ * kernel_ * kernel_);
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
}

// ---------------------------------------------------------------------------
// ConvTranspose3d

ConvTranspose3d::ConvTranspose3d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
                                 int output_pad)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad), output_pad_(output_pad),
      weight_(name + ".weight", {in_ch, out_ch * kernel * kernel * kernel}), bias_(name + ".bias", {out_ch}) {
    require(output_pad >= 0 && output_pad < stride, ErrorCode::InvalidArgument,
            "ConvTranspose3d: output_pad must lie in [0, stride)");
}

ConvGeometry ConvTranspose3d::geometry(const std::vector<int>& in_shape) const {
    require(in_shape.size() == 5 && in_shape[1] == in_ch_, ErrorCode::InvalidArgument,
            "ConvTranspose3d: expected (N, " + std::to_string(in_ch_) + ", D, H, W), got " + shape_string(in_shape));
    ConvGeometry g;
    g.channels = out_ch_;
    g.kernel = kernel_;
    g.stride = stride_;
    g.pad = pad_;
    for (int a = 0; a < 3; ++a) {
        g.small[a] = in_shape[2 + a];
        g.big[a] = (g.small[a] - 1) * stride_ - 2 * pad_ + kernel_ + output_pad_;
    }
    return g;
}

Tensor ConvTranspose3d::infer(const Tensor& x) const {
    const ConvGeometry g = geometry(x.shape());
    const int N = x.dim(0), P = g.small_voxels();
    Tensor y({N, out_ch_, g.big[0], g.big[1], g.big[2]});
    Buffer cols(static_cast<std::size_t>(g.rows()) * P);
    const CMapMat W(weight_.value.data(), in_ch_, g.rows());
    for (int n = 0; n < N; ++n) {
        const CMapMat xn(x.data() + static_cast<std::size_t>(n) * x.row_size(), in_ch_, P);
        MapMat(cols.data(), g.rows(), P).noalias() = W.transpose() * xn;
        float* yn = y.data() + static_cast<std::size_t>(n) * y.row_size();
        col2im(g, cols.data(), yn);
        for (int c = 0; c < out_ch_; ++c) {
            float* ch = yn + static_cast<std::size_t>(c) * g.big_voxels();
            const float b = bias_.value[c];
            for (int i = 0; i < g.big_voxels(); ++i) ch[i] += b;
        }
    }
    return y;
}

Tensor ConvTranspose3d::forward(const Tensor& x) {
    x_ = x;
    return infer(x);
}

Tensor ConvTranspose3d::backward(const Tensor& dy) {
    const ConvGeometry g = geometry(x_.shape());
    const int N = x_.dim(0), P = g.small_voxels();
    require(dy.size() == static_cast<std::size_t>(N) * out_ch_ * g.big_voxels(), ErrorCode::InvalidArgument,
            "ConvTranspose3d: gradient shape mismatch");
    Tensor dx(x_.shape());
    Buffer dcols(static_cast<std::size_t>(g.rows()) * P);
    const CMapMat W(weight_.value.data(), in_ch_, g.rows());
    MapMat dW(weight_.grad.data(), in_ch_, g.rows());
    for (int n = 0; n < N; ++n) {
        const float* dyn = dy.data() + static_cast<std::size_t>(n) * out_ch_ * g.big_voxels();
        im2col(g, dyn, dcols.data());
        const CMapMat dC(dcols.data(), g.rows(), P);
        const CMapMat xn(x_.data() + static_cast<std::size_t>(n) * x_.row_size(), in_ch_, P);
        dW.noalias() += xn * dC.transpose();
        MapMat(dx.data() + static_cast<std::size_t>(n) * dx.row_size(), in_ch_, P).noalias() = W * dC;
        for (int c = 0; c < out_ch_; ++c) {
            const float* ch = dyn + static_cast<std::size_t>(c) * g.big_voxels();
            double s = 0.0;
            for (int i = 0; i < g.big_voxels(); ++i) s += ch[i];
            bias_.grad[c] += static_cast<float>(s);
        }
    }
    return dx;
}

void ConvTranspose3d::collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

void ConvTranspose3d::init(Rng& rng) {
    // Each output voxel receives about in*(k/stride)^3 contributions.
    const double taps = static_cast<double>(in_ch_) * std::pow(static_cast<double>(kernel_) / stride_, 3);
    const double bound = 1.0 / std::sqrt(taps);
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
}

// ---------------------------------------------------------------------------
// GroupNorm

GroupNorm::GroupNorm(std::string name, int channels, int groups)
    : channels_(channels), groups_(groups), gamma_(name + ".gamma", {channels}), beta_(name + ".beta", {channels}) {
    require(groups > 0 && channels % groups == 0, ErrorCode::InvalidArgument,
            "GroupNorm: channels must be divisible by groups");
    gamma_.value.fill(1.0f);
}

Tensor GroupNorm::run(const Tensor& x, Tensor* xhat, std::vector<float>* inv_std) const {
    require(x.rank() >= 2 && x.dim(1) == channels_, ErrorCode::InvalidArgument,
            "GroupNorm: expected " + std::to_string(channels_) + " channels, got " + shape_string(x.shape()));
    const int N = x.dim(0);
    const std::size_t S = x.row_size() / channels_;
    const int cg = channels_ / groups_;
    const std::size_t M = S * cg;
    Tensor y(x.shape());
    if (xhat) *xhat = Tensor(x.shape());
    if (inv_std) inv_std->assign(static_cast<std::size_t>(N) * groups_, 0.0f);
    for (int n = 0; n < N; ++n) {
        for (int g = 0; g < groups_; ++g) {
            const std::size_t off = static_cast<std::size_t>(n) * x.row_size() + g * M;
            double sum = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                const double v = x[off + i];
                sum += v;
                sq += v * v;
            }
            const double mean = sum / static_cast<double>(M);
            const double var = std::max(0.0, sq / static_cast<double>(M) - mean * mean);
            const float istd = static_cast<float>(1.0 / std::sqrt(var + kEps));
            if (inv_std) (*inv_std)[static_cast<std::size_t>(n) * groups_ + g] = istd;
            for (int c = 0; c < cg; ++c) {
                const int ch = g * cg + c;
                const float ga = gamma_.value[ch], be = beta_.value[ch];
                for (std::size_t s = 0; s < S; ++s) {
                    const std::size_t i = off + c * S + s;
                    const float h = static_cast<float>((x[i] - mean) * istd);
                    if (xhat) (*xhat)[i] = h;
                    y[i] = ga * h + be;
                }
            }
        }
    }
    return y;
}

Tensor GroupNorm::infer(const Tensor& x) const { return run(x, nullptr, nullptr); }

Tensor GroupNorm::forward(const Tensor& x) { return run(x, &xhat_, &inv_std_); }

Tensor GroupNorm::backward(const Tensor& dy) {
    require(dy.shape() == xhat_.shape(), ErrorCode::InvalidArgument, "GroupNorm: gradient shape mismatch");
    const int N = xhat_.dim(0);
    const std::size_t S = xhat_.row_size() / channels_;
    const int cg = channels_ / groups_;
    const std::size_t M = S * cg;
    Tensor dx(xhat_.shape());
    for (int n = 0; n < N; ++n) {
        for (int g = 0; g < groups_; ++g) {
            const std::size_t off = static_cast<std::size_t>(n) * xhat_.row_size() + g * M;
            double sum_dh = 0.0, sum_dh_h = 0.0;
            for (int c = 0; c < cg; ++c) {
                const int ch = g * cg + c;
                double dga = 0.0, dbe = 0.0;
                for (std::size_t s = 0; s < S; ++s) {
                    const std::size_t i = off + c * S + s;
                    const double d = dy[i];
                    dga += d * xhat_[i];
                    dbe += d;
                    const double dh = d * gamma_.value[ch];
                    sum_dh += dh;
                    sum_dh_h += dh * xhat_[i];
                }
                gamma_.grad[ch] += static_cast<float>(dga);
                beta_.grad[ch] += static_cast<float>(dbe);
            }
            const double istd = inv_std_[static_cast<std::size_t>(n) * groups_ + g];
            const double mean_dh = sum_dh / static_cast<double>(M);
            const double mean_dh_h = sum_dh_h / static_cast<double>(M);
            for (int c = 0; c < cg; ++c) {
                const int ch = g * cg + c;
                for (std::size_t s = 0; s < S; ++s) {
                    const std::size_t i = off + c * S + s;
                    const double dh = dy[i] * gamma_.value[ch];
                    dx[i] = static_cast<float>(istd * (dh - mean_dh - xhat_[i] * mean_dh_h));
                }
            }
        }
    }
    return dx;
}

void GroupNorm::collect(std::vector<Param*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

void GroupNorm::init(Rng&) {
    gamma_.value.fill(1.0f);
    beta_.value.fill(0.0f);
}

// ---------------------------------------------------------------------------
// Activations

namespace {
inline float logistic(float x) { return 1.0f / (1.0f + std::exp(-x)); }
} // namespace

Tensor SiLU::infer(const Tensor& x) const {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * logistic(x[i]);
    return y;
}

Tensor SiLU::forward(const Tensor& x) {
    x_ = x;
    return infer(x);
}

Tensor SiLU::backward(const Tensor& dy) {
    require(dy.size() == x_.size(), ErrorCode::InvalidArgument, "SiLU: gradient shape mismatch");
    Tensor dx(x_.shape());
    for (std::size_t i = 0; i < x_.size(); ++i) {
        const float s = logistic(x_[i]);
        dx[i] = dy[i] * s * (1.0f + x_[i] * (1.0f - s));
    }
    return dx;
}

Tensor Sigmoid::infer(const Tensor& x) const {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = logistic(x[i]);
    return y;
}

Tensor Sigmoid::forward(const Tensor& x) {
    y_ = infer(x);
    return y_;
}

Tensor Sigmoid::backward(const Tensor& dy) {
    require(dy.size() == y_.size(), ErrorCode::InvalidArgument, "Sigmoid: gradient shape mismatch");
    Tensor dx(y_.shape());
    for (std::size_t i = 0; i < y_.size(); ++i) dx[i] = dy[i] * y_[i] * (1.0f - y_[i]);
    return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::string name, int in, int out)
    : in_(in), out_(out), weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {}

Tensor Linear::infer(const Tensor& x) const {
    require(x.rank() >= 1 && x.row_size() == static_cast<std::size_t>(in_), ErrorCode::InvalidArgument,
            "Linear: expected rows of " + std::to_string(in_) + " features, got " + shape_string(x.shape()));
    const int N = x.dim(0);
    Tensor y({N, out_});
    const CMapMat X(x.data(), N, in_);
    const CMapMat W(weight_.value.data(), out_, in_);
    MapMat Y(y.data(), N, out_);
    Y.noalias() = X * W.transpose();
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bias_.value.data(), out_);
    return y;
}

Tensor Linear::forward(const Tensor& x) {
    x_ = x;
    return infer(x);
}

Tensor Linear::backward(const Tensor& dy) {
    const int N = x_.dim(0);
    require(dy.size() == static_cast<std::size_t>(N) * out_, ErrorCode::InvalidArgument,
            "Linear: gradient shape mismatch");
    const CMapMat X(x_.data(), N, in_);
    const CMapMat dY(dy.data(), N, out_);
    MapMat(weight_.grad.data(), out_, in_).noalias() += dY.transpose() * X;
    Eigen::Map<Eigen::RowVectorXf>(bias_.grad.data(), out_) += dY.colwise().sum();
    Tensor dx(x_.shape());
    MapMat(dx.data(), N, in_).noalias() = dY * CMapMat(weight_.value.data(), out_, in_);
    return dx;
}

void Linear::collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

void Linear::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
}

// ---------------------------------------------------------------------------
// BranchedLinear

BranchedLinear::BranchedLinear(std::string name, int in, int out, int branches) : in_(in), out_(out) {
    require(branches >= 1, ErrorCode::InvalidArgument, "BranchedLinear needs at least one branch");
    for (int b = 0; b < branches; ++b) {
        const std::string prefix = branches == 1 ? name : name + ".branch" + std::to_string(b);
        weights_.emplace_back(prefix + ".weight", std::vector<int>{out, in});
        biases_.emplace_back(prefix + ".bias", std::vector<int>{out});
    }
}

void BranchedLinear::check(const Tensor& x, const std::vector<int>& branch) const {
    require(x.rank() >= 1 && x.row_size() == static_cast<std::size_t>(in_), ErrorCode::InvalidArgument,
            "BranchedLinear: expected rows of " + std::to_string(in_) + " features, got " + shape_string(x.shape()));
    require(branch.size() == static_cast<std::size_t>(x.dim(0)), ErrorCode::InvalidArgument,
            "BranchedLinear: one branch index per row required");
    for (int b : branch) {
        require(b >= 0 && b < branches(), ErrorCode::InvalidArgument,
                "BranchedLinear: branch " + std::to_string(b) + " does not exist (" + std::to_string(branches()) +
                    " branches)");
    }
}

Tensor BranchedLinear::infer(const Tensor& x, const std::vector<int>& branch) const {
    check(x, branch);
    const int N = x.dim(0);
    Tensor y({N, out_});
    for (int n = 0; n < N; ++n) {
        const int b = branch[n];
        const CMapMat W(weights_[b].value.data(), out_, in_);
        const Eigen::Map<const Eigen::VectorXf> xr(x.data() + static_cast<std::size_t>(n) * in_, in_);
        Eigen::Map<Eigen::VectorXf> yr(y.data() + static_cast<std::size_t>(n) * out_, out_);
        yr.noalias() = W * xr;
        yr += Eigen::Map<const Eigen::VectorXf>(biases_[b].value.data(), out_);
    }
    return y;
}

Tensor BranchedLinear::forward(const Tensor& x, const std::vector<int>& branch) {
    x_ = x;
    branch_ = branch;
    return infer(x, branch);
}

Tensor BranchedLinear::backward(const Tensor& dy) {
    const int N = x_.dim(0);
    require(dy.size() == static_cast<std::size_t>(N) * out_, ErrorCode::InvalidArgument,
            "BranchedLinear: gradient shape mismatch");
    Tensor dx(x_.shape());
    for (int n = 0; n < N; ++n) {
        const int b = branch_[n];
        const Eigen::Map<const Eigen::VectorXf> xr(x_.data() + static_cast<std::size_t>(n) * in_, in_);
        const Eigen::Map<const Eigen::VectorXf> dyr(dy.data() + static_cast<std::size_t>(n) * out_, out_);
        MapMat(weights_[b].grad.data(), out_, in_).noalias() += dyr * xr.transpose();
        Eigen::Map<Eigen::VectorXf>(biases_[b].grad.data(), out_) += dyr;
        Eigen::Map<Eigen::VectorXf>(dx.data() + static_cast<std::size_t>(n) * in_, in_).noalias() =
            CMapMat(weights_[b].value.data(), out_, in_).transpose() * dyr;
    }
    return dx;
}

void BranchedLinear::collect(std::vector<Param*>& out) {
    for (std::size_t b = 0; b < weights_.size(); ++b) {
        out.push_back(&weights_[b]);
        out.push_back(&biases_[b]);
    }
}

void BranchedLinear::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    for (std::size_t b = 0; b < weights_.size(); ++b) {
        init_uniform(weights_[b].value, bound, rng);
        init_uniform(biases_[b].value, bound, rng);
    }
}

// ---------------------------------------------------------------------------
// Pooling / reshape / sequential

Tensor GlobalAvgPool::infer(const Tensor& x) const {
    require(x.rank() >= 3, ErrorCode::InvalidArgument, "GlobalAvgPool: expected (N, C, ...) input");
    const int N = x.dim(0), C = x.dim(1);
    const std::size_t S = x.row_size() / C;
    Tensor y({N, C});
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            const float* p = x.data() + static_cast<std::size_t>(n) * x.row_size() + c * S;
            double s = 0.0;
            for (std::size_t i = 0; i < S; ++i) s += p[i];
            y[static_cast<std::size_t>(n) * C + c] = static_cast<float>(s / static_cast<double>(S));
        }
    }
    return y;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
    in_shape_ = x.shape();
    return infer(x);
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
    Tensor dx(in_shape_);
    const int N = in_shape_[0], C = in_shape_[1];
    const std::size_t S = dx.row_size() / C;
    const float inv = 1.0f / static_cast<float>(S);
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            const float g = dy[static_cast<std::size_t>(n) * C + c] * inv;
            float* p = dx.data() + static_cast<std::size_t>(n) * dx.row_size() + c * S;
            std::fill(p, p + S, g);
        }
    }
    return dx;
}

Tensor Reshape::infer(const Tensor& x) const {
    std::vector<int> shape{x.dim(0)};
    shape.insert(shape.end(), row_shape_.begin(), row_shape_.end());
    return x.reshaped(std::move(shape));
}

Tensor Reshape::forward(const Tensor& x) {
    in_shape_ = x.shape();
    return infer(x);
}

Tensor Reshape::backward(const Tensor& dy) { return dy.reshaped(in_shape_); }

Tensor Sequential::infer(const Tensor& x) const {
    Tensor h = x;
    for (const auto& l : layers_) h = l->infer(h);
    return h;
}

Tensor Sequential::forward(const Tensor& x) {
    Tensor h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
}

Tensor Sequential::backward(const Tensor& dy) {
    Tensor g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

void Sequential::collect(std::vector<Param*>& out) {
    for (auto& l : layers_) l->collect(out);
}

void Sequential::init(Rng& rng) {
    for (auto& l : layers_) l->init(rng);
}

Tensor softmax_rows(const Tensor& logits) {
    require(logits.rank() == 2, ErrorCode::InvalidArgument, "softmax_rows expects (N, K) logits");
    const int N = logits.dim(0), K = logits.dim(1);
    Tensor p(logits.shape());
    for (int n = 0; n < N; ++n) {
        const float* row = logits.data() + static_cast<std::size_t>(n) * K;
        const double mx = *std::max_element(row, row + K);
        double total = 0.0;
        for (int k = 0; k < K; ++k) total += std::exp(row[k] - mx);
        for (int k = 0; k < K; ++k) p[static_cast<std::size_t>(n) * K + k] = static_cast<float>(std::exp(row[k] - mx) / total);
    }
    return p;
}

std::size_t param_count(const std::vector<Param*>& params) {
    std::size_t n = 0;
    for (const auto* p : params) n += p->value.size();
    return n;
}

} // namespace sead::nn
