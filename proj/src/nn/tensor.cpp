#include "sead/nn/tensor.hpp"

#include "sead/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace sead::nn {

Tensor::Tensor(std::vector<int> shape, std::vector<float> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    require(data_.size() == count(shape_), ErrorCode::InvalidArgument,
            "tensor data size " + std::to_string(data_.size()) + " does not match shape " + shape_string(shape_));
}

Tensor Tensor::reshaped(std::vector<int> shape) const& {
    Tensor t(*this);
    return std::move(t).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(std::vector<int> shape) && {
    require(count(shape) == data_.size(), ErrorCode::InvalidArgument,
            "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    shape_ = std::move(shape);
    return std::move(*this);
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<int>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

} // namespace sead::nn
