// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace teadapter::nn {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        require(d >= 0, ErrorCode::kShapeError, "negative extent in shape");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) {
            out << ',';
        }
        out << shape[i];
    }
    out << ']';
    return out.str();
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    require(shape_numel(shape_) == data_.size(), ErrorCode::kShapeError,
            "tensor data length does not match shape " + shape_string(shape_));
}

int Tensor::dim(int axis) const {
    require(axis >= 0 && axis < rank(), ErrorCode::kShapeError, "axis out of range");
    return shape_[static_cast<std::size_t>(axis)];
}

Tensor Tensor::reshaped(Shape shape) const {
    require(shape_numel(shape) == data_.size(), ErrorCode::kShapeError,
            "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

void Tensor::fill(Real value) {
    for (auto& v : data_) {
        v = value;
    }
}

bool Tensor::all_finite() const noexcept {
    for (Real v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    require_same_shape(*this, other, "tensor +=");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Tensor& Tensor::operator*=(Real scale) {
    for (auto& v : data_) {
        v *= scale;
    }
    return *this;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        fail(ErrorCode::kShapeError, std::string(what) + ": shape mismatch " +
                                         shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
}

}  // namespace teadapter::nn
