// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace teadapter::nn {

// The shipped library stores tensors in 32-bit floats. The gradient-check
// build recompiles the same sources with TEADAPTER_NN_DOUBLE.
#ifdef TEADAPTER_NN_DOUBLE
using Real = double;
#else
using Real = float;
#endif

using Shape = std::vector<int>;

// Buffers start on a 64-byte boundary so vectorized kernels split every
// array the same way whatever the heap state; results then depend only on
// shapes and inputs.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
    void deallocate(T* p, std::size_t n) noexcept { ::operator delete(p, n * sizeof(T), kAlignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept {
        return true;
    }
};

using Storage = std::vector<Real, AlignedAllocator<Real>>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major n-d array.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, Real fill = Real(0));
    Tensor(Shape shape, std::vector<Real> data);

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }
    static Tensor scalar(Real value) { return Tensor(Shape{1}, value); }

    const Shape& shape() const noexcept { return shape_; }
    int rank() const noexcept { return static_cast<int>(shape_.size()); }
    int dim(int axis) const;
    std::size_t numel() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<Real> data() noexcept { return data_; }
    std::span<const Real> data() const noexcept { return data_; }
    Real* raw() noexcept { return data_.data(); }
    const Real* raw() const noexcept { return data_.data(); }
    Storage& storage() noexcept { return data_; }
    const Storage& storage() const noexcept { return data_; }

    Real& operator[](std::size_t i) noexcept { return data_[i]; }
    Real operator[](std::size_t i) const noexcept { return data_[i]; }

    // 4-d accessors for [N, C, H, W] tensors.
    Real& at(int n, int c, int h, int w) noexcept {
        return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    Real at(int n, int c, int h, int w) const noexcept {
        return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }

    Tensor reshaped(Shape shape) const;
    void fill(Real value);
    bool all_finite() const noexcept;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(Real scale);

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    Storage data_;
};

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace teadapter::nn
