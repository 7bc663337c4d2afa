// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace teadapter::nn {

struct Parameter {
    Parameter() = default;
    Parameter(std::string name_, Tensor value_)
        : name(std::move(name_)), value(std::move(value_)), grad(Tensor::zeros_like(value)) {}

    std::string name;
    Tensor value;
    Tensor grad;
    bool frozen = false;

    void zero_grad() { grad.fill(Real(0)); }
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;
    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Reverse-mode recording of one forward pass. With gradients disabled the
// tape only keeps values, so the same model code serves inference.
class Tape {
public:
    using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

    explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return record_; }

    Var constant(Tensor value);
    // Frozen parameters enter as constants: gradients never reach them.
    Var parameter(Parameter& param);

    Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    // Accumulates into a node's gradient buffer (allocated on first use).
    void accumulate(const Var& v, const Tensor& grad);
    Tensor& grad_buffer(const Var& v);

    // Seeds d(loss)/d(loss) = 1 and propagates. Parameter gradients are
    // accumulated into Parameter::grad.
    void backward(const Var& loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        Backward backward;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    bool record_;
    std::vector<Node> nodes_;
};

// --- differentiable ops --------------------------------------------------

Var conv2d(const Var& input, const Var& weight, const Var& bias, int stride, int pad);
Var add(const Var& a, const Var& b);
Var scale(const Var& a, Real factor);
Var mul(const Var& a, const Var& b);
Var silu(const Var& a);
Var pixel_unshuffle(const Var& a, int factor);
Var pixel_shuffle(const Var& a, int factor);
Var resize_nearest(const Var& a, int out_h, int out_w);
Var concat_channels(const Var& a, const Var& b);
Var linear(const Var& input, const Var& weight, const Var& bias);
// x * (1 + gamma) + beta with gamma, beta of shape [N, C] broadcast over H, W.
Var film(const Var& x, const Var& gamma, const Var& beta);
// Normalizes each of `groups` channel groups per item over (C/groups, H, W),
// then applies per-channel gamma, beta of shape [C].
Var group_norm(const Var& x, const Var& gamma, const Var& beta, int groups, Real epsilon = Real(1e-5));
// Splits [N, 2C] into its first and second halves along the feature axis.
Var slice_features(const Var& a, int begin, int end);
// Mean of table rows per batch item; an empty row list gives zeros.
Var embedding_mean(const Var& table, const std::vector<std::vector<int>>& rows);
Var sum(const Var& a);
Var mse_loss(const Var& prediction, const Var& target);

}  // namespace teadapter::nn
