// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nn/tensor.hpp"

// Tensor-level forward and backward kernels. Layout is [N, C, H, W] for all
// spatial ops; weights are [O, C, KH, KW].
namespace teadapter::nn::kernels {

int conv_output_extent(int extent, int kernel, int stride, int pad);

// Cross-correlation. `bias` may be empty.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride, int pad);

// Any of the output pointers may be null to skip that gradient.
void conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out, int stride,
                     int pad, Tensor* grad_input, Tensor* grad_weight, Tensor* grad_bias);

Tensor pixel_unshuffle(const Tensor& input, int factor);
Tensor pixel_shuffle(const Tensor& input, int factor);

Tensor resize_nearest(const Tensor& input, int out_h, int out_w);
Tensor resize_nearest_backward(const Tensor& grad_out, int in_h, int in_w);

Tensor concat_channels(const Tensor& a, const Tensor& b);

// y = x W^T + b for x [N, D], W [O, D], b [O].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

Real silu(Real x);
Real silu_grad(Real x);

}  // namespace teadapter::nn::kernels
