// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "nn/tensor.hpp"

namespace teadapter::diffusion {

// Steps are 1-based: betas[t - 1] is beta_t.
struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    double beta(int t) const { return betas[static_cast<std::size_t>(t - 1)]; }
    double alpha(int t) const { return alphas[static_cast<std::size_t>(t - 1)]; }
    // alpha_bar(0) is 1 by convention.
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars[static_cast<std::size_t>(t - 1)]; }
    // Variance of the ancestral step t -> t-1.
    double posterior_variance(int t) const;
};

// Linear betas; throws InvalidArgument unless 0 < beta_start < beta_end < 1.
DiffusionSchedule linear_schedule(int steps, double beta_start = 1e-4, double beta_end = 2e-2);

// z_t = sqrt(alpha_bar) z0 + sqrt(1 - alpha_bar) noise.
nn::Tensor forward_diffuse(const nn::Tensor& z0, double alpha_bar, const nn::Tensor& noise);
// Step-indexed form; t outside [1, T] throws StepError.
nn::Tensor forward_diffuse(const nn::Tensor& z0, int t, const nn::Tensor& noise, const DiffusionSchedule& schedule);

}  // namespace teadapter::diffusion
