// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/schedule.hpp"

#include <cmath>

#include "common/error.hpp"

namespace teadapter::diffusion {

double DiffusionSchedule::posterior_variance(int t) const {
    return (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
}

DiffusionSchedule linear_schedule(int steps, double beta_start, double beta_end) {
    require(steps >= 1, ErrorCode::kInvalidArgument, "schedule needs at least one step");
    require(beta_start > 0.0 && beta_end < 1.0 && (beta_start < beta_end || steps == 1), ErrorCode::kInvalidArgument,
            "betas must satisfy 0 < beta_start < beta_end < 1");
    DiffusionSchedule s;
    s.steps = steps;
    double bar = 1.0;
    for (int i = 0; i < steps; ++i) {
        const double beta = steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * i / (steps - 1);
        s.betas.push_back(beta);
        s.alphas.push_back(1.0 - beta);
        bar *= 1.0 - beta;
        s.alpha_bars.push_back(bar);
    }
    return s;
}

nn::Tensor forward_diffuse(const nn::Tensor& z0, double alpha_bar, const nn::Tensor& noise) {
    nn::require_same_shape(z0, noise, "forward_diffuse");
    require(alpha_bar >= 0.0 && alpha_bar <= 1.0, ErrorCode::kInvalidArgument, "alpha_bar must lie in [0, 1]");
    const double a = std::sqrt(alpha_bar);
    const double b = std::sqrt(1.0 - alpha_bar);
    nn::Tensor out(z0.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) {
        out[i] = static_cast<nn::Real>(a * z0[i] + b * noise[i]);
    }
    return out;
}

nn::Tensor forward_diffuse(const nn::Tensor& z0, int t, const nn::Tensor& noise, const DiffusionSchedule& schedule) {
    require(t >= 1 && t <= schedule.steps, ErrorCode::kStepError,
            "step " + std::to_string(t) + " outside [1, " + std::to_string(schedule.steps) + "]");
    return forward_diffuse(z0, schedule.alpha_bar(t), noise);
}

}  // namespace teadapter::diffusion
