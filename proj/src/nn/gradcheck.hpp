// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/autograd.hpp"

namespace teadapter::nn {

struct GradCheckOptions {
    double step = 1e-5;
    int max_coordinates = 200;
    // Denominator floor for the relative error of near-zero gradients.
    double floor = 1e-8;
    std::uint64_t seed = 7;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    int coordinates_checked = 0;
    std::string worst_parameter;
};

// Central finite differences against reverse-mode gradients for up to
// `max_coordinates` coordinates sampled across all non-frozen parameters.
// `loss_fn` must build a scalar loss on the supplied tape.
GradCheckReport check_gradients(const std::function<Var(Tape&)>& loss_fn, const std::vector<Parameter*>& params,
                                const GradCheckOptions& options = {});

}  // namespace teadapter::nn
