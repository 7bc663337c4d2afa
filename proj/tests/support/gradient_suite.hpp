// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference checks of every differentiable op, the network blocks and
// the full adapter + denoiser graph, run in double precision. The interface
// only uses standard types so both precisions can include it.

#pragma once

#include <string>
#include <vector>

namespace gradient_suite {

struct CaseResult {
    std::string name;
    double max_relative_error = 0.0;
    int coordinates = 0;
    std::string worst;
};

inline constexpr double kTolerance = 1e-3;
inline constexpr int kMaxCoordinates = 200;

std::vector<CaseResult> run_all();

}  // namespace gradient_suite
