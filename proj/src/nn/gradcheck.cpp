// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "nn/layers.hpp"

namespace teadapter::nn {
namespace {

double evaluate(const std::function<Var(Tape&)>& loss_fn) {
    Tape tape(false);
    const Var loss = loss_fn(tape);
    require(loss.value().numel() == 1, ErrorCode::kInvalidLoss, "gradient check needs a scalar loss");
    return static_cast<double>(loss.value()[0]);
}

}  // namespace

GradCheckReport check_gradients(const std::function<Var(Tape&)>& loss_fn, const std::vector<Parameter*>& params,
                                const GradCheckOptions& options) {
    zero_grads(params);
    {
        Tape tape(true);
        const Var loss = loss_fn(tape);
        tape.backward(loss);
    }

    struct Coordinate {
        Parameter* param;
        std::size_t index;
    };
    std::vector<Coordinate> all;
    for (Parameter* p : params) {
        if (p->frozen) {
            continue;
        }
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            all.push_back({p, i});
        }
    }
    Rng rng(options.seed);
    std::vector<Coordinate> picked;
    if (static_cast<int>(all.size()) <= options.max_coordinates) {
        picked = all;
    } else {
        // Partial Fisher-Yates for a uniform sample without replacement.
        for (int k = 0; k < options.max_coordinates; ++k) {
            const int j = rng.uniform_int(k, static_cast<int>(all.size()) - 1);
            std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(j)]);
            picked.push_back(all[static_cast<std::size_t>(k)]);
        }
    }

    GradCheckReport report;
    for (const Coordinate& c : picked) {
        Real& slot = c.param->value[c.index];
        const Real original = slot;
        slot = static_cast<Real>(original + options.step);
        const double plus = evaluate(loss_fn);
        slot = static_cast<Real>(original - options.step);
        const double minus = evaluate(loss_fn);
        slot = original;
        const double numeric = (plus - minus) / (2.0 * options.step);
        const double analytic = c.param->grad[c.index];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), options.floor});
        const double rel = std::abs(numeric - analytic) / denom;
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_parameter = c.param->name + "[" + std::to_string(c.index) + "]";
        }
        ++report.coordinates_checked;
    }
    return report;
}

}  // namespace teadapter::nn
