// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/layers.hpp"

#include <cmath>
#include <numeric>

namespace teadapter::nn {
namespace {

Tensor kaiming_uniform(Shape shape, int fan_in, Rng& rng, double gain) {
    Tensor t(std::move(shape));
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : t.data()) {
        v = static_cast<Real>(rng.uniform(-bound, bound));
    }
    return t;
}

}  // namespace

Conv2d::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride, int pad,
               Rng& rng, Init init, double gain)
    : stride_(stride), pad_(pad) {
    require(in_channels > 0 && out_channels > 0 && kernel > 0, ErrorCode::kShapeError, "bad conv geometry");
    Shape shape{out_channels, in_channels, kernel, kernel};
    Tensor w = init == Init::kZero ? Tensor(shape) : kaiming_uniform(shape, in_channels * kernel * kernel, rng, gain);
    weight_ = Parameter(name + ".weight", std::move(w));
    bias_ = Parameter(name + ".bias", Tensor(Shape{out_channels}));
}

Var Conv2d::operator()(Tape& tape, const Var& x) {
    return conv2d(x, tape.parameter(weight_), tape.parameter(bias_), stride_, pad_);
}

void Conv2d::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

Linear::Linear(const std::string& name, int in_features, int out_features, Rng& rng, Init init, double gain) {
    Shape shape{out_features, in_features};
    Tensor w = init == Init::kZero ? Tensor(shape) : kaiming_uniform(shape, in_features, rng, gain);
    weight_ = Parameter(name + ".weight", std::move(w));
    bias_ = Parameter(name + ".bias", Tensor(Shape{out_features}));
}

Var Linear::operator()(Tape& tape, const Var& x) {
    return linear(x, tape.parameter(weight_), tape.parameter(bias_));
}

void Linear::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

GroupNorm::GroupNorm(const std::string& name, int channels)
    : gamma_(name + ".gamma", Tensor(Shape{channels}, Real(1))),
      beta_(name + ".beta", Tensor(Shape{channels})),
      groups_(std::gcd(channels, 8)) {}

Var GroupNorm::operator()(Tape& tape, const Var& x) {
    return group_norm(x, tape.parameter(gamma_), tape.parameter(beta_), groups_);
}

void GroupNorm::collect(std::vector<Parameter*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

void set_frozen(const std::vector<Parameter*>& params, bool frozen) {
    for (Parameter* p : params) {
        p->frozen = frozen;
    }
}

void zero_grads(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) {
        p->zero_grad();
    }
}

std::size_t count_values(const std::vector<Parameter*>& params) {
    std::size_t n = 0;
    for (const Parameter* p : params) {
        n += p->value.numel();
    }
    return n;
}

void Adam::step(const std::vector<Parameter*>& params) {
    if (m_.size() != params.size()) {
        m_.assign(params.size(), {});
        v_.assign(params.size(), {});
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i]->value.numel(), 0.0);
            v_[i].assign(params[i]->value.numel(), 0.0);
        }
    }
    ++t_;
    const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        if (p.frozen) {
            continue;
        }
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t k = 0; k < p.value.numel(); ++k) {
            const double g = p.grad[k];
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
            const double mhat = m[k] / correction1;
            const double vhat = v[k] / correction2;
            p.value[k] = static_cast<Real>(p.value[k] - lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

}  // namespace teadapter::nn
