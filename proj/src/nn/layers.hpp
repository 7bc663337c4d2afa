// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/autograd.hpp"

namespace teadapter::nn {

// Kaiming-uniform draws from U(-b, b) with b = gain * sqrt(6 / fan_in).
enum class Init { kKaimingUniform, kZero };

class Conv2d {
public:
    Conv2d() = default;
    Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride, int pad,
           Rng& rng, Init init = Init::kKaimingUniform, double gain = 1.0);

    Var operator()(Tape& tape, const Var& x);
    void collect(std::vector<Parameter*>& out);

    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }
    int in_channels() const { return weight_.value.dim(1); }
    int out_channels() const { return weight_.value.dim(0); }
    int stride() const { return stride_; }

private:
    Parameter weight_;
    Parameter bias_;
    int stride_ = 1;
    int pad_ = 0;
};

class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, int in_features, int out_features, Rng& rng,
           Init init = Init::kKaimingUniform, double gain = 1.0);

    Var operator()(Tape& tape, const Var& x);
    void collect(std::vector<Parameter*>& out);

private:
    Parameter weight_;
    Parameter bias_;
};

// Group normalization with a learned per-channel scale (ones) and shift
// (zeros). The group count is gcd(channels, 8).
class GroupNorm {
public:
    GroupNorm() = default;
    GroupNorm(const std::string& name, int channels);

    Var operator()(Tape& tape, const Var& x);
    void collect(std::vector<Parameter*>& out);
    int groups() const { return groups_; }

private:
    Parameter gamma_;
    Parameter beta_;
    int groups_ = 1;
};

void set_frozen(const std::vector<Parameter*>& params, bool frozen);
void zero_grads(const std::vector<Parameter*>& params);
std::size_t count_values(const std::vector<Parameter*>& params);

// Adam with bias correction. Frozen parameters are skipped.
class Adam {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

    void step(const std::vector<Parameter*>& params);
    long steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace teadapter::nn
