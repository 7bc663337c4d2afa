// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradient_suite.hpp"

#include <functional>

#include "adapter/teadapter.hpp"
#include "common/rng.hpp"
#include "diffusion/backbone.hpp"
#include "nn/autograd.hpp"
#include "nn/blocks.hpp"
#include "nn/gradcheck.hpp"
#include "nn/layers.hpp"

static_assert(sizeof(teadapter::nn::Real) == sizeof(double), "the gradient suite needs the double-precision build");

namespace gradient_suite {
namespace {

using namespace teadapter;
using namespace teadapter::nn;

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) {
        v = rng.uniform(-scale, scale);
    }
    return t;
}

// Moves every parameter off its initialization so zero-initialized
// projections do not hide upstream gradients.
void jitter(const std::vector<Parameter*>& params, Rng& rng, double scale) {
    for (Parameter* p : params) {
        for (auto& v : p->value.data()) {
            v += rng.uniform(-scale, scale);
        }
    }
}

CaseResult check(const std::string& name, const std::function<Var(Tape&)>& loss,
                 const std::vector<Parameter*>& params) {
    GradCheckOptions options;
    options.max_coordinates = kMaxCoordinates;
    options.step = 1e-6;
    options.floor = 1e-6;
    const GradCheckReport r = check_gradients(loss, params, options);
    return {name, r.max_relative_error, r.coordinates_checked, r.worst_parameter};
}

// sum(out * R) for a fixed random R, so every output element matters.
Var weighted(Tape& tape, const Var& out, const Tensor& r) { return sum(mul(out, tape.constant(r))); }

}  // namespace

std::vector<CaseResult> run_all() {
    std::vector<CaseResult> results;
    Rng rng(2024);

    {
        Parameter x("x", random_tensor({2, 3, 5, 4}, rng));
        Parameter w("w", random_tensor({4, 3, 3, 3}, rng));
        Parameter b("b", random_tensor({4}, rng));
        for (int stride : {1, 2}) {
            const Tensor r = random_tensor({2, 4, stride == 1 ? 5 : 3, stride == 1 ? 4 : 2}, rng);
            results.push_back(check(
                "conv2d stride " + std::to_string(stride),
                [&](Tape& t) {
                    return weighted(t, conv2d(t.parameter(x), t.parameter(w), t.parameter(b), stride, 1), r);
                },
                {&x, &w, &b}));
        }
    }
    {
        Parameter x("x", random_tensor({3, 5}, rng));
        Parameter w("w", random_tensor({4, 5}, rng));
        Parameter b("b", random_tensor({4}, rng));
        const Tensor r = random_tensor({3, 4}, rng);
        results.push_back(check(
            "linear", [&](Tape& t) { return weighted(t, linear(t.parameter(x), t.parameter(w), t.parameter(b)), r); },
            {&x, &w, &b}));
    }
    {
        Parameter a("a", random_tensor({2, 2, 3, 3}, rng, 3.0));
        Parameter c("c", random_tensor({2, 2, 3, 3}, rng));
        const Tensor r = random_tensor({2, 2, 3, 3}, rng);
        results.push_back(check("silu", [&](Tape& t) { return weighted(t, silu(t.parameter(a)), r); }, {&a}));
        results.push_back(check(
            "add, mul, scale",
            [&](Tape& t) {
                const Var pa = t.parameter(a), pc = t.parameter(c);
                return weighted(t, add(mul(pa, pc), scale(pa, 0.7)), r);
            },
            {&a, &c}));
    }
    {
        Parameter x("x", random_tensor({2, 3, 2, 4}, rng));
        Parameter g("g", random_tensor({2, 3}, rng));
        Parameter b("b", random_tensor({2, 3}, rng));
        const Tensor r = random_tensor({2, 3, 2, 4}, rng);
        results.push_back(check(
            "film", [&](Tape& t) { return weighted(t, film(t.parameter(x), t.parameter(g), t.parameter(b)), r); },
            {&x, &g, &b}));
    }
    {
        Parameter x("x", random_tensor({2, 6, 3, 2}, rng, 2.0));
        Parameter g("g", random_tensor({6}, rng));
        Parameter b("b", random_tensor({6}, rng));
        const Tensor r = random_tensor({2, 6, 3, 2}, rng);
        for (int groups : {1, 3}) {
            results.push_back(check(
                "group_norm groups " + std::to_string(groups),
                [&](Tape& t) {
                    return weighted(t, group_norm(t.parameter(x), t.parameter(g), t.parameter(b), groups), r);
                },
                {&x, &g, &b}));
        }
    }
    {
        Parameter x("x", random_tensor({1, 2, 4, 6}, rng));
        const Tensor r1 = random_tensor({1, 8, 2, 3}, rng);
        const Tensor r2 = random_tensor({1, 2, 5, 9}, rng);
        const Tensor r3 = random_tensor({1, 4, 4, 6}, rng);
        const Tensor r4 = random_tensor({1, 2, 4, 6}, rng);
        results.push_back(check(
            "pixel unshuffle / shuffle",
            [&](Tape& t) {
                const Var u = pixel_unshuffle(t.parameter(x), 2);
                return add(weighted(t, u, r1), weighted(t, pixel_shuffle(mul(u, u), 2), r4));
            },
            {&x}));
        results.push_back(check(
            "resize_nearest", [&](Tape& t) { return weighted(t, resize_nearest(t.parameter(x), 5, 9), r2); }, {&x}));
        results.push_back(check(
            "concat_channels",
            [&](Tape& t) {
                const Var p = t.parameter(x);
                return weighted(t, concat_channels(p, silu(p)), r3);
            },
            {&x}));
    }
    {
        Parameter table("table", random_tensor({6, 4}, rng));
        Parameter f("f", random_tensor({2, 6}, rng));
        const Tensor r = random_tensor({2, 4}, rng);
        const Tensor r2 = random_tensor({2, 3}, rng);
        results.push_back(check(
            "embedding_mean",
            [&](Tape& t) { return weighted(t, embedding_mean(t.parameter(table), {{0, 2, 5}, {1, 1}}), r); },
            {&table}));
        results.push_back(check(
            "slice_features",
            [&](Tape& t) {
                const Var p = t.parameter(f);
                const Var tail = slice_features(p, 3, 6);
                return add(weighted(t, slice_features(p, 0, 3), r2), weighted(t, mul(tail, tail), r2));
            },
            {&f}));
    }
    {
        Parameter p("p", random_tensor({2, 1, 3, 3}, rng));
        Parameter q("q", random_tensor({2, 1, 3, 3}, rng));
        results.push_back(
            check("mse_loss", [&](Tape& t) { return mse_loss(t.parameter(p), t.parameter(q)); }, {&p, &q}));
    }
    {
        ResBlock block("block", 4, 6, rng, 5);
        std::vector<Parameter*> params;
        block.collect(params);
        jitter(params, rng, 0.2);
        Parameter x("x", random_tensor({2, 4, 3, 4}, rng));
        Parameter cond("cond", random_tensor({2, 5}, rng));
        const Tensor r = random_tensor({2, 6, 3, 4}, rng);
        params.push_back(&x);
        params.push_back(&cond);
        results.push_back(check(
            "residual block with FiLM",
            [&](Tape& t) {
                const Var c = t.parameter(cond);
                return weighted(t, block(t, t.parameter(x), &c), r);
            },
            params));
    }

    // Same geometry as the "gradcheck" preset: every stage stays at least 1x1.
    diffusion::BackboneConfig config;
    config.plan = {4, 4, 1, {2, 3, 3, 2}};
    config.embed_dim = 4;
    config.vocab = 8;
    config.time_features = 4;
    const adapter::ScalePlan& plan = config.plan;
    {
        adapter::TEAdapter ad(plan, 11);
        std::vector<Parameter*> params = ad.parameters();
        jitter(params, rng, 0.2);
        Parameter cond("cond", random_tensor({2, 1, plan.frames, plan.bins}, rng));
        params.push_back(&cond);
        results.push_back(check(
            "adapter",
            [&](Tape& t) {
                const auto maps = ad.forward(t, t.parameter(cond));
                Var acc = sum(mul(maps[0], maps[0]));
                for (const auto& m : maps) {
                    acc = add(acc, sum(mul(m, silu(m))));
                }
                return acc;
            },
            params));
    }
    {
        diffusion::ToyBackbone backbone(config, 12);
        adapter::TEAdapter ad(plan, 13);
        jitter(backbone.parameters(), rng, 0.1);
        jitter(ad.parameters(), rng, 0.2);
        Parameter z("z", random_tensor({2, 1, plan.frames, plan.bins}, rng));
        Parameter cond("cond", random_tensor({2, 1, plan.frames, plan.bins}, rng));
        const Tensor noise = random_tensor({2, 1, plan.frames, plan.bins}, rng);
        const std::vector<int> steps{3, 7};
        const std::vector<std::vector<int>> tokens{{1, 4}, {2}};
        auto loss = [&](Tape& t) {
            const auto maps = ad.forward(t, t.parameter(cond));
            const std::vector<Var> injection = adapter::combine_vars({maps}, {0.8});
            const Var eps = backbone.forward(t, t.parameter(z), steps, tokens, &injection, nullptr);
            return mse_loss(eps, t.constant(noise));
        };
        // Training graph: backbone frozen, gradients reach adapter and inputs.
        backbone.set_frozen(true);
        std::vector<Parameter*> params = ad.parameters();
        params.push_back(&cond);
        params.push_back(&z);
        results.push_back(check("adapter through frozen denoiser", loss, params));
        // Whole graph, denoiser included.
        backbone.set_frozen(false);
        params = backbone.parameters();
        for (Parameter* p : ad.parameters()) {
            params.push_back(p);
        }
        results.push_back(check("adapter + denoiser end to end", loss, params));
    }
    return results;
}

}  // namespace gradient_suite
