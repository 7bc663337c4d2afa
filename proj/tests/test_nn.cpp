// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "nn/autograd.hpp"
#include "nn/kernels.hpp"
#include "nn/layers.hpp"
#include "nn/serialize.hpp"
#include "test_util.hpp"

using namespace teadapter;
using namespace teadapter::nn;
using testing::code_of;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) {
        v = static_cast<Real>(rng.uniform(-1.0, 1.0));
    }
    return t;
}

// Direct cross-correlation with zero padding.
Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int o = w.dim(0), k = w.dim(2);
    const int oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
    Tensor y(Shape{n, o, oh, ow});
    for (int bi = 0; bi < n; ++bi) {
        for (int oc = 0; oc < o; ++oc) {
            for (int i = 0; i < oh; ++i) {
                for (int j = 0; j < ow; ++j) {
                    double acc = b.empty() ? 0.0 : b[static_cast<std::size_t>(oc)];
                    for (int ic = 0; ic < c; ++ic) {
                        for (int u = 0; u < k; ++u) {
                            for (int v = 0; v < k; ++v) {
                                const int yy = i * stride + u - pad, xx = j * stride + v - pad;
                                if (yy >= 0 && yy < h && xx >= 0 && xx < wd) {
                                    acc += x.at(bi, ic, yy, xx) * w.at(oc, ic, u, v);
                                }
                            }
                        }
                    }
                    y.at(bi, oc, i, j) = static_cast<Real>(acc);
                }
            }
        }
    }
    return y;
}

}  // namespace

TEST_CASE("conv2d matches direct cross-correlation") {
    Rng rng(1);
    struct Case {
        int stride, pad, k, h, w;
    };
    for (const Case cs : {Case{1, 1, 3, 7, 5}, Case{2, 1, 3, 8, 6}, Case{1, 0, 1, 4, 4}, Case{2, 1, 3, 5, 3}}) {
        const Tensor x = random_tensor({2, 3, cs.h, cs.w}, rng);
        const Tensor w = random_tensor({4, 3, cs.k, cs.k}, rng);
        const Tensor b = random_tensor({4}, rng);
        const Tensor fast = kernels::conv2d(x, w, b, cs.stride, cs.pad);
        const Tensor slow = naive_conv(x, w, b, cs.stride, cs.pad);
        REQUIRE(fast.shape() == slow.shape());
        for (std::size_t i = 0; i < fast.numel(); ++i) {
            CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-4));
        }
    }
}

TEST_CASE("kernel results do not depend on heap placement") {
    Rng rng(11);
    const Tensor x = random_tensor({2, 5, 9, 7}, rng);
    const Tensor w = random_tensor({6, 5, 3, 3}, rng);
    const Tensor b = random_tensor({6}, rng);
    const Tensor v = random_tensor({3, 13}, rng);
    const Tensor lw = random_tensor({11, 13}, rng);
    const Tensor lb = random_tensor({11}, rng);
    const Tensor conv = kernels::conv2d(x, w, b, 1, 1);
    const Tensor lin = kernels::linear(v, lw, lb);
    std::vector<std::vector<char>> spacers;
    for (std::size_t pad : {4u, 20u, 36u, 52u}) {
        spacers.emplace_back(pad);
        const Tensor x2 = x, w2 = w, b2 = b, v2 = v, lw2 = lw;
        CHECK(reinterpret_cast<std::uintptr_t>(x2.raw()) % 64 == 0);
        CHECK(kernels::conv2d(x2, w2, b2, 1, 1) == conv);
        CHECK(kernels::linear(v2, lw2, lb) == lin);
    }
}

TEST_CASE("pixel unshuffle layout and inverse") {
    Rng rng(2);
    const Tensor x = random_tensor({2, 1, 8, 6}, rng);
    const Tensor u = kernels::pixel_unshuffle(x, 2);
    CHECK(u.shape() == Shape{2, 4, 4, 3});
    // Channel (i * r + j) holds the (i, j) phase of every r x r cell.
    CHECK(u.at(1, 3, 2, 1) == x.at(1, 0, 5, 3));
    CHECK(u.at(0, 1, 0, 2) == x.at(0, 0, 0, 5));
    CHECK(kernels::pixel_shuffle(u, 2) == x);
    CHECK(code_of([&] { kernels::pixel_unshuffle(x, 4); }) == ErrorCode::kShapeError);
}

TEST_CASE("linear is x W^T + b") {
    Rng rng(3);
    const Tensor x = random_tensor({3, 5}, rng);
    const Tensor w = random_tensor({2, 5}, rng);
    const Tensor b = random_tensor({2}, rng);
    const Tensor y = kernels::linear(x, w, b);
    for (int i = 0; i < 3; ++i) {
        for (int o = 0; o < 2; ++o) {
            double acc = b[static_cast<std::size_t>(o)];
            for (int d = 0; d < 5; ++d) {
                acc += x[static_cast<std::size_t>(i * 5 + d)] * w[static_cast<std::size_t>(o * 5 + d)];
            }
            CHECK(y[static_cast<std::size_t>(i * 2 + o)] == doctest::Approx(acc).epsilon(1e-5));
        }
    }
}

TEST_CASE("reverse mode on a product gives the other factor") {
    Rng rng(4);
    Parameter a("a", random_tensor({6}, rng));
    Parameter b("b", random_tensor({6}, rng));
    Tape tape;
    tape.backward(sum(mul(tape.parameter(a), tape.parameter(b))));
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.grad[i] == doctest::Approx(b.value[i]));
        CHECK(b.grad[i] == doctest::Approx(a.value[i]));
    }
}

TEST_CASE("frozen parameters receive no gradient and are not stepped") {
    Rng rng(5);
    Parameter a("a", random_tensor({4}, rng));
    Parameter b("b", random_tensor({4}, rng));
    b.frozen = true;
    const Tensor before = b.value;
    Tape tape;
    tape.backward(sum(mul(tape.parameter(a), tape.parameter(b))));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(b.grad[i] == Real(0));
    }
    Adam opt(0.1);
    opt.step({&a, &b});
    CHECK(b.value == before);
}

TEST_CASE("first Adam step moves each value by the learning rate") {
    Parameter p("p", Tensor(Shape{3}, std::vector<Real>{1.0f, -2.0f, 0.5f}));
    p.grad = Tensor(Shape{3}, std::vector<Real>{0.3f, -4.0f, 1e-3f});
    Adam opt(0.01);
    opt.step({&p});
    // m_hat = g and v_hat = g^2 after bias correction, so the step is lr * sign(g).
    CHECK(p.value[0] == doctest::Approx(0.99).epsilon(1e-5));
    CHECK(p.value[1] == doctest::Approx(-1.99).epsilon(1e-5));
    CHECK(p.value[2] == doctest::Approx(0.49).epsilon(1e-4));
}

TEST_CASE("group norm standardizes every group") {
    Rng rng(6);
    GroupNorm gn("gn", 8);
    CHECK(gn.groups() == 8);
    CHECK(GroupNorm("g", 12).groups() == 4);
    Tensor x = random_tensor({2, 8, 3, 5}, rng);
    for (auto& v : x.data()) {
        v = v * 3 + 2;
    }
    Tape tape(false);
    const Tensor y = gn(tape, tape.constant(x)).value();
    for (int n = 0; n < 2; ++n) {
        for (int c = 0; c < 8; ++c) {
            double m = 0.0, q = 0.0;
            for (int i = 0; i < 15; ++i) {
                const double v = y.at(n, c, i / 5, i % 5);
                m += v;
                q += v * v;
            }
            m /= 15.0;
            CHECK(std::abs(m) < 1e-5);
            CHECK(q / 15.0 - m * m == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("mse loss value and shape check") {
    Tape tape;
    const Var p = tape.constant(Tensor(Shape{2, 2}, std::vector<Real>{1, 2, 3, 4}));
    const Var q = tape.constant(Tensor(Shape{2, 2}, std::vector<Real>{1, 0, 3, 0}));
    CHECK(mse_loss(p, q).value()[0] == doctest::Approx(5.0));
    const Var r = tape.constant(Tensor(Shape{4}));
    CHECK(code_of([&] { mse_loss(p, r); }) == ErrorCode::kShapeError);
}

TEST_CASE("nearest resize backward sums over copies") {
    Rng rng(7);
    const Tensor g = random_tensor({1, 1, 4, 6}, rng);
    const Tensor back = kernels::resize_nearest_backward(g, 2, 3);
    double total_g = 0.0, total_b = 0.0;
    for (auto v : g.data()) {
        total_g += v;
    }
    for (auto v : back.data()) {
        total_b += v;
    }
    CHECK(total_b == doctest::Approx(total_g).epsilon(1e-5));
}

TEST_CASE("TNSR1 round trip and corruption") {
    Rng rng(8);
    const Tensor t = random_tensor({3, 1, 2}, rng);
    CHECK(decode_tnsr(encode_tnsr(t)) == t);
    auto bytes = encode_tnsr(t);
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "TNSR1");
    bytes[0] = 'X';
    CHECK(code_of([&] { decode_tnsr(bytes); }) == ErrorCode::kDecodeError);
    bytes = encode_tnsr(t);
    bytes.pop_back();
    CHECK(code_of([&] { decode_tnsr(bytes); }) == ErrorCode::kDecodeError);
}

TEST_CASE("checkpoints restore values by name") {
    Rng rng(9);
    const auto dir = testing::scratch_dir("ckpt");
    Parameter a("layer.weight", random_tensor({2, 3}, rng));
    Parameter b("layer.bias", random_tensor({2}, rng));
    b.frozen = true;
    save_checkpoint(dir, {&a, &b}, {{"kind", "test"}});
    Parameter a2("layer.weight", Tensor(Shape{2, 3}));
    Parameter b2("layer.bias", Tensor(Shape{2}));
    const auto meta = load_checkpoint(dir, {&a2, &b2});
    CHECK(meta.at("kind") == "test");
    CHECK(a2.value == a.value);
    CHECK(b2.value == b.value);
    Parameter wrong("layer.weight", Tensor(Shape{3, 2}));
    CHECK(code_of([&] { load_checkpoint(dir, {&wrong}); }) == ErrorCode::kShapeError);
    CHECK(code_of([&] { read_manifest(dir / "missing"); }) == ErrorCode::kNotLoaded);
}
