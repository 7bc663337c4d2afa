// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "nn/kernels.hpp"

namespace teadapter::nn {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
    const bool trainable = record_ && !param.frozen;
    nodes_.push_back(Node{param.value, {}, {}, trainable ? &param : nullptr, trainable});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
    bool needs = false;
    if (record_) {
        for (const Var& p : parents) {
            require(p.tape() == this, ErrorCode::kInvalidArgument, "op mixes vars from different tapes");
            needs = needs || requires_grad(p.id());
        }
    }
    nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, nullptr, needs});
    return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(const Var& v) {
    Node& node = nodes_[v.id()];
    if (node.grad.shape() != node.value.shape()) {
        node.grad = Tensor::zeros_like(node.value);
    }
    return node.grad;
}

void Tape::accumulate(const Var& v, const Tensor& grad) {
    if (!nodes_[v.id()].requires_grad) {
        return;
    }
    grad_buffer(v) += grad;
}

void Tape::backward(const Var& loss) {
    require(record_, ErrorCode::kInvalidLoss, "backward on a tape without gradient recording");
    require(loss.tape() == this, ErrorCode::kInvalidLoss, "loss belongs to another tape");
    require(value(loss.id()).numel() == 1, ErrorCode::kInvalidLoss,
            "loss must be scalar, got " + shape_string(value(loss.id()).shape()));
    if (!nodes_[loss.id()].requires_grad) {
        return;
    }
    grad_buffer(loss).fill(Real(1));
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (!node.requires_grad || node.grad.empty()) {
            continue;
        }
        if (node.backward) {
            node.backward(*this, node.grad);
        }
        if (node.param != nullptr) {
            node.param->grad += node.grad;
        }
    }
}

// --- ops -----------------------------------------------------------------

Var conv2d(const Var& input, const Var& weight, const Var& bias, int stride, int pad) {
    Tape& tape = *input.tape();
    const Tensor bias_value = bias.valid() ? bias.value() : Tensor();
    Tensor out = kernels::conv2d(input.value(), weight.value(), bias_value, stride, pad);
    if (bias.valid()) {
        return tape.record(std::move(out), {input, weight, bias},
                           [input, weight, bias, stride, pad](Tape& t, const Tensor& g) {
                               Tensor* gx = input.requires_grad() ? &t.grad_buffer(input) : nullptr;
                               Tensor* gw = weight.requires_grad() ? &t.grad_buffer(weight) : nullptr;
                               Tensor* gb = bias.requires_grad() ? &t.grad_buffer(bias) : nullptr;
                               kernels::conv2d_backward(input.value(), weight.value(), g, stride, pad, gx, gw, gb);
                           });
    }
    return tape.record(std::move(out), {input, weight}, [input, weight, stride, pad](Tape& t, const Tensor& g) {
        Tensor* gx = input.requires_grad() ? &t.grad_buffer(input) : nullptr;
        Tensor* gw = weight.requires_grad() ? &t.grad_buffer(weight) : nullptr;
        kernels::conv2d_backward(input.value(), weight.value(), g, stride, pad, gx, gw, nullptr);
    });
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    out += b.value();
    return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var scale(const Var& a, Real factor) {
    Tensor out = a.value();
    out *= factor;
    return a.tape()->record(std::move(out), {a}, [a, factor](Tape& t, const Tensor& g) {
        if (!a.requires_grad()) {
            return;
        }
        Tensor& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] += factor * g[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) {
        out[i] *= b.value()[i];
    }
    return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        if (a.requires_grad()) {
            Tensor& ga = t.grad_buffer(a);
            for (std::size_t i = 0; i < g.numel(); ++i) {
                ga[i] += g[i] * b.value()[i];
            }
        }
        if (b.requires_grad()) {
            Tensor& gb = t.grad_buffer(b);
            for (std::size_t i = 0; i < g.numel(); ++i) {
                gb[i] += g[i] * a.value()[i];
            }
        }
    });
}

Var silu(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data()) {
        v = kernels::silu(v);
    }
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_buffer(a);
        const Tensor& x = a.value();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i] * kernels::silu_grad(x[i]);
        }
    });
}

Var pixel_unshuffle(const Var& a, int factor) {
    return a.tape()->record(kernels::pixel_unshuffle(a.value(), factor), {a}, [a, factor](Tape& t, const Tensor& g) {
        t.accumulate(a, kernels::pixel_shuffle(g, factor));
    });
}

Var pixel_shuffle(const Var& a, int factor) {
    return a.tape()->record(kernels::pixel_shuffle(a.value(), factor), {a}, [a, factor](Tape& t, const Tensor& g) {
        t.accumulate(a, kernels::pixel_unshuffle(g, factor));
    });
}

Var resize_nearest(const Var& a, int out_h, int out_w) {
    const int in_h = a.value().dim(2), in_w = a.value().dim(3);
    if (in_h == out_h && in_w == out_w) {
        return a;
    }
    return a.tape()->record(kernels::resize_nearest(a.value(), out_h, out_w), {a},
                            [a, in_h, in_w](Tape& t, const Tensor& g) {
                                t.accumulate(a, kernels::resize_nearest_backward(g, in_h, in_w));
                            });
}

Var concat_channels(const Var& a, const Var& b) {
    return a.tape()->record(kernels::concat_channels(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Tensor& g) {
        const int n = a.value().dim(0), ca = a.value().dim(1), cb = b.value().dim(1);
        const std::size_t plane = static_cast<std::size_t>(a.value().dim(2)) * a.value().dim(3);
        if (a.requires_grad()) {
            Tensor& ga = t.grad_buffer(a);
            for (int i = 0; i < n; ++i) {
                const Real* src = g.raw() + i * (ca + cb) * plane;
                Real* dst = ga.raw() + i * ca * plane;
                for (std::size_t k = 0; k < ca * plane; ++k) {
                    dst[k] += src[k];
                }
            }
        }
        if (b.requires_grad()) {
            Tensor& gb = t.grad_buffer(b);
            for (int i = 0; i < n; ++i) {
                const Real* src = g.raw() + (i * (ca + cb) + ca) * plane;
                Real* dst = gb.raw() + i * cb * plane;
                for (std::size_t k = 0; k < cb * plane; ++k) {
                    dst[k] += src[k];
                }
            }
        }
    });
}

Var linear(const Var& input, const Var& weight, const Var& bias) {
    Tensor out = kernels::linear(input.value(), weight.value(), bias.valid() ? bias.value() : Tensor());
    auto backward = [input, weight, bias](Tape& t, const Tensor& g) {
        const int n = input.value().dim(0), d = input.value().dim(1), o = weight.value().dim(0);
        const Tensor& x = input.value();
        const Tensor& w = weight.value();
        if (input.requires_grad()) {
            Tensor& gx = t.grad_buffer(input);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < o; ++j) {
                    const Real gij = g[static_cast<std::size_t>(i) * o + j];
                    for (int k = 0; k < d; ++k) {
                        gx[static_cast<std::size_t>(i) * d + k] += gij * w[static_cast<std::size_t>(j) * d + k];
                    }
                }
            }
        }
        if (weight.requires_grad()) {
            Tensor& gw = t.grad_buffer(weight);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < o; ++j) {
                    const Real gij = g[static_cast<std::size_t>(i) * o + j];
                    for (int k = 0; k < d; ++k) {
                        gw[static_cast<std::size_t>(j) * d + k] += gij * x[static_cast<std::size_t>(i) * d + k];
                    }
                }
            }
        }
        if (bias.valid() && bias.requires_grad()) {
            Tensor& gb = t.grad_buffer(bias);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < o; ++j) {
                    gb[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * o + j];
                }
            }
        }
    };
    if (bias.valid()) {
        return input.tape()->record(std::move(out), {input, weight, bias}, backward);
    }
    return input.tape()->record(std::move(out), {input, weight}, backward);
}

Var film(const Var& x, const Var& gamma, const Var& beta) {
    const Tensor& xv = x.value();
    require(xv.rank() == 4, ErrorCode::kShapeError, "film expects [N,C,H,W]");
    const int n = xv.dim(0), c = xv.dim(1);
    const Shape expected{n, c};
    require(gamma.value().shape() == expected && beta.value().shape() == expected, ErrorCode::kShapeError,
            "film modulation must be [N,C]");
    const std::size_t plane = static_cast<std::size_t>(xv.dim(2)) * xv.dim(3);
    Tensor out = xv;
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const Real s = Real(1) + gamma.value()[static_cast<std::size_t>(i) * c + ch];
            const Real b = beta.value()[static_cast<std::size_t>(i) * c + ch];
            Real* p = out.raw() + (static_cast<std::size_t>(i) * c + ch) * plane;
            for (std::size_t k = 0; k < plane; ++k) {
                p[k] = p[k] * s + b;
            }
        }
    }
    return x.tape()->record(std::move(out), {x, gamma, beta}, [x, gamma, beta, n, c, plane](Tape& t, const Tensor& g) {
        const Tensor& xv = x.value();
        Tensor* gx = x.requires_grad() ? &t.grad_buffer(x) : nullptr;
        Tensor* gg = gamma.requires_grad() ? &t.grad_buffer(gamma) : nullptr;
        Tensor* gbeta = beta.requires_grad() ? &t.grad_buffer(beta) : nullptr;
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                const std::size_t idx = static_cast<std::size_t>(i) * c + ch;
                const Real s = Real(1) + gamma.value()[idx];
                const Real* gp = g.raw() + idx * plane;
                const Real* xp = xv.raw() + idx * plane;
                Real dot = 0, total = 0;
                for (std::size_t k = 0; k < plane; ++k) {
                    dot += gp[k] * xp[k];
                    total += gp[k];
                }
                if (gx) {
                    Real* dst = gx->raw() + idx * plane;
                    for (std::size_t k = 0; k < plane; ++k) {
                        dst[k] += gp[k] * s;
                    }
                }
                if (gg) {
                    (*gg)[idx] += dot;
                }
                if (gbeta) {
                    (*gbeta)[idx] += total;
                }
            }
        }
    });
}

Var group_norm(const Var& x, const Var& gamma, const Var& beta, int groups, Real epsilon) {
    const Tensor& xv = x.value();
    require(xv.rank() == 4, ErrorCode::kShapeError, "group_norm expects [N,C,H,W]");
    const int n = xv.dim(0), c = xv.dim(1);
    require(groups >= 1 && c % groups == 0, ErrorCode::kShapeError,
            std::to_string(c) + " channels do not split into " + std::to_string(groups) + " groups");
    require(gamma.value().shape() == Shape{c} && beta.value().shape() == Shape{c}, ErrorCode::kShapeError,
            "group_norm affine parameters must be [C]");
    const std::size_t plane = static_cast<std::size_t>(xv.dim(2)) * xv.dim(3);
    const int per_group = c / groups;
    const std::size_t span = plane * per_group;
    Tensor normalized(xv.shape());
    std::vector<Real> inv_std(static_cast<std::size_t>(n) * groups);
    for (int i = 0; i < n; ++i) {
        for (int gi = 0; gi < groups; ++gi) {
            const std::size_t base = (static_cast<std::size_t>(i) * c + static_cast<std::size_t>(gi) * per_group) * plane;
            double mean = 0.0;
            for (std::size_t k = 0; k < span; ++k) {
                mean += xv[base + k];
            }
            mean /= static_cast<double>(span);
            double var = 0.0;
            for (std::size_t k = 0; k < span; ++k) {
                const double d = xv[base + k] - mean;
                var += d * d;
            }
            var /= static_cast<double>(span);
            const double inv = 1.0 / std::sqrt(var + epsilon);
            inv_std[static_cast<std::size_t>(i) * groups + gi] = static_cast<Real>(inv);
            for (std::size_t k = 0; k < span; ++k) {
                normalized[base + k] = static_cast<Real>((xv[base + k] - mean) * inv);
            }
        }
    }
    Tensor out(xv.shape());
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const Real s = gamma.value()[static_cast<std::size_t>(ch)];
            const Real b = beta.value()[static_cast<std::size_t>(ch)];
            const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * plane;
            for (std::size_t k = 0; k < plane; ++k) {
                out[base + k] = normalized[base + k] * s + b;
            }
        }
    }
    return x.tape()->record(
        std::move(out), {x, gamma, beta},
        [x, gamma, beta, normalized = std::move(normalized), inv_std = std::move(inv_std), n, c, groups, per_group,
         plane, span](Tape& t, const Tensor& g) {
            if (gamma.requires_grad() || beta.requires_grad()) {
                Tensor* gg = gamma.requires_grad() ? &t.grad_buffer(gamma) : nullptr;
                Tensor* gb = beta.requires_grad() ? &t.grad_buffer(beta) : nullptr;
                for (int i = 0; i < n; ++i) {
                    for (int ch = 0; ch < c; ++ch) {
                        const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * plane;
                        double dot = 0.0, total = 0.0;
                        for (std::size_t k = 0; k < plane; ++k) {
                            dot += g[base + k] * normalized[base + k];
                            total += g[base + k];
                        }
                        if (gg) {
                            (*gg)[static_cast<std::size_t>(ch)] += static_cast<Real>(dot);
                        }
                        if (gb) {
                            (*gb)[static_cast<std::size_t>(ch)] += static_cast<Real>(total);
                        }
                    }
                }
            }
            if (!x.requires_grad()) {
                return;
            }
            Tensor& gx = t.grad_buffer(x);
            std::vector<double> dxhat(span);
            for (int i = 0; i < n; ++i) {
                for (int gi = 0; gi < groups; ++gi) {
                    const std::size_t base =
                        (static_cast<std::size_t>(i) * c + static_cast<std::size_t>(gi) * per_group) * plane;
                    double mean_d = 0.0, mean_dx = 0.0;
                    for (std::size_t k = 0; k < span; ++k) {
                        const int ch = gi * per_group + static_cast<int>(k / plane);
                        dxhat[k] = static_cast<double>(g[base + k]) * gamma.value()[static_cast<std::size_t>(ch)];
                        mean_d += dxhat[k];
                        mean_dx += dxhat[k] * normalized[base + k];
                    }
                    mean_d /= static_cast<double>(span);
                    mean_dx /= static_cast<double>(span);
                    const double inv = inv_std[static_cast<std::size_t>(i) * groups + gi];
                    for (std::size_t k = 0; k < span; ++k) {
                        gx[base + k] += static_cast<Real>(inv * (dxhat[k] - mean_d - normalized[base + k] * mean_dx));
                    }
                }
            }
        });
}

Var slice_features(const Var& a, int begin, int end) {
    const Tensor& av = a.value();
    require(av.rank() == 2, ErrorCode::kShapeError, "slice_features expects [N,D]");
    const int n = av.dim(0), d = av.dim(1);
    require(0 <= begin && begin < end && end <= d, ErrorCode::kShapeError, "slice_features range out of bounds");
    const int width = end - begin;
    Tensor out(Shape{n, width});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < width; ++j) {
            out[static_cast<std::size_t>(i) * width + j] = av[static_cast<std::size_t>(i) * d + begin + j];
        }
    }
    return a.tape()->record(std::move(out), {a}, [a, n, d, begin, width](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_buffer(a);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < width; ++j) {
                ga[static_cast<std::size_t>(i) * d + begin + j] += g[static_cast<std::size_t>(i) * width + j];
            }
        }
    });
}

Var embedding_mean(const Var& table, const std::vector<std::vector<int>>& rows) {
    const Tensor& tv = table.value();
    require(tv.rank() == 2, ErrorCode::kShapeError, "embedding table must be [V,D]");
    const int vocab = tv.dim(0), d = tv.dim(1);
    const int n = static_cast<int>(rows.size());
    Tensor out(Shape{n, d});
    for (int i = 0; i < n; ++i) {
        const auto& ids = rows[static_cast<std::size_t>(i)];
        if (ids.empty()) {
            continue;
        }
        const Real inv = Real(1) / static_cast<Real>(ids.size());
        for (int id : ids) {
            require(id >= 0 && id < vocab, ErrorCode::kShapeError, "embedding id out of range");
            for (int k = 0; k < d; ++k) {
                out[static_cast<std::size_t>(i) * d + k] += inv * tv[static_cast<std::size_t>(id) * d + k];
            }
        }
    }
    return table.tape()->record(std::move(out), {table}, [table, rows, d](Tape& t, const Tensor& g) {
        Tensor& gt = t.grad_buffer(table);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].empty()) {
                continue;
            }
            const Real inv = Real(1) / static_cast<Real>(rows[i].size());
            for (int id : rows[i]) {
                for (int k = 0; k < d; ++k) {
                    gt[static_cast<std::size_t>(id) * d + k] += inv * g[i * d + k];
                }
            }
        }
    });
}

Var sum(const Var& a) {
    Real total = 0;
    for (Real v : a.value().data()) {
        total += v;
    }
    return a.tape()->record(Tensor::scalar(total), {a}, [a](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_buffer(a);
        const Real s = g[0];
        for (auto& v : ga.data()) {
            v += s;
        }
    });
}

Var mse_loss(const Var& prediction, const Var& target) {
    require_same_shape(prediction.value(), target.value(), "mse_loss");
    const Tensor& p = prediction.value();
    const Tensor& q = target.value();
    const std::size_t count = p.numel();
    require(count > 0, ErrorCode::kInvalidLoss, "mse_loss over empty tensors");
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double diff = static_cast<double>(p[i]) - static_cast<double>(q[i]);
        acc += diff * diff;
    }
    const Real loss = static_cast<Real>(acc / static_cast<double>(count));
    return prediction.tape()->record(Tensor::scalar(loss), {prediction, target},
                                     [prediction, target, count](Tape& t, const Tensor& g) {
                                         const Tensor& p = prediction.value();
                                         const Tensor& q = target.value();
                                         const Real k = Real(2) * g[0] / static_cast<Real>(count);
                                         if (prediction.requires_grad()) {
                                             Tensor& gp = t.grad_buffer(prediction);
                                             for (std::size_t i = 0; i < count; ++i) {
                                                 gp[i] += k * (p[i] - q[i]);
                                             }
                                         }
                                         if (target.requires_grad()) {
                                             Tensor& gq = t.grad_buffer(target);
                                             for (std::size_t i = 0; i < count; ++i) {
                                                 gq[i] -= k * (p[i] - q[i]);
                                             }
                                         }
                                     });
}

}  // namespace teadapter::nn
