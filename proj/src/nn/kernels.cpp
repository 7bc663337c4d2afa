// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Core>

namespace teadapter::nn::kernels {
namespace {

using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

struct ConvGeometry {
    int batch, channels, height, width;
    int out_channels, kernel_h, kernel_w;
    int stride, pad;
    int out_h, out_w;

    int patch() const { return channels * kernel_h * kernel_w; }
    int positions() const { return out_h * out_w; }
    bool pointwise() const { return kernel_h == 1 && kernel_w == 1 && stride == 1 && pad == 0; }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& weight, int stride, int pad) {
    require(input.rank() == 4, ErrorCode::kShapeError,
            "conv2d input must be [N,C,H,W], got " + shape_string(input.shape()));
    require(weight.rank() == 4, ErrorCode::kShapeError,
            "conv2d weight must be [O,C,KH,KW], got " + shape_string(weight.shape()));
    require(stride == 1 || stride == 2, ErrorCode::kShapeError, "conv2d stride must be 1 or 2");
    require(pad >= 0, ErrorCode::kShapeError, "conv2d padding must be non-negative");
    ConvGeometry g{};
    g.batch = input.dim(0);
    g.channels = input.dim(1);
    g.height = input.dim(2);
    g.width = input.dim(3);
    g.out_channels = weight.dim(0);
    g.kernel_h = weight.dim(2);
    g.kernel_w = weight.dim(3);
    g.stride = stride;
    g.pad = pad;
    require(weight.dim(1) == g.channels, ErrorCode::kShapeError,
            "conv2d channel mismatch: input " + shape_string(input.shape()) + " weight " +
                shape_string(weight.shape()));
    g.out_h = conv_output_extent(g.height, g.kernel_h, stride, pad);
    g.out_w = conv_output_extent(g.width, g.kernel_w, stride, pad);
    require(g.out_h > 0 && g.out_w > 0, ErrorCode::kShapeError,
            "conv2d kernel larger than padded input " + shape_string(input.shape()));
    return g;
}

void im2col(const Real* image, const ConvGeometry& g, Real* columns) {
    const int positions = g.positions();
    for (int c = 0; c < g.channels; ++c) {
        const Real* plane = image + static_cast<std::size_t>(c) * g.height * g.width;
        for (int ki = 0; ki < g.kernel_h; ++ki) {
            for (int kj = 0; kj < g.kernel_w; ++kj) {
                Real* row = columns + static_cast<std::size_t>((c * g.kernel_h + ki) * g.kernel_w + kj) * positions;
                for (int oh = 0; oh < g.out_h; ++oh) {
                    const int ih = oh * g.stride - g.pad + ki;
                    Real* dst = row + static_cast<std::size_t>(oh) * g.out_w;
                    if (ih < 0 || ih >= g.height) {
                        for (int ow = 0; ow < g.out_w; ++ow) {
                            dst[ow] = Real(0);
                        }
                        continue;
                    }
                    const Real* src = plane + static_cast<std::size_t>(ih) * g.width;
                    for (int ow = 0; ow < g.out_w; ++ow) {
                        const int iw = ow * g.stride - g.pad + kj;
                        dst[ow] = (iw >= 0 && iw < g.width) ? src[iw] : Real(0);
                    }
                }
            }
        }
    }
}

void col2im(const Real* columns, const ConvGeometry& g, Real* image) {
    const int positions = g.positions();
    for (int c = 0; c < g.channels; ++c) {
        Real* plane = image + static_cast<std::size_t>(c) * g.height * g.width;
        for (int ki = 0; ki < g.kernel_h; ++ki) {
            for (int kj = 0; kj < g.kernel_w; ++kj) {
                const Real* row =
                    columns + static_cast<std::size_t>((c * g.kernel_h + ki) * g.kernel_w + kj) * positions;
                for (int oh = 0; oh < g.out_h; ++oh) {
                    const int ih = oh * g.stride - g.pad + ki;
                    if (ih < 0 || ih >= g.height) {
                        continue;
                    }
                    const Real* src = row + static_cast<std::size_t>(oh) * g.out_w;
                    Real* dst = plane + static_cast<std::size_t>(ih) * g.width;
                    for (int ow = 0; ow < g.out_w; ++ow) {
                        const int iw = ow * g.stride - g.pad + kj;
                        if (iw >= 0 && iw < g.width) {
                            dst[iw] += src[ow];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

int conv_output_extent(int extent, int kernel, int stride, int pad) {
    const int span = extent + 2 * pad - kernel;
    if (span < 0) {
        return 0;
    }
    return span / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride, int pad) {
    const ConvGeometry g = conv_geometry(input, weight, stride, pad);
    if (!bias.empty()) {
        require(bias.numel() == static_cast<std::size_t>(g.out_channels), ErrorCode::kShapeError,
                "conv2d bias length mismatch");
    }
    Tensor output(Shape{g.batch, g.out_channels, g.out_h, g.out_w});
    const std::size_t in_stride = static_cast<std::size_t>(g.channels) * g.height * g.width;
    const std::size_t out_stride = static_cast<std::size_t>(g.out_channels) * g.positions();
    ConstMatrixMap w(weight.raw(), g.out_channels, g.patch());
    Storage columns(g.pointwise() ? 0 : static_cast<std::size_t>(g.patch()) * g.positions());
    for (int n = 0; n < g.batch; ++n) {
        const Real* image = input.raw() + n * in_stride;
        const Real* cols = image;
        if (!g.pointwise()) {
            im2col(image, g, columns.data());
            cols = columns.data();
        }
        ConstMatrixMap col(cols, g.patch(), g.positions());
        MatrixMap out(output.raw() + n * out_stride, g.out_channels, g.positions());
        out.noalias() = w * col;
        if (!bias.empty()) {
            for (int o = 0; o < g.out_channels; ++o) {
                out.row(o).array() += bias[static_cast<std::size_t>(o)];
            }
        }
    }
    return output;
}

void conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out, int stride,
                     int pad, Tensor* grad_input, Tensor* grad_weight, Tensor* grad_bias) {
    const ConvGeometry g = conv_geometry(input, weight, stride, pad);
    require(grad_out.shape() == Shape({g.batch, g.out_channels, g.out_h, g.out_w}),
            ErrorCode::kShapeError, "conv2d_backward gradient shape mismatch");
    const std::size_t in_stride = static_cast<std::size_t>(g.channels) * g.height * g.width;
    const std::size_t out_stride = static_cast<std::size_t>(g.out_channels) * g.positions();
    ConstMatrixMap w(weight.raw(), g.out_channels, g.patch());
    Storage columns(g.pointwise() ? 0 : static_cast<std::size_t>(g.patch()) * g.positions());
    Storage grad_columns(
        (grad_input && !g.pointwise()) ? static_cast<std::size_t>(g.patch()) * g.positions() : 0);
    if (grad_input && grad_input->shape() != input.shape()) {
        *grad_input = Tensor(input.shape());
    }
    for (int n = 0; n < g.batch; ++n) {
        ConstMatrixMap gout(grad_out.raw() + n * out_stride, g.out_channels, g.positions());
        if (grad_weight) {
            const Real* image = input.raw() + n * in_stride;
            const Real* cols = image;
            if (!g.pointwise()) {
                im2col(image, g, columns.data());
                cols = columns.data();
            }
            ConstMatrixMap col(cols, g.patch(), g.positions());
            MatrixMap gw(grad_weight->raw(), g.out_channels, g.patch());
            gw.noalias() += gout * col.transpose();
        }
        if (grad_bias) {
            for (int o = 0; o < g.out_channels; ++o) {
                (*grad_bias)[static_cast<std::size_t>(o)] += gout.row(o).sum();
            }
        }
        if (grad_input) {
            Real* gimage = grad_input->raw() + n * in_stride;
            if (g.pointwise()) {
                MatrixMap gx(gimage, g.patch(), g.positions());
                gx.noalias() += w.transpose() * gout;
            } else {
                MatrixMap gcol(grad_columns.data(), g.patch(), g.positions());
                gcol.noalias() = w.transpose() * gout;
                col2im(grad_columns.data(), g, gimage);
            }
        }
    }
}

Tensor pixel_unshuffle(const Tensor& input, int factor) {
    require(input.rank() == 4, ErrorCode::kShapeError, "pixel_unshuffle expects [N,C,H,W]");
    require(factor >= 1, ErrorCode::kShapeError, "pixel_unshuffle factor must be >= 1");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    require(h % factor == 0 && w % factor == 0, ErrorCode::kShapeError,
            "pixel_unshuffle: " + shape_string(input.shape()) + " not divisible by " +
                std::to_string(factor));
    const int oh = h / factor, ow = w / factor;
    Tensor output(Shape{n, c * factor * factor, oh, ow});
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < c; ++ch) {
            for (int i = 0; i < factor; ++i) {
                for (int j = 0; j < factor; ++j) {
                    const int oc = (ch * factor + i) * factor + j;
                    for (int y = 0; y < oh; ++y) {
                        for (int x = 0; x < ow; ++x) {
                            output.at(b, oc, y, x) = input.at(b, ch, y * factor + i, x * factor + j);
                        }
                    }
                }
            }
        }
    }
    return output;
}

Tensor pixel_shuffle(const Tensor& input, int factor) {
    require(input.rank() == 4, ErrorCode::kShapeError, "pixel_shuffle expects [N,C,H,W]");
    require(factor >= 1, ErrorCode::kShapeError, "pixel_shuffle factor must be >= 1");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    require(c % (factor * factor) == 0, ErrorCode::kShapeError,
            "pixel_shuffle: channels not divisible by factor^2");
    const int oc = c / (factor * factor);
    Tensor output(Shape{n, oc, h * factor, w * factor});
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < oc; ++ch) {
            for (int i = 0; i < factor; ++i) {
                for (int j = 0; j < factor; ++j) {
                    const int ic = (ch * factor + i) * factor + j;
                    for (int y = 0; y < h; ++y) {
                        for (int x = 0; x < w; ++x) {
                            output.at(b, ch, y * factor + i, x * factor + j) = input.at(b, ic, y, x);
                        }
                    }
                }
            }
        }
    }
    return output;
}

Tensor resize_nearest(const Tensor& input, int out_h, int out_w) {
    require(input.rank() == 4, ErrorCode::kShapeError, "resize_nearest expects [N,C,H,W]");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    Tensor output(Shape{n, c, out_h, out_w});
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < c; ++ch) {
            for (int y = 0; y < out_h; ++y) {
                const int sy = static_cast<int>(static_cast<long>(y) * h / out_h);
                for (int x = 0; x < out_w; ++x) {
                    const int sx = static_cast<int>(static_cast<long>(x) * w / out_w);
                    output.at(b, ch, y, x) = input.at(b, ch, sy, sx);
                }
            }
        }
    }
    return output;
}

Tensor resize_nearest_backward(const Tensor& grad_out, int in_h, int in_w) {
    const int n = grad_out.dim(0), c = grad_out.dim(1), out_h = grad_out.dim(2), out_w = grad_out.dim(3);
    Tensor grad(Shape{n, c, in_h, in_w});
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < c; ++ch) {
            for (int y = 0; y < out_h; ++y) {
                const int sy = static_cast<int>(static_cast<long>(y) * in_h / out_h);
                for (int x = 0; x < out_w; ++x) {
                    const int sx = static_cast<int>(static_cast<long>(x) * in_w / out_w);
                    grad.at(b, ch, sy, sx) += grad_out.at(b, ch, y, x);
                }
            }
        }
    }
    return grad;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require(a.rank() == 4 && b.rank() == 4, ErrorCode::kShapeError, "concat_channels expects 4-d");
    require(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3), ErrorCode::kShapeError,
            "concat_channels: incompatible " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    const int n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
    const std::size_t plane = static_cast<std::size_t>(a.dim(2)) * a.dim(3);
    Tensor output(Shape{n, ca + cb, a.dim(2), a.dim(3)});
    for (int i = 0; i < n; ++i) {
        std::copy_n(a.raw() + i * ca * plane, ca * plane, output.raw() + i * (ca + cb) * plane);
        std::copy_n(b.raw() + i * cb * plane, cb * plane, output.raw() + (i * (ca + cb) + ca) * plane);
    }
    return output;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    require(input.rank() == 2 && weight.rank() == 2, ErrorCode::kShapeError, "linear expects 2-d operands");
    require(input.dim(1) == weight.dim(1), ErrorCode::kShapeError,
            "linear: input " + shape_string(input.shape()) + " weight " + shape_string(weight.shape()));
    const int n = input.dim(0), d = input.dim(1), o = weight.dim(0);
    Tensor output(Shape{n, o});
    ConstMatrixMap x(input.raw(), n, d);
    ConstMatrixMap w(weight.raw(), o, d);
    MatrixMap y(output.raw(), n, o);
    y.noalias() = x * w.transpose();
    if (!bias.empty()) {
        require(bias.numel() == static_cast<std::size_t>(o), ErrorCode::kShapeError, "linear bias mismatch");
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < o; ++j) {
                y(i, j) += bias[static_cast<std::size_t>(j)];
            }
        }
    }
    return output;
}

Real silu(Real x) { return x / (Real(1) + std::exp(-x)); }

Real silu_grad(Real x) {
    const Real s = Real(1) / (Real(1) + std::exp(-x));
    return s * (Real(1) + x * (Real(1) - s));
}

}  // namespace teadapter::nn::kernels
