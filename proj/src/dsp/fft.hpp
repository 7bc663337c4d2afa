// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace teadapter::dsp {

// Real-to-complex FFT of length n producing n/2 + 1 bins, and its inverse
// (unnormalized, like FFTW). Plans are cached per size; execution is
// thread-safe.
void rfft(std::span<const double> input, std::span<std::complex<double>> output);
void irfft(std::span<const std::complex<double>> input, std::span<double> output);

}  // namespace teadapter::dsp
