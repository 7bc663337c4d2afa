// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "common/error.hpp"

namespace teadapter::dsp {
namespace {

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

const Plans& plans_for(int n) {
    static std::map<int, Plans> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<fftw_complex> spectrum(static_cast<std::size_t>(n / 2 + 1));
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_dft_r2c_1d(n, real.data(), spectrum.data(), flags);
    p.inverse = fftw_plan_dft_c2r_1d(n, spectrum.data(), real.data(), flags | FFTW_DESTROY_INPUT);
    require(p.forward != nullptr && p.inverse != nullptr, ErrorCode::kInternal, "FFTW planning failed");
    return cache.emplace(n, p).first->second;
}

}  // namespace

void rfft(std::span<const double> input, std::span<std::complex<double>> output) {
    const int n = static_cast<int>(input.size());
    require(n > 0 && output.size() == static_cast<std::size_t>(n / 2 + 1), ErrorCode::kInvalidArgument,
            "rfft buffer size mismatch");
    const Plans& p = plans_for(n);
    std::vector<double> scratch(input.begin(), input.end());
    fftw_execute_dft_r2c(p.forward, scratch.data(), reinterpret_cast<fftw_complex*>(output.data()));
}

void irfft(std::span<const std::complex<double>> input, std::span<double> output) {
    const int n = static_cast<int>(output.size());
    require(n > 0 && input.size() == static_cast<std::size_t>(n / 2 + 1), ErrorCode::kInvalidArgument,
            "irfft buffer size mismatch");
    const Plans& p = plans_for(n);
    std::vector<std::complex<double>> scratch(input.begin(), input.end());
    fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), output.data());
}

}  // namespace teadapter::dsp
