// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace teadapter {

// Flushes subnormal floats to zero for the lifetime of the guard. Network
// activations that decay toward zero otherwise hit the slow microcode path
// and cost several times the arithmetic they represent.
class ScopedFlushDenormals {
public:
#if defined(__SSE__)
    ScopedFlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | kFlushToZero | kDenormalsAreZero); }
    ~ScopedFlushDenormals() { _mm_setcsr(saved_); }
#else
    ScopedFlushDenormals() = default;
#endif
    ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
    ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;

private:
#if defined(__SSE__)
    static constexpr unsigned kFlushToZero = 0x8000;
    static constexpr unsigned kDenormalsAreZero = 0x0040;
    unsigned saved_;
#endif
};

}  // namespace teadapter
