// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace teadapter {

enum class ErrorCode {
    kOk = 0,
    kEmptyInput,
    kInvalidAudio,
    kKernelTooLarge,
    kInvalidWidth,
    kKTooLarge,
    kTooShort,
    kNoBeats,
    kPitchOutOfRange,
    kInvalidArgument,
    kShapeError,
    kInvalidLoss,
    kStepError,
    kContractViolation,
    kNotLoaded,
    kUndefined,
    kInsufficientBeats,
    kIngestError,
    kDecodeError,
    kCacheCollision,
    kIoError,
    kSchemaError,
    kInternal,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

}  // namespace teadapter
