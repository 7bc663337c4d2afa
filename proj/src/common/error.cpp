// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"

namespace teadapter {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kOk: return "Ok";
        case ErrorCode::kEmptyInput: return "EmptyInput";
        case ErrorCode::kInvalidAudio: return "InvalidAudio";
        case ErrorCode::kKernelTooLarge: return "KernelTooLarge";
        case ErrorCode::kInvalidWidth: return "InvalidWidth";
        case ErrorCode::kKTooLarge: return "KTooLarge";
        case ErrorCode::kTooShort: return "TooShort";
        case ErrorCode::kNoBeats: return "NoBeats";
        case ErrorCode::kPitchOutOfRange: return "PitchOutOfRange";
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kShapeError: return "ShapeError";
        case ErrorCode::kInvalidLoss: return "InvalidLoss";
        case ErrorCode::kStepError: return "StepError";
        case ErrorCode::kContractViolation: return "ContractViolation";
        case ErrorCode::kNotLoaded: return "NotLoaded";
        case ErrorCode::kUndefined: return "Undefined";
        case ErrorCode::kInsufficientBeats: return "InsufficientBeats";
        case ErrorCode::kIngestError: return "IngestError";
        case ErrorCode::kDecodeError: return "DecodeError";
        case ErrorCode::kCacheCollision: return "CacheCollision";
        case ErrorCode::kIoError: return "IoError";
        case ErrorCode::kSchemaError: return "SchemaError";
        case ErrorCode::kInternal: return "Internal";
    }
    return "Unknown";
}

}  // namespace teadapter
