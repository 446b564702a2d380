// Copyright 2026 The PairKB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pairkb/status.h"

namespace pairkb {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyCaption: return "EmptyCaption";
    case ErrorCode::kInvalidUtf8: return "InvalidUtf8";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kMetadataMismatch: return "MetadataMismatch";
    case ErrorCode::kCorruptIndex: return "CorruptIndex";
    case ErrorCode::kUnknownCaption: return "UnknownCaption";
    case ErrorCode::kUnknownAudioRef: return "UnknownAudioRef";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kNonFiniteResponse: return "NonFiniteResponse";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kHttpStatus: return "HttpStatus";
    case ErrorCode::kEmptyKB: return "EmptyKB";
    case ErrorCode::kBadClusterCount: return "BadClusterCount";
    case ErrorCode::kSharedSpaceRequired: return "SharedSpaceRequired";
    case ErrorCode::kMissingTextQuery: return "MissingTextQuery";
    case ErrorCode::kMissingIndex: return "MissingIndex";
    case ErrorCode::kCaptionFailed: return "CaptionFailed";
    case ErrorCode::kEncodeFailed: return "EncodeFailed";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kEmptyTrainset: return "EmptyTrainset";
    case ErrorCode::kEmptyCandidates: return "EmptyCandidates";
    case ErrorCode::kUnknownEntryId: return "UnknownEntryId";
    case ErrorCode::kMissingRanking: return "MissingRanking";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kEmptyRetrieval: return "EmptyRetrieval";
    case ErrorCode::kUnsortedAxis: return "UnsortedAxis";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace pairkb
