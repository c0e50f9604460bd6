// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/errors.h"

namespace past {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kData: return "data";
    case ErrorKind::kState: return "state";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kTraining: return "training";
    case ErrorKind::kWav: return "wav";
    case ErrorKind::kCheckpoint: return "checkpoint";
  }
  return "unknown";
}

}  // namespace past
