// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "core/types.h"

namespace past {

// Token file layout (all little-endian):
//   "PAST"            4 bytes magic
//   version           u8   1 = stream-major (n_q x T rows)
//                          2 = frame-major, written incrementally
//   frame_rate        u16
//   n_q               u8
//   codebook_size     u16
//   frames            u32  (version 2 may use 0xFFFFFFFF = until EOF)
//   indices           u16 each
constexpr uint8_t kTokenFileRowMajor = 1;
constexpr uint8_t kTokenFileFrameMajor = 2;
constexpr uint32_t kTokenFramesUnknown = 0xFFFFFFFFu;

void WriteTokens(std::ostream& os, const TokenMatrix& tokens);
void WriteTokenFile(const std::string& path, const TokenMatrix& tokens);
TokenMatrix ReadTokens(std::istream& is);
TokenMatrix ReadTokenFile(const std::string& path);

// Appends frames to a version-2 token file as they become available. The
// header goes out on construction; the frame count is patched on Close()
// when the destination is seekable. "-" writes to standard output.
class TokenWriter {
 public:
  TokenWriter(const std::string& path, int n_q, int codebook_size,
              int frame_rate);
  ~TokenWriter();
  TokenWriter(const TokenWriter&) = delete;
  TokenWriter& operator=(const TokenWriter&) = delete;

  void Append(const TokenMatrix& frames);
  void Close();
  uint32_t frames_written() const { return frames_; }

 private:
  std::FILE* file_ = nullptr;
  bool owns_ = false;
  int n_q_;
  int codebook_size_;
  uint32_t frames_ = 0;
};

}  // namespace past
