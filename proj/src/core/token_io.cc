// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/token_io.h"

#include <cstring>
#include <fstream>
#include <vector>

#include "core/binary_io.h"
#include "core/errors.h"

namespace past {

namespace {

void CheckShape(const TokenMatrix& tokens) {
  PAST_REQUIRE(tokens.n_q >= 1 && tokens.n_q <= 255, kArgument,
               "token file holds 1..255 streams");
  PAST_REQUIRE(tokens.codebook_size >= 1 && tokens.codebook_size <= 65535,
               kArgument, "codebook size must fit in u16");
  PAST_REQUIRE(tokens.frame_rate >= 0 && tokens.frame_rate <= 65535, kArgument,
               "frame rate must fit in u16");
  tokens.Validate();
}

void PutHeader(unsigned char* h, uint8_t version, int frame_rate, int n_q, int k,
               uint32_t frames) {
  std::memcpy(h, "PAST", 4);
  h[4] = version;
  h[5] = frame_rate & 0xFF;
  h[6] = (frame_rate >> 8) & 0xFF;
  h[7] = static_cast<unsigned char>(n_q);
  h[8] = k & 0xFF;
  h[9] = (k >> 8) & 0xFF;
  for (int i = 0; i < 4; ++i) h[10 + i] = (frames >> (8 * i)) & 0xFF;
}

constexpr size_t kHeaderBytes = 14;

}  // namespace

void WriteTokens(std::ostream& os, const TokenMatrix& tokens) {
  CheckShape(tokens);
  unsigned char header[kHeaderBytes];
  PutHeader(header, kTokenFileRowMajor, tokens.frame_rate, tokens.n_q,
            tokens.codebook_size, static_cast<uint32_t>(tokens.frames));
  os.write(reinterpret_cast<const char*>(header), kHeaderBytes);
  for (int32_t v : tokens.indices) le::Write<uint16_t>(os, static_cast<uint16_t>(v));
  PAST_REQUIRE(os.good(), kIo, "failed writing token stream");
}

void WriteTokenFile(const std::string& path, const TokenMatrix& tokens) {
  std::ofstream os(path, std::ios::binary);
  PAST_REQUIRE(os.good(), kIo, "cannot write '" + path + "'");
  WriteTokens(os, tokens);
}

TokenMatrix ReadTokens(std::istream& is) {
  char magic[4];
  PAST_REQUIRE(is.read(magic, 4) && std::memcmp(magic, "PAST", 4) == 0, kData,
               "not a token file (bad magic)");
  const auto version = le::Read<uint8_t>(is);
  PAST_REQUIRE(version == kTokenFileRowMajor || version == kTokenFileFrameMajor,
               kData, "unsupported token file version " + std::to_string(version));
  const auto frame_rate = le::Read<uint16_t>(is);
  const auto n_q = le::Read<uint8_t>(is);
  const auto k = le::Read<uint16_t>(is);
  const auto frames = le::Read<uint32_t>(is);
  PAST_REQUIRE(n_q >= 1 && k >= 1, kData, "token file header has zero n_q or K");
  std::vector<uint16_t> raw;
  if (frames == kTokenFramesUnknown) {
    PAST_REQUIRE(version == kTokenFileFrameMajor, kData,
                 "open-ended length is only valid for frame-major files");
    uint16_t v;
    while (le::TryRead(is, &v)) raw.push_back(v);
    PAST_REQUIRE(raw.size() % n_q == 0, kData, "truncated token frame");
  } else {
    raw.resize(static_cast<size_t>(frames) * n_q);
    for (auto& v : raw) v = le::Read<uint16_t>(is);
  }
  const int t_total = static_cast<int>(raw.size() / n_q);
  TokenMatrix tokens(n_q, t_total, k, frame_rate);
  for (int q = 0; q < n_q; ++q) {
    for (int t = 0; t < t_total; ++t) {
      tokens.at(q, t) = version == kTokenFileRowMajor
                            ? raw[static_cast<size_t>(q) * t_total + t]
                            : raw[static_cast<size_t>(t) * n_q + q];
    }
  }
  tokens.Validate();
  return tokens;
}

TokenMatrix ReadTokenFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  PAST_REQUIRE(is.good(), kIo, "cannot open token file '" + path + "'");
  return ReadTokens(is);
}

TokenWriter::TokenWriter(const std::string& path, int n_q, int codebook_size,
                         int frame_rate)
    : n_q_(n_q), codebook_size_(codebook_size) {
  PAST_REQUIRE(n_q >= 1 && n_q <= 255 && codebook_size >= 1 &&
                   codebook_size <= 65535,
               kArgument, "token writer shape out of range");
  if (path == "-") {
    file_ = stdout;
  } else {
    file_ = std::fopen(path.c_str(), "wb");
    PAST_REQUIRE(file_ != nullptr, kIo, "cannot write '" + path + "'");
    owns_ = true;
  }
  unsigned char header[kHeaderBytes];
  PutHeader(header, kTokenFileFrameMajor, frame_rate, n_q, codebook_size,
            kTokenFramesUnknown);
  PAST_REQUIRE(std::fwrite(header, 1, kHeaderBytes, file_) == kHeaderBytes, kIo,
               "failed writing token header");
  std::fflush(file_);
}

TokenWriter::~TokenWriter() {
  try {
    Close();
  } catch (...) {
  }
}

void TokenWriter::Append(const TokenMatrix& frames) {
  PAST_REQUIRE(file_ != nullptr, kState, "token writer already closed");
  if (frames.frames == 0) return;
  PAST_REQUIRE(frames.n_q == n_q_ && frames.codebook_size == codebook_size_,
               kArgument, "appended frames do not match the header");
  frames.Validate();
  std::vector<unsigned char> buf(static_cast<size_t>(frames.frames) * n_q_ * 2);
  size_t o = 0;
  for (int t = 0; t < frames.frames; ++t) {
    for (int q = 0; q < n_q_; ++q) {
      const auto v = static_cast<uint16_t>(frames.at(q, t));
      buf[o++] = v & 0xFF;
      buf[o++] = v >> 8;
    }
  }
  PAST_REQUIRE(std::fwrite(buf.data(), 1, buf.size(), file_) == buf.size(), kIo,
               "failed appending token frames");
  std::fflush(file_);
  frames_ += frames.frames;
}

void TokenWriter::Close() {
  if (file_ == nullptr) return;
  if (owns_) {
    if (std::fseek(file_, 10, SEEK_SET) == 0) {
      unsigned char count[4];
      for (int i = 0; i < 4; ++i) count[i] = (frames_ >> (8 * i)) & 0xFF;
      std::fwrite(count, 1, 4, file_);
    }
    const bool ok = std::fclose(file_) == 0;
    file_ = nullptr;
    PAST_REQUIRE(ok, kIo, "failed closing token file");
  } else {
    std::fflush(file_);
    file_ = nullptr;
  }
}

}  // namespace past
