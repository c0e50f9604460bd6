// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "core/types.h"

namespace past {

// Reads a mono PCM16 or IEEE float32 WAV file.
AudioSegment ReadWav(const std::string& path);

// Writes mono PCM16 (default) or float32 WAV.
void WriteWav(const std::string& path, const AudioSegment& audio,
              bool float32 = false);

// Incremental reader over a WAV file or raw PCM16 little-endian stream.
// "-" reads standard input. Input without a RIFF header is treated as raw
// mono PCM16 at `raw_sample_rate`.
class AudioReader {
 public:
  explicit AudioReader(const std::string& path, int raw_sample_rate = 16000);
  ~AudioReader();
  AudioReader(const AudioReader&) = delete;
  AudioReader& operator=(const AudioReader&) = delete;

  int sample_rate() const { return sample_rate_; }
  bool is_wav() const { return is_wav_; }
  // Reads up to `max` samples; returns 0 at end of stream.
  size_t Read(float* out, size_t max);

 private:
  size_t ReadBytes(void* dst, size_t n);

  std::FILE* file_ = nullptr;
  bool owns_ = false;
  bool is_wav_ = false;
  bool float32_ = false;
  int sample_rate_ = 16000;
  uint64_t data_remaining_ = UINT64_MAX;
  std::vector<unsigned char> pushback_;
};

}  // namespace past
