// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/binary_io.h"
#include "core/errors.h"

namespace past {

namespace {

uint16_t U16(const unsigned char* p) { return p[0] | (p[1] << 8); }
uint32_t U32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

AudioReader::AudioReader(const std::string& path, int raw_sample_rate)
    : sample_rate_(raw_sample_rate) {
  if (path == "-") {
    file_ = stdin;
  } else {
    file_ = std::fopen(path.c_str(), "rb");
    PAST_REQUIRE(file_ != nullptr, kIo, "cannot open audio file '" + path + "'");
    owns_ = true;
  }
  unsigned char head[12];
  const size_t got = std::fread(head, 1, sizeof(head), file_);
  if (got < 12 || std::memcmp(head, "RIFF", 4) != 0) {
    // Raw PCM16: replay the bytes already consumed.
    pushback_.assign(head, head + got);
    return;
  }
  PAST_REQUIRE(std::memcmp(head + 8, "WAVE", 4) == 0, kWav, "RIFF file is not WAVE");
  is_wav_ = true;
  bool have_fmt = false;
  while (true) {
    unsigned char chunk[8];
    PAST_REQUIRE(std::fread(chunk, 1, 8, file_) == 8, kWav, "WAV has no data chunk");
    const uint32_t size = U32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      PAST_REQUIRE(size >= 16 && size < 4096, kWav, "bad fmt chunk");
      std::vector<unsigned char> fmt(size + (size & 1));
      PAST_REQUIRE(std::fread(fmt.data(), 1, fmt.size(), file_) == fmt.size(), kWav,
                   "truncated fmt chunk");
      uint16_t format = U16(fmt.data());
      const uint16_t channels = U16(fmt.data() + 2);
      sample_rate_ = static_cast<int>(U32(fmt.data() + 4));
      const uint16_t bits = U16(fmt.data() + 14);
      if (format == 0xFFFE && size >= 26) format = U16(fmt.data() + 24);
      PAST_REQUIRE(channels == 1, kWav, "only mono WAV is supported");
      if (format == 1 && bits == 16) {
        float32_ = false;
      } else if (format == 3 && bits == 32) {
        float32_ = true;
      } else {
        Fail(ErrorKind::kWav, "unsupported WAV encoding (need PCM16 or float32)");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      PAST_REQUIRE(have_fmt, kWav, "WAV data chunk precedes fmt chunk");
      // Streaming writers often leave the size as 0 or 0xFFFFFFFF.
      data_remaining_ = (size == 0 || size == 0xFFFFFFFFu) ? UINT64_MAX : size;
      break;
    } else {
      std::vector<unsigned char> skip(size + (size & 1));
      PAST_REQUIRE(std::fread(skip.data(), 1, skip.size(), file_) == skip.size(),
                   kWav, "truncated WAV chunk");
    }
  }
}

AudioReader::~AudioReader() {
  if (owns_ && file_) std::fclose(file_);
}

size_t AudioReader::ReadBytes(void* dst, size_t n) {
  auto* out = static_cast<unsigned char*>(dst);
  size_t done = 0;
  if (!pushback_.empty()) {
    const size_t take = std::min(n, pushback_.size());
    std::memcpy(out, pushback_.data(), take);
    pushback_.erase(pushback_.begin(), pushback_.begin() + take);
    done = take;
  }
  if (done < n) done += std::fread(out + done, 1, n - done, file_);
  return done;
}

size_t AudioReader::Read(float* out, size_t max) {
  const size_t width = float32_ ? 4 : 2;
  uint64_t want = static_cast<uint64_t>(max) * width;
  if (data_remaining_ != UINT64_MAX) want = std::min(want, data_remaining_);
  want -= want % width;
  std::vector<unsigned char> raw(want);
  size_t got = ReadBytes(raw.data(), raw.size());
  got -= got % width;
  if (data_remaining_ != UINT64_MAX) data_remaining_ -= got;
  const size_t n = got / width;
  for (size_t i = 0; i < n; ++i) {
    const unsigned char* p = raw.data() + i * width;
    if (float32_) {
      const uint32_t bits = U32(p);
      std::memcpy(&out[i], &bits, 4);
    } else {
      out[i] = static_cast<int16_t>(U16(p)) / 32768.0f;
    }
  }
  return n;
}

AudioSegment ReadWav(const std::string& path) {
  AudioReader reader(path);
  PAST_REQUIRE(reader.is_wav(), kWav, "'" + path + "' is not a RIFF/WAVE file");
  AudioSegment seg;
  seg.sample_rate = reader.sample_rate();
  std::vector<float> buf(8192);
  while (size_t n = reader.Read(buf.data(), buf.size()))
    seg.samples.insert(seg.samples.end(), buf.begin(), buf.begin() + n);
  return seg;
}

void WriteWav(const std::string& path, const AudioSegment& audio, bool float32) {
  std::ofstream os(path, std::ios::binary);
  PAST_REQUIRE(os.good(), kIo, "cannot write '" + path + "'");
  const uint32_t width = float32 ? 4 : 2;
  const uint32_t data_bytes = static_cast<uint32_t>(audio.samples.size() * width);
  os.write("RIFF", 4);
  le::Write<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  le::Write<uint32_t>(os, 16);
  le::Write<uint16_t>(os, float32 ? 3 : 1);
  le::Write<uint16_t>(os, 1);
  le::Write<uint32_t>(os, audio.sample_rate);
  le::Write<uint32_t>(os, audio.sample_rate * width);
  le::Write<uint16_t>(os, width);
  le::Write<uint16_t>(os, width * 8);
  os.write("data", 4);
  le::Write<uint32_t>(os, data_bytes);
  for (float s : audio.samples) {
    if (float32) {
      le::Write<float>(os, s);
    } else {
      const float c = std::clamp(s, -1.0f, 1.0f);
      le::Write<int16_t>(os, static_cast<int16_t>(std::lrint(c * 32767.0f)));
    }
  }
  PAST_REQUIRE(os.good(), kIo, "failed writing '" + path + "'");
}

}  // namespace past
