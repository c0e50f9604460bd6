// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/archive.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/binary_io.h"
#include "core/errors.h"

namespace past {

namespace {
constexpr char kMagic[8] = {'P', 'A', 'S', 'T', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;
}  // namespace

int64_t ArchiveTensor::numel() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

void TensorArchive::Put(const std::string& name, std::vector<int64_t> shape,
                        std::vector<float> values) {
  ArchiveTensor t{std::move(shape), std::move(values)};
  PAST_REQUIRE(t.numel() == static_cast<int64_t>(t.values.size()), kArgument,
               "tensor '" + name + "' shape does not match its data");
  PAST_REQUIRE(!name.empty() && name.size() < 65536, kArgument, "bad tensor name");
  tensors_[name] = std::move(t);
}

const ArchiveTensor& TensorArchive::Get(const std::string& name) const {
  auto it = tensors_.find(name);
  PAST_REQUIRE(it != tensors_.end(), kCheckpoint,
               "checkpoint is missing tensor '" + name + "'");
  return it->second;
}

void TensorArchive::Save(const std::string& path) const {
  // Write to a sibling file first so a failed write never clobbers the
  // previous checkpoint.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    PAST_REQUIRE(os.good(), kCheckpoint, "cannot create checkpoint '" + tmp + "'");
    os.write(kMagic, 8);
    le::Write<uint32_t>(os, kVersion);
    const std::string text = meta.dump();
    le::Write<uint32_t>(os, static_cast<uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    le::Write<uint32_t>(os, static_cast<uint32_t>(tensors_.size()));
    for (const auto& [name, t] : tensors_) {
      le::Write<uint16_t>(os, static_cast<uint16_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      le::Write<uint8_t>(os, static_cast<uint8_t>(t.shape.size()));
      for (int64_t d : t.shape) le::Write<uint32_t>(os, static_cast<uint32_t>(d));
      if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(t.values.data()),
                 static_cast<std::streamsize>(t.values.size() * sizeof(float)));
      } else {
        for (float v : t.values) le::Write<float>(os, v);
      }
    }
    os.flush();
    PAST_REQUIRE(os.good(), kCheckpoint,
                 "failed writing checkpoint '" + tmp + "' (disk full?)");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  PAST_REQUIRE(!ec, kCheckpoint, "cannot move checkpoint into place: " + ec.message());
}

TensorArchive TensorArchive::Load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  PAST_REQUIRE(is.good(), kCheckpoint, "cannot open checkpoint '" + path + "'");
  char magic[8];
  PAST_REQUIRE(is.read(magic, 8) && std::memcmp(magic, kMagic, 8) == 0,
               kCheckpoint, "'" + path + "' is not a checkpoint");
  const auto version = le::Read<uint32_t>(is, ErrorKind::kCheckpoint);
  PAST_REQUIRE(version == kVersion, kCheckpoint,
               "unsupported checkpoint version " + std::to_string(version));
  TensorArchive ar;
  const auto meta_len = le::Read<uint32_t>(is, ErrorKind::kCheckpoint);
  std::string text(meta_len, '\0');
  PAST_REQUIRE(is.read(text.data(), meta_len), kCheckpoint, "truncated checkpoint meta");
  ar.meta = nlohmann::json::parse(text, nullptr, false);
  PAST_REQUIRE(!ar.meta.is_discarded(), kCheckpoint, "checkpoint meta is not JSON");
  const auto count = le::Read<uint32_t>(is, ErrorKind::kCheckpoint);
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = le::Read<uint16_t>(is, ErrorKind::kCheckpoint);
    std::string name(name_len, '\0');
    PAST_REQUIRE(is.read(name.data(), name_len), kCheckpoint, "truncated tensor name");
    const auto ndim = le::Read<uint8_t>(is, ErrorKind::kCheckpoint);
    std::vector<int64_t> shape(ndim);
    int64_t numel = 1;
    for (auto& d : shape) {
      d = le::Read<uint32_t>(is, ErrorKind::kCheckpoint);
      numel *= d;
    }
    std::vector<float> values(static_cast<size_t>(numel));
    for (auto& v : values) v = le::Read<float>(is, ErrorKind::kCheckpoint);
    ar.Put(name, std::move(shape), std::move(values));
  }
  return ar;
}

}  // namespace past
