// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace past {

// Checkpoint container. Layout (little-endian):
//   "PASTCKPT"                          8 bytes
//   version        u32                  currently 1
//   meta_len       u32, meta bytes      UTF-8 JSON (config record etc.)
//   n_tensors      u32
//   per tensor:    u16 name_len, name, u8 ndim, u32 dims[ndim],
//                  f32 values[prod(dims)]
// Tensors are written in lexicographic name order.
struct ArchiveTensor {
  std::vector<int64_t> shape;
  std::vector<float> values;

  int64_t numel() const;
};

class TensorArchive {
 public:
  nlohmann::json meta = nlohmann::json::object();

  void Put(const std::string& name, std::vector<int64_t> shape,
           std::vector<float> values);
  bool Has(const std::string& name) const { return tensors_.count(name) > 0; }
  const ArchiveTensor& Get(const std::string& name) const;
  const std::map<std::string, ArchiveTensor>& tensors() const { return tensors_; }

  void Save(const std::string& path) const;
  static TensorArchive Load(const std::string& path);

 private:
  std::map<std::string, ArchiveTensor> tensors_;
};

}  // namespace past
