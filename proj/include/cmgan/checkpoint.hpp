// Copyright 2026 The cmgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Versioned binary container of named tensors plus string metadata.
//
//   "CMGANCK\0" | u32 version | u32 n_meta | n_meta x (str key, str value)
//   | u32 n_tensors | n_tensors x (str name, u8 dtype, u32 rank, u64 dims[rank],
//   raw little-endian data)
//
// where str is u32 length followed by bytes and dtype is 4 (float) or 8
// (double). Entries are written in key order, so equal contents give equal
// bytes.

#ifndef CMGAN_CHECKPOINT_HPP_
#define CMGAN_CHECKPOINT_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "cmgan/nn/module.hpp"
#include "cmgan/nn/tensor.hpp"

namespace cmgan {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  using Stored = std::variant<Tensor<float>, Tensor<double>>;

  std::uint32_t version = kCheckpointVersion;
  std::map<std::string, std::string> metadata;
  std::map<std::string, Stored> tensors;

  template <typename Scalar>
  void put(const std::string& name, const Tensor<Scalar>& t) {
    tensors[name] = t;
  }

  // Throws CheckpointError when missing or stored with another scalar type.
  template <typename Scalar>
  const Tensor<Scalar>& get(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError("checkpoint has no tensor '" + name + "'");
    const auto* t = std::get_if<Tensor<Scalar>>(&it->second);
    if (!t) throw CheckpointError("tensor '" + name + "' has a different scalar type");
    return *t;
  }

  bool has(const std::string& name) const { return tensors.count(name) > 0; }
  const std::string& meta(const std::string& key) const;
};

// Atomic (temporary file + rename).
void save_checkpoint(const Checkpoint& ck, const std::string& path);
// Refuses files with another magic or version.
Checkpoint load_checkpoint(const std::string& path);

template <typename Model>
void export_params(Model& model, const std::string& prefix, Checkpoint& ck) {
  model.visit(prefix, [&](const std::string& name, auto& p) { ck.put(name, p.value); });
}

// Every parameter must be present with a matching shape.
template <typename Model>
void import_params(Model& model, const std::string& prefix, const Checkpoint& ck) {
  model.visit(prefix, [&](const std::string& name, auto& p) {
    using Scalar = typename std::decay_t<decltype(p.value)>::value_type;
    const Tensor<Scalar>& t = ck.get<Scalar>(name);
    if (t.shape() != p.value.shape())
      throw CheckpointError("tensor '" + name + "' has shape " + to_string(t.shape()) +
                            ", model expects " + to_string(p.value.shape()));
    p.value = t;
  });
}

}  // namespace cmgan

#endif  // CMGAN_CHECKPOINT_HPP_
