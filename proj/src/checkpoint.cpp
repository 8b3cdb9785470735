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

#include "cmgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace cmgan {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'M', 'G', 'A', 'N', 'C', 'K', '\0'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::ifstream& in, const std::string& path) : in_(in), path_(path) {}

  template <typename T>
  T get() {
    T v;
    read(&v, sizeof v);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!in_) throw CheckpointError(path_ + ": truncated checkpoint");
  }

 private:
  std::ifstream& in_;
  const std::string& path_;
};

template <typename Scalar>
void write_tensor(std::ofstream& out, const Tensor<Scalar>& t) {
  put<std::uint8_t>(out, sizeof(Scalar));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (Index d : t.shape()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(Scalar)));
}

template <typename Scalar>
Tensor<Scalar> read_tensor(Reader& r, const Shape& shape) {
  Tensor<Scalar> t(shape);
  r.read(t.data(), static_cast<std::size_t>(t.size()) * sizeof(Scalar));
  return t;
}

}  // namespace

const std::string& Checkpoint::meta(const std::string& key) const {
  const auto it = metadata.find(key);
  if (it == metadata.end()) throw CheckpointError("checkpoint has no metadata '" + key + "'");
  return it->second;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, ck.version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.metadata.size()));
    for (const auto& [k, v] : ck.metadata) {
      put_string(out, k);
      put_string(out, v);
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
    for (const auto& [name, stored] : ck.tensors) {
      put_string(out, name);
      std::visit([&](const auto& t) { write_tensor(out, t); }, stored);
    }
    if (!out) throw CheckpointError("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  Reader r(in, path);
  char magic[sizeof kMagic];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw CheckpointError(path + ": not a cmgan checkpoint");
  Checkpoint ck;
  ck.version = r.get<std::uint32_t>();
  if (ck.version != kCheckpointVersion)
    throw CheckpointError(path + ": checkpoint version " + std::to_string(ck.version) +
                          " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto n_meta = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.get_string();
    ck.metadata[k] = r.get_string();
  }
  const auto n_tensors = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const std::string name = r.get_string();
    const auto dtype = r.get<std::uint8_t>();
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<Index>(r.get<std::uint64_t>());
    if (dtype == 4)
      ck.tensors[name] = read_tensor<float>(r, shape);
    else if (dtype == 8)
      ck.tensors[name] = read_tensor<double>(r, shape);
    else
      throw CheckpointError(path + ": tensor '" + name + "' has unknown dtype");
  }
  return ck;
}

}  // namespace cmgan
