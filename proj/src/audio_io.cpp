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

#include "cmgan/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace cmgan {
namespace {

namespace fs = std::filesystem;

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint16_t get_u16(const unsigned char* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

void validate(const Waveform& w) {
  if (w.sample_rate <= 0) throw AudioError("waveform: non-positive sample rate");
  if (w.samples.size() == 0) throw AudioError("waveform: no samples");
  if (!w.samples.allFinite()) throw AudioError("waveform: non-finite sample");
}

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioError("cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) ||
      std::memcmp(bytes.data() + 8, "WAVE", 4))
    throw AudioError(path + ": not a RIFF/WAVE file");

  int channels = 0, rate = 0, bits = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t len = get_u32(chunk + 4);
    const std::size_t avail = std::min(len, bytes.size() - pos - 8);
    if (!std::memcmp(chunk, "fmt ", 4)) {
      if (avail < 16) throw AudioError(path + ": truncated fmt chunk");
      std::uint16_t format = get_u16(chunk + 8);
      if (format == kFormatExtensible && avail >= 26) format = get_u16(chunk + 32);
      if (format != kFormatPcm)
        throw AudioError(path + ": unsupported encoding (PCM only)");
      channels = get_u16(chunk + 10);
      rate = static_cast<int>(get_u32(chunk + 12));
      bits = get_u16(chunk + 22);
      have_fmt = true;
    } else if (!std::memcmp(chunk, "data", 4)) {
      data = chunk + 8;
      data_len = avail;
    }
    pos += 8 + len + (len & 1);
  }
  if (!have_fmt) throw AudioError(path + ": missing fmt chunk");
  if (bits != 16) throw AudioError(path + ": unsupported bit depth " + std::to_string(bits));
  if (channels < 1) throw AudioError(path + ": no channels");
  if (!data) throw AudioError(path + ": missing data chunk");

  const std::size_t frames = data_len / (2 * std::size_t(channels));
  if (frames == 0) throw AudioError(path + ": zero-length audio");
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<Eigen::Index>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = data + 2 * (i * channels + c);
      acc += static_cast<std::int16_t>(get_u16(p)) / 32768.0;
    }
    w.samples[static_cast<Eigen::Index>(i)] = acc / channels;
  }
  validate(w);
  return w;
}

void write_wav(const Waveform& w, const std::string& path) {
  validate(w);
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  std::string out;
  out.reserve(44 + 2 * std::size_t(n));
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double v = std::clamp(w.samples[i], -1.0, 32767.0 / 32768.0);
    put_u16(out, static_cast<std::uint16_t>(
                     static_cast<std::int16_t>(std::lround(v * 32768.0))));
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw AudioError("cannot write " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw AudioError("write failed for " + path);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw AudioError("cannot write " + path + ": " + ec.message());
}

std::string to_string(Task task) {
  switch (task) {
    case Task::kDenoise: return "denoise";
    case Task::kDereverb: return "dereverb";
    case Task::kSuperres: return "superres";
  }
  return "denoise";
}

Task parse_task(const std::string& name) {
  if (name == "denoise") return Task::kDenoise;
  if (name == "dereverb") return Task::kDereverb;
  if (name == "superres") return Task::kSuperres;
  throw std::invalid_argument("unknown task '" + name + "'");
}

std::vector<ManifestEntry> load_manifest(const std::string& path,
                                         const ManifestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (!opts.resolve_relative || p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
  };

  std::vector<ManifestEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ManifestError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ManifestError(where + "expected a JSON object");
    for (const char* key : {"clean_path", "degraded_path", "task"})
      if (!j.contains(key) || !j[key].is_string())
        throw ManifestError(where + "missing string field '" + key + "'");

    ManifestEntry e;
    e.clean_path = resolve(j["clean_path"].get<std::string>());
    e.degraded_path = resolve(j["degraded_path"].get<std::string>());
    try {
      e.task = parse_task(j["task"].get<std::string>());
    } catch (const std::invalid_argument& err) {
      throw ManifestError(where + err.what());
    }
    if (j.contains("meta")) {
      if (!j["meta"].is_object()) throw ManifestError(where + "'meta' must be an object");
      for (const auto& [k, v] : j["meta"].items())
        e.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (opts.check_paths) {
      bool dangling = false;
      for (const std::string* p : {&e.clean_path, &e.degraded_path}) {
        if (fs::exists(*p)) continue;
        if (opts.strict) throw ManifestError(where + "dangling path " + *p);
        dangling = true;
      }
      if (dangling) continue;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string manifest_line(const ManifestEntry& entry) {
  nlohmann::ordered_json j;
  j["clean_path"] = entry.clean_path;
  j["degraded_path"] = entry.degraded_path;
  j["task"] = to_string(entry.task);
  j["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : entry.meta) j["meta"][k] = v;
  return j.dump();
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw ManifestError("cannot write manifest " + path);
    for (const auto& e : entries) f << manifest_line(e) << '\n';
    if (!f) throw ManifestError("write failed for " + path);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw ManifestError("cannot write manifest " + path + ": " + ec.message());
}

}  // namespace cmgan
