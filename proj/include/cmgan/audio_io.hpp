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

// Mono 16-bit PCM WAV files and JSON-lines dataset manifests.

#ifndef CMGAN_AUDIO_IO_HPP_
#define CMGAN_AUDIO_IO_HPP_

#include <Eigen/Core>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmgan {

class AudioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waveform {
  Waveform() = default;
  Waveform(Eigen::VectorXd s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  Eigen::VectorXd samples;
  int sample_rate = 16000;

  Eigen::Index size() const { return samples.size(); }
  double duration() const { return double(samples.size()) / sample_rate; }
};

// Throws AudioError when `w` is empty, has a non-positive rate or holds a
// non-finite sample.
void validate(const Waveform& w);

// Reads RIFF/WAVE PCM 16-bit; multi-channel files are averaged to mono.
Waveform read_wav(const std::string& path);

// Writes mono PCM 16-bit, clipping to [-1, 32767/32768]. The file is written
// to a temporary sibling and renamed into place.
void write_wav(const Waveform& w, const std::string& path);

enum class Task { kDenoise, kDereverb, kSuperres };

std::string to_string(Task task);
Task parse_task(const std::string& name);

struct ManifestEntry {
  std::string clean_path;
  std::string degraded_path;
  Task task = Task::kDenoise;
  std::map<std::string, std::string> meta;

  bool operator==(const ManifestEntry&) const = default;
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestOptions {
  // Relative paths are resolved against the manifest's directory.
  bool resolve_relative = true;
  // Entries whose files are missing: throw when strict, skip otherwise.
  bool check_paths = false;
  bool strict = true;
};

std::vector<ManifestEntry> load_manifest(const std::string& path,
                                         const ManifestOptions& opts = {});

std::string manifest_line(const ManifestEntry& entry);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path);

}  // namespace cmgan

#endif  // CMGAN_AUDIO_IO_HPP_
