/*
 * Copyright 2026 The KIS Engine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "kis/corpus.hpp"

namespace kis::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("kis_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Keyframe uniform(int w, int h, Rgb c) { return Keyframe(w, h, c); }

inline Keyframe random_keyframe(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> c(0, 255);
  Keyframe kf(w, h);
  for (auto& p : kf.pixels) {
    p = {static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng))};
  }
  return kf;
}

// One video holding the given shots back to back, 10 s each, with inline
// keyframes. Text fields are filled by the caller.
inline CorpusData one_video(const std::vector<Keyframe>& frames, const std::string& video = "v0") {
  CorpusData data;
  Video v;
  v.id = video;
  v.duration_s = 10.0 * static_cast<double>(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Shot s;
    s.id = video + "_s" + std::to_string(i);
    s.video_id = video;
    s.start_s = 10.0 * static_cast<double>(i);
    s.end_s = s.start_s + 10.0;
    s.keyframe_ref = "keyframes/" + s.id + ".ppm";
    v.shot_ids.push_back(s.id);
    data.inline_keyframes.emplace(s.id, frames[i]);
    data.shots.push_back(std::move(s));
  }
  data.videos.push_back(std::move(v));
  return data;
}

inline ScoreBank make_bank(BankKind kind, std::vector<std::string> labels, std::size_t rows, std::vector<float> values) {
  ScoreBank b;
  b.kind = kind;
  b.cols = labels.size();
  b.labels = std::move(labels);
  b.rows = rows;
  b.values = std::move(values);
  return b;
}

}  // namespace kis::testing
