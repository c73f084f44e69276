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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kis {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Decoded keyframe: row-major RGB, 8 bits per channel.
struct Keyframe {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Keyframe() = default;
  Keyframe(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const noexcept { return pixels.size(); }

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

/// Decodes a binary PPM (P6, maxval 255). Throws DecodeError.
Keyframe decode_keyframe(std::span<const std::uint8_t> bytes);
/// Canonical P6 encoding: "P6\n<w> <h>\n255\n" followed by the payload.
std::vector<std::uint8_t> encode_keyframe(const Keyframe& kf);

Keyframe read_keyframe_file(const std::filesystem::path& path);
void write_keyframe_file(const std::filesystem::path& path, const Keyframe& kf);

struct Video {
  std::string id;
  double duration_s = 0.0;
  std::vector<std::string> shot_ids;  // ordered by start time
  std::string title;
};

struct Shot {
  std::string id;
  std::string video_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string keyframe_ref;
  std::string description;
  std::string speech;
  std::string ocr;
};

enum class BankKind { concepts, objects };

std::string_view to_string(BankKind kind);
std::optional<BankKind> bank_kind_from_string(std::string_view s);

/// Dense shot-by-label score matrix, row-major, rows in corpus shot order.
struct ScoreBank {
  BankKind kind = BankKind::concepts;
  std::vector<std::string> labels;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

/// Mutable, unchecked corpus contents. This is what loaders and generators
/// produce; a Corpus is only ever constructed from data that validates.
struct CorpusData {
  std::vector<Video> videos;
  std::vector<Shot> shots;  // manifest order
  std::vector<ScoreBank> banks;
  /// Keyframes held in memory, keyed by shot id. Shots without an entry here
  /// load their keyframe from `base_dir / keyframe_ref`.
  std::unordered_map<std::string, Keyframe> inline_keyframes;
  std::filesystem::path base_dir;
};

struct Violation {
  std::string entity;  // id of the offending video/shot/bank
  std::string rule;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every type invariant. Empty result iff the data is a valid corpus.
std::vector<Violation> validate_corpus(const CorpusData& data);

class Corpus {
 public:
  /// Validates and freezes `data`. Throws LoadError naming the first violation.
  static Corpus from_data(CorpusData data);

  std::span<const Video> videos() const noexcept { return data_->videos; }
  std::span<const Shot> shots() const noexcept { return data_->shots; }
  std::size_t shot_count() const noexcept { return data_->shots.size(); }

  const Shot& shot(std::size_t index) const { return data_->shots[index]; }
  std::optional<std::size_t> shot_index(std::string_view id) const;
  const Shot* find_shot(std::string_view id) const;
  const Video* find_video(std::string_view id) const;

  /// Position of a shot within its video's time-ordered shot list.
  std::size_t position_in_video(std::size_t shot_index) const { return position_in_video_[shot_index]; }

  const ScoreBank* bank(BankKind kind) const;
  std::span<const ScoreBank> banks() const noexcept { return data_->banks; }

  /// Loads (or returns the in-memory copy of) a shot's master keyframe.
  Keyframe keyframe(std::size_t shot_index) const;
  /// Raw P6 bytes for a shot's keyframe.
  std::vector<std::uint8_t> keyframe_bytes(std::size_t shot_index) const;

  const CorpusData& data() const noexcept { return *data_; }
  std::int64_t built_at() const noexcept { return built_at_; }

 private:
  std::shared_ptr<const CorpusData> data_;
  std::unordered_map<std::string, std::size_t> shot_lookup_;
  std::unordered_map<std::string, std::size_t> video_lookup_;
  std::vector<std::size_t> position_in_video_;
  std::int64_t built_at_ = 0;
};

/// Loads a JSON manifest with its label/matrix sidecars. All-or-nothing;
/// throws LoadError with the record locus on any failure.
Corpus load_manifest(const std::filesystem::path& path);

/// Parses a manifest into unchecked data without validating it.
CorpusData read_manifest(const std::filesystem::path& path);

/// Writes `data` as manifest.json plus sidecar files and PPM keyframes into
/// `dir`. Inline keyframes are written to keyframes/<shot>.ppm.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const CorpusData& data);

void write_matrix_file(const std::filesystem::path& path, const ScoreBank& bank);
/// Returns (rows, cols, values).
ScoreBank read_matrix_file(const std::filesystem::path& path);

/// Stable content hash over everything a Corpus holds (ids, times, text,
/// bank values, keyframe references).
std::uint64_t corpus_fingerprint(const Corpus& corpus);

}  // namespace kis
