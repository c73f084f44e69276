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
#include <span>
#include <string>
#include <vector>

#include "kis/color.hpp"
#include "kis/corpus.hpp"
#include "kis/ranked_list.hpp"

namespace kis {

inline constexpr int kMaxCentroids = 16;
inline constexpr int kMaxSketchPoints = 16;

struct SignatureCentroid {
  double x = 0.0;  // normalized [0,1]
  double y = 0.0;
  LabColor color;
  double weight = 0.0;  // fraction of sampled pixels

  friend bool operator==(const SignatureCentroid&, const SignatureCentroid&) = default;
};

struct ColorSignature {
  std::string shot_id;
  std::vector<SignatureCentroid> centroids;

  friend bool operator==(const ColorSignature&, const ColorSignature&) = default;
};

struct SketchPoint {
  double x = 0.0;
  double y = 0.0;
  LabColor color;

  friend bool operator==(const SketchPoint&, const SketchPoint&) = default;
};

enum class SketchLevel { frame, shot };

struct SketchQuery {
  std::vector<SketchPoint> points;
  SketchLevel level = SketchLevel::frame;

  friend bool operator==(const SketchQuery&, const SketchQuery&) = default;
};

/// Throws InvalidQuery unless 1 <= |points| <= 16 and coordinates lie in [0,1].
void validate(const SketchQuery& query);

/// Sketch formed from every centroid of a signature (self-retrieval probe).
SketchQuery sketch_from_signature(const ColorSignature& sig, SketchLevel level = SketchLevel::frame);

struct SignatureOptions {
  int k = 8;
  int sample_count = 2048;
  std::uint64_t seed = 0x6b69735f736967ULL;
  int max_iterations = 50;
  int restarts = 3;
};

/// k-means in joint (x, y, L/100, a/256, b/256) space over a seeded uniform
/// pixel sample. Empty and coincident clusters are dropped, so degenerate
/// images yield fewer than k centroids.
ColorSignature extract_signature(const Keyframe& kf, const SignatureOptions& options);
ColorSignature extract_signature(const Keyframe& kf, int k);

/// Sum over sketch points of the cheapest centroid match, where a match costs
/// alpha * (2-D position distance) + deltaE76 / 100. Lower is better.
double score_sketch(const SketchQuery& query, const ColorSignature& sig, double alpha = 2.0);

struct PaletteEntry {
  Rgb rgb;
  LabColor lab;
};

/// Fixed palette of levels^3 sRGB colors evenly spaced per channel, matched
/// in Lab. The default 4 levels gives 64 bins.
class Palette {
 public:
  explicit Palette(int levels_per_channel = 4);

  std::size_t size() const noexcept { return entries_.size(); }
  const PaletteEntry& operator[](std::size_t i) const { return entries_[i]; }
  int levels() const noexcept { return levels_; }
  /// Index of the entry closest in deltaE76; lowest index on ties.
  std::size_t nearest(const LabColor& c) const;

 private:
  int levels_;
  std::vector<PaletteEntry> entries_;
};

struct ColorIndexOptions {
  SignatureOptions signature;
  int grid = 8;
  int palette_levels = 4;
  bool recommendation_enabled = true;
};

/// Per-shot signatures (in corpus shot order) plus a grid x grid array of
/// palette histograms counting centroid occurrences in each canvas cell.
class ColorIndex {
 public:
  static ColorIndex from_signatures(std::vector<ColorSignature> signatures, int grid, int palette_levels,
                                    bool recommendation_enabled);

  std::span<const ColorSignature> signatures() const noexcept { return signatures_; }
  const ColorSignature& signature(std::size_t shot_index) const { return signatures_[shot_index]; }
  std::size_t size() const noexcept { return signatures_.size(); }

  int grid() const noexcept { return grid_; }
  const Palette& palette() const noexcept { return palette_; }
  bool recommendation_enabled() const noexcept { return recommendation_enabled_; }

  std::size_t cell_of(double x, double y) const;
  std::span<const std::uint32_t> cell_histogram(std::size_t cell) const {
    return {histograms_.data() + cell * palette_.size(), palette_.size()};
  }
  std::uint64_t cell_total(std::size_t cell) const { return cell_totals_[cell]; }
  /// Palette bin assigned to each centroid, parallel to signatures().
  std::span<const std::uint16_t> centroid_bins(std::size_t shot_index) const;

  friend bool operator==(const ColorIndex& a, const ColorIndex& b) {
    return a.grid_ == b.grid_ && a.palette_.levels() == b.palette_.levels() &&
           a.recommendation_enabled_ == b.recommendation_enabled_ && a.signatures_ == b.signatures_ &&
           a.histograms_ == b.histograms_;
  }

 private:
  explicit ColorIndex(int palette_levels) : palette_(palette_levels) {}

  std::vector<ColorSignature> signatures_;
  int grid_ = 8;
  Palette palette_;
  bool recommendation_enabled_ = true;
  std::vector<std::uint32_t> histograms_;
  std::vector<std::uint64_t> cell_totals_;
  std::vector<std::uint16_t> bins_;
  std::vector<std::size_t> bin_offsets_;
};

/// Extracts one signature per shot. Throws LoadError naming the shot whose
/// keyframe cannot be decoded. Results do not depend on thread scheduling.
ColorIndex build_color_index(const Corpus& corpus, const ColorIndexOptions& options = {});

/// Relevance = 1 / (1 + dissimilarity), descending, ties by shot id. At shot
/// level each shot takes the best dissimilarity among itself and its previous
/// and next shot in the same video.
RankedList rank_by_sketch(const SketchQuery& query, const ColorIndex& index, const Corpus& corpus,
                          double alpha = 2.0);

struct ColorRecommendation {
  std::size_t palette_index = 0;
  Rgb rgb;
  LabColor lab;
  double frequency = 0.0;
};

/// Top-n palette colors of the cell containing (x, y), by count, ties by
/// palette index. Empty when recommendations are disabled.
std::vector<ColorRecommendation> recommend_colors(double x, double y, const ColorIndex& index, std::size_t n);

/// Versioned binary cache of a color index, tagged with the corpus fingerprint.
void save_color_index(const std::filesystem::path& path, const ColorIndex& index, std::uint64_t corpus_fp);
/// Throws Error when the file is unreadable, of another version, or was built
/// for a different corpus.
ColorIndex load_color_index(const std::filesystem::path& path, std::uint64_t expected_corpus_fp);

}  // namespace kis
