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

#include <algorithm>
#include <string>
#include <unordered_map>

#include "kis/corpus.hpp"
#include "kis/ranked_list.hpp"

namespace kis {

struct FilterFlags {
  bool drop_black_and_white = false;
  bool drop_black_bordered = false;

  friend bool operator==(const FilterFlags&, const FilterFlags&) = default;
};

struct BorderWidths {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;

  int max() const { return std::max(std::max(top, bottom), std::max(left, right)); }
  friend bool operator==(const BorderWidths&, const BorderWidths&) = default;
};

struct FilterVerdict {
  std::string shot_id;
  bool is_bw = false;
  BorderWidths border;

  friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

struct FilterThresholds {
  int chroma_threshold = 12;     // max(R,G,B) - min(R,G,B) at or below counts as gray
  double bw_fraction = 0.98;     // share of gray pixels for a black-and-white verdict
  int luma_threshold = 24;       // luma at or below counts as black
  double border_fraction = 0.95; // share of black pixels for a row/column to be bar
  int border_min = 4;            // border width at which a shot counts as bordered
};

bool is_black_and_white(const Keyframe& kf, int chroma_threshold = 12, double pixel_fraction = 0.98);

/// Widths of the black bars on each side, each capped at half the dimension.
BorderWidths detect_black_border(const Keyframe& kf, int luma_threshold = 24, double row_fraction = 0.95);

FilterVerdict compute_verdict(const std::string& shot_id, const Keyframe& kf, const FilterThresholds& t = {});

using VerdictMap = std::unordered_map<std::string, FilterVerdict>;

/// Verdicts for every shot in the corpus.
VerdictMap compute_verdicts(const Corpus& corpus, const FilterThresholds& t = {});

/// Drops flagged shots, keeping survivors' order and scores. Throws
/// InvalidQuery if a listed shot has no verdict.
RankedList apply_filters(const RankedList& list, const FilterFlags& flags, const VerdictMap& verdicts,
                         int border_min = 4);

}  // namespace kis
