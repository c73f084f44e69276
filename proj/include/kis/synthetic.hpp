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
#include <string>
#include <vector>

#include "kis/corpus.hpp"

namespace kis {

/// Parameters of a generated test corpus. Keyframes are a random background
/// with a few colored rectangles, pairwise distinct across the corpus.
struct SyntheticOptions {
  int videos = 20;
  int shots_per_video = 10;
  int keyframe_width = 32;
  int keyframe_height = 24;
  std::uint64_t seed = 7;
  std::size_t concept_labels = 24;  // 0 for no concept bank
  std::size_t object_labels = 0;    // 0 for no object bank
  double black_and_white_share = 0.0;
  double letterbox_share = 0.0;
  bool text = true;
};

/// Generated corpus with keyframes held in memory. Shots last 8-14 s.
CorpusData make_synthetic_corpus(const SyntheticOptions& options = {});

/// Labels used by the generator: common concept words, numbered past the list.
std::vector<std::string> synthetic_labels(std::size_t count, const std::string& stem);

}  // namespace kis
