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

#include <cstddef>

#include "kis/color_sketch.hpp"
#include "kis/shot_filters.hpp"
#include "kis/text_search.hpp"

namespace kis {

struct ScoringConfig {
  double max_score = 100.0;
  double time_penalty = 50.0;   // deducted in full when solved at the end of the budget
  double wrong_penalty = 10.0;  // per incorrect submission
};

/// Every tunable of the engine. Loaded from a JSON config file; absent keys
/// keep these defaults.
struct EngineConfig {
  double sketch_alpha = 2.0;
  ColorIndexOptions color;
  Bm25Params bm25;
  double rrf_k = 60.0;
  double feedback_lambda = 0.5;
  FilterThresholds filters;
  double task_budget_s = 300.0;
  double task_segment_s = 20.0;
  ScoringConfig scoring;
  std::size_t default_limit = 1000;
  std::size_t recommend_size = 8;
};

}  // namespace kis
