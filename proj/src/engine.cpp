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

#include "kis/engine.hpp"

#include <unordered_map>

#include "kis/error.hpp"

namespace kis {

Engine::Engine(Corpus corpus, EngineConfig config, ColorIndex color)
    : corpus_(std::move(corpus)), config_(std::move(config)), color_(std::move(color)) {}

std::shared_ptr<const Engine> Engine::build(Corpus corpus, EngineConfig config, std::optional<ColorIndex> color_index) {
  ColorIndex color = color_index ? std::move(*color_index) : build_color_index(corpus, config.color);
  if (color.size() != corpus.shot_count()) throw InvalidQuery("color index does not match corpus");
  std::shared_ptr<Engine> engine(new Engine(std::move(corpus), std::move(config), std::move(color)));
  engine->text_ = build_text_index(engine->corpus_);
  engine->verdicts_ = compute_verdicts(engine->corpus_, engine->config_.filters);
  engine->features_ = std::make_unique<FeedbackFeatures>(engine->corpus_, engine->color_);
  return engine;
}

RankedList execute_composite(const Engine& engine, const CompositeQuery& query) {
  if (!query.sketch && !query.text && !query.concept_query) throw InvalidQuery("query has no modality");
  if (query.limit < 1) throw InvalidQuery("limit must be >= 1");

  std::vector<RankedList> lists;
  std::vector<double> weights;
  const auto& cfg = engine.config();

  if (query.sketch) {
    try {
      lists.push_back(rank_by_sketch(*query.sketch, engine.color_index(), engine.corpus(), cfg.sketch_alpha));
    } catch (const Error& e) {
      throw ModalityError("sketch", e.what());
    }
    weights.push_back(query.weights.sketch);
  }
  if (query.text) {
    try {
      lists.push_back(search_text(*query.text, engine.text_index(), cfg.bm25));
    } catch (const Error& e) {
      throw ModalityError("text", e.what());
    }
    weights.push_back(query.weights.text);
  }
  if (query.concept_query) {
    try {
      lists.push_back(rank_by_expr(parse_concept_query(*query.concept_query), engine.corpus()));
    } catch (const ParseError& e) {
      throw ModalityError("concept", e.what(), e.offset());
    } catch (const UnresolvedLabelError& e) {
      throw ModalityError("concept", e.what(), std::nullopt, e.suggestions());
    } catch (const Error& e) {
      throw ModalityError("concept", e.what());
    }
    weights.push_back(query.weights.concepts);
  }

  std::vector<FusionInput> inputs;
  for (std::size_t i = 0; i < lists.size(); ++i) inputs.push_back({lists[i], weights[i]});
  RankedList fused;
  try {
    fused = fuse(inputs, cfg.rrf_k);
  } catch (const Error& e) {
    throw ModalityError("fusion", e.what());
  }
  RankedList out = apply_filters(fused, query.flags, engine.verdicts(), cfg.filters.border_min);
  if (out.entries.size() > query.limit) out.entries.resize(query.limit);
  return out;
}

std::vector<VideoGroup> group_by_video(const RankedList& list, const Corpus& corpus) {
  std::vector<VideoGroup> groups;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& e : list.entries) {
    const Shot* shot = corpus.find_shot(e.shot_id);
    if (shot == nullptr) throw InvalidQuery("result list references unknown shot '" + e.shot_id + "'");
    auto [it, inserted] = slot.emplace(shot->video_id, groups.size());
    if (inserted) groups.push_back({shot->video_id, {}, e.score});
    groups[it->second].shots.push_back(e);
  }
  return groups;
}

}  // namespace kis
