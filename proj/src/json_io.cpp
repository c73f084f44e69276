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

#include "kis/json_io.hpp"

#include <fstream>

#include "kis/error.hpp"

namespace kis {

namespace {

const json* member(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (const json* v = member(j, key)) out = v->get<T>();
}

}  // namespace

std::string_view to_string(LogKind kind) {
  switch (kind) {
    case LogKind::query:
      return "query";
    case LogKind::feedback:
      return "feedback";
    case LogKind::filter_change:
      return "filter_change";
    case LogKind::browse:
      return "browse";
    case LogKind::submit:
      return "submit";
  }
  return "";
}

std::string_view to_string(TaskKind kind) { return kind == TaskKind::visual ? "visual" : "textual"; }
std::string_view to_string(SketchLevel level) { return level == SketchLevel::frame ? "frame" : "shot"; }

void to_json(json& j, const LabColor& c) { j = {{"L", c.L}, {"a", c.a}, {"b", c.b}}; }
void from_json(const json& j, LabColor& c) {
  c.L = j.at("L").get<double>();
  c.a = j.at("a").get<double>();
  c.b = j.at("b").get<double>();
}

void to_json(json& j, const SketchPoint& p) { j = {{"x", p.x}, {"y", p.y}, {"color", p.color}}; }
void from_json(const json& j, SketchPoint& p) {
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.color = j.at("color").get<LabColor>();
}

void to_json(json& j, const SketchQuery& q) { j = {{"level", to_string(q.level)}, {"points", q.points}}; }
void from_json(const json& j, SketchQuery& q) {
  q.points = j.at("points").get<std::vector<SketchPoint>>();
  const std::string level = j.value("level", "frame");
  if (level == "frame") {
    q.level = SketchLevel::frame;
  } else if (level == "shot") {
    q.level = SketchLevel::shot;
  } else {
    throw InvalidQuery("sketch level must be 'frame' or 'shot'");
  }
}

void to_json(json& j, const TextQuery& q) {
  j = {{"text", q.text},
       {"field_weights", {{"description", q.field_weights[0]}, {"speech", q.field_weights[1]}, {"ocr", q.field_weights[2]}}}};
}
void from_json(const json& j, TextQuery& q) {
  q = TextQuery{};
  if (j.is_string()) {
    q.text = j.get<std::string>();
    return;
  }
  q.text = j.at("text").get<std::string>();
  if (const json* w = member(j, "field_weights")) {
    for (const auto& [key, value] : w->items()) {
      if (key == "description") q.field_weights[0] = value.get<double>();
      else if (key == "speech") q.field_weights[1] = value.get<double>();
      else if (key == "ocr") q.field_weights[2] = value.get<double>();
      else throw InvalidQuery("unknown text field '" + key + "'");
    }
  }
}

void to_json(json& j, const FilterFlags& f) {
  j = {{"drop_black_and_white", f.drop_black_and_white}, {"drop_black_bordered", f.drop_black_bordered}};
}
void from_json(const json& j, FilterFlags& f) {
  f = FilterFlags{};
  read_opt(j, "drop_black_and_white", f.drop_black_and_white);
  read_opt(j, "drop_black_bordered", f.drop_black_bordered);
}

void to_json(json& j, const CompositeQuery& q) {
  j = json::object();
  if (q.sketch) j["sketch"] = *q.sketch;
  if (q.text) j["text"] = *q.text;
  if (q.concept_query) j["concept"] = *q.concept_query;
  j["modality_weights"] = {{"sketch", q.weights.sketch}, {"text", q.weights.text}, {"concept", q.weights.concepts}};
  j["filters"] = q.flags;
  j["limit"] = q.limit;
}

void from_json(const json& j, CompositeQuery& q) {
  q = CompositeQuery{};
  if (!j.is_object()) throw InvalidQuery("query must be a JSON object");
  if (const json* s = member(j, "sketch")) q.sketch = s->get<SketchQuery>();
  if (const json* t = member(j, "text")) q.text = t->get<TextQuery>();
  if (const json* c = member(j, "concept")) q.concept_query = c->get<std::string>();
  if (const json* w = member(j, "modality_weights")) {
    read_opt(*w, "sketch", q.weights.sketch);
    read_opt(*w, "text", q.weights.text);
    read_opt(*w, "concept", q.weights.concepts);
  }
  if (const json* f = member(j, "filters")) q.flags = f->get<FilterFlags>();
  if (const json* l = member(j, "limit")) {
    const auto v = l->get<long long>();
    if (v < 1) throw InvalidQuery("limit must be >= 1");
    q.limit = static_cast<std::size_t>(v);
  }
}

CompositeQuery parse_composite_query(const json& j) {
  try {
    return j.get<CompositeQuery>();
  } catch (const json::exception& e) {
    throw InvalidQuery(std::string("malformed query: ") + e.what());
  }
}

void to_json(json& j, const RankedEntry& e) { j = {{"shot_id", e.shot_id}, {"score", e.score}}; }

void to_json(json& j, const RankedList& l) { j = {{"provenance", l.provenance}, {"results", l.entries}}; }
void from_json(const json& j, RankedList& l) {
  l = RankedList{};
  l.provenance = j.value("provenance", "");
  for (const auto& e : j.at("results")) l.entries.push_back({e.at("shot_id").get<std::string>(), e.at("score").get<double>()});
}

void to_json(json& j, const VideoGroup& g) {
  j = {{"video_id", g.video_id}, {"best_score", g.best_score}, {"shots", g.shots}};
}

void to_json(json& j, const KisTask& t) {
  j = {{"id", t.id},
       {"video_id", t.video_id},
       {"target_start_s", t.target_start_s},
       {"target_end_s", t.target_end_s},
       {"budget_s", t.budget_s},
       {"kind", to_string(t.kind)},
       {"prompt", t.prompt}};
}
void from_json(const json& j, KisTask& t) {
  t = KisTask{};
  t.id = j.at("id").get<std::string>();
  t.video_id = j.at("video_id").get<std::string>();
  t.target_start_s = j.at("target_start_s").get<double>();
  t.target_end_s = j.at("target_end_s").get<double>();
  read_opt(j, "budget_s", t.budget_s);
  const std::string kind = j.value("kind", "visual");
  if (kind == "visual") t.kind = TaskKind::visual;
  else if (kind == "textual") t.kind = TaskKind::textual;
  else throw InvalidQuery("task kind must be 'visual' or 'textual'");
  read_opt(j, "prompt", t.prompt);
}

void to_json(json& j, const LogEvent& e) {
  j = {{"at", e.at}, {"kind", to_string(e.kind)}, {"payload", e.payload}, {"outcome", e.outcome}};
}
void from_json(const json& j, LogEvent& e) {
  e.at = j.at("at").get<double>();
  const std::string kind = j.at("kind").get<std::string>();
  static const std::pair<const char*, LogKind> kinds[] = {{"query", LogKind::query},
                                                          {"feedback", LogKind::feedback},
                                                          {"filter_change", LogKind::filter_change},
                                                          {"browse", LogKind::browse},
                                                          {"submit", LogKind::submit}};
  bool found = false;
  for (const auto& [name, k] : kinds) {
    if (kind == name) {
      e.kind = k;
      found = true;
    }
  }
  if (!found) throw InvalidQuery("unknown log event kind '" + kind + "'");
  e.payload = j.value("payload", json());
  e.outcome = j.value("outcome", json());
}

void to_json(json& j, const ColorRecommendation& r) {
  j = {{"palette_index", r.palette_index}, {"rgb", {r.rgb.r, r.rgb.g, r.rgb.b}}, {"lab", r.lab}, {"frequency", r.frequency}};
}

void to_json(json& j, const ColorSignature& s) {
  j = {{"shot_id", s.shot_id}, {"centroids", json::array()}};
  for (const auto& c : s.centroids) {
    j["centroids"].push_back({{"x", c.x}, {"y", c.y}, {"color", c.color}, {"weight", c.weight}});
  }
}

void to_json(json& j, const EngineConfig& c) {
  j = {{"sketch",
        {{"alpha", c.sketch_alpha},
         {"k", c.color.signature.k},
         {"sample_count", c.color.signature.sample_count},
         {"seed", c.color.signature.seed},
         {"max_iterations", c.color.signature.max_iterations},
         {"restarts", c.color.signature.restarts},
         {"grid", c.color.grid},
         {"palette_levels", c.color.palette_levels},
         {"recommend", c.color.recommendation_enabled},
         {"recommend_size", c.recommend_size}}},
       {"text", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
       {"fusion", {{"rrf_k", c.rrf_k}}},
       {"feedback", {{"lambda", c.feedback_lambda}}},
       {"filters",
        {{"chroma_threshold", c.filters.chroma_threshold},
         {"bw_fraction", c.filters.bw_fraction},
         {"luma_threshold", c.filters.luma_threshold},
         {"border_fraction", c.filters.border_fraction},
         {"border_min", c.filters.border_min}}},
       {"task", {{"budget_s", c.task_budget_s}, {"segment_s", c.task_segment_s}}},
       {"scoring",
        {{"max_score", c.scoring.max_score},
         {"time_penalty", c.scoring.time_penalty},
         {"wrong_penalty", c.scoring.wrong_penalty}}},
       {"limit", c.default_limit}};
}

void from_json(const json& j, EngineConfig& c) {
  c = EngineConfig{};
  if (const json* s = member(j, "sketch")) {
    read_opt(*s, "alpha", c.sketch_alpha);
    read_opt(*s, "k", c.color.signature.k);
    read_opt(*s, "sample_count", c.color.signature.sample_count);
    read_opt(*s, "seed", c.color.signature.seed);
    read_opt(*s, "max_iterations", c.color.signature.max_iterations);
    read_opt(*s, "restarts", c.color.signature.restarts);
    read_opt(*s, "grid", c.color.grid);
    read_opt(*s, "palette_levels", c.color.palette_levels);
    read_opt(*s, "recommend", c.color.recommendation_enabled);
    read_opt(*s, "recommend_size", c.recommend_size);
  }
  if (const json* t = member(j, "text")) {
    read_opt(*t, "k1", c.bm25.k1);
    read_opt(*t, "b", c.bm25.b);
  }
  if (const json* f = member(j, "fusion")) read_opt(*f, "rrf_k", c.rrf_k);
  if (const json* f = member(j, "feedback")) read_opt(*f, "lambda", c.feedback_lambda);
  if (const json* f = member(j, "filters")) {
    read_opt(*f, "chroma_threshold", c.filters.chroma_threshold);
    read_opt(*f, "bw_fraction", c.filters.bw_fraction);
    read_opt(*f, "luma_threshold", c.filters.luma_threshold);
    read_opt(*f, "border_fraction", c.filters.border_fraction);
    read_opt(*f, "border_min", c.filters.border_min);
  }
  if (const json* t = member(j, "task")) {
    read_opt(*t, "budget_s", c.task_budget_s);
    read_opt(*t, "segment_s", c.task_segment_s);
  }
  if (const json* s = member(j, "scoring")) {
    read_opt(*s, "max_score", c.scoring.max_score);
    read_opt(*s, "time_penalty", c.scoring.time_penalty);
    read_opt(*s, "wrong_penalty", c.scoring.wrong_penalty);
  }
  read_opt(j, "limit", c.default_limit);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<KisTask> load_tasks(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  if (!doc.is_array()) throw Error(path.string() + ": task file must be a JSON array");
  std::vector<KisTask> tasks;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      tasks.push_back(doc[i].get<KisTask>());
    } catch (const json::exception& e) {
      throw Error(path.string() + ": task " + std::to_string(i) + ": " + e.what());
    }
  }
  return tasks;
}

EngineConfig load_config(const std::filesystem::path& path) {
  try {
    return read_json_file(path).get<EngineConfig>();
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace kis
