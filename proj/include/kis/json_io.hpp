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

// JSON wire formats for the HTTP API, agent scripts, task files, logs, and
// the engine config file.

#include <filesystem>

#include <json.hpp>

#include "kis/color_sketch.hpp"
#include "kis/config.hpp"
#include "kis/engine.hpp"
#include "kis/service.hpp"

namespace kis {

using nlohmann::json;

void to_json(json& j, const LabColor& c);
void from_json(const json& j, LabColor& c);
void to_json(json& j, const SketchPoint& p);
void from_json(const json& j, SketchPoint& p);
void to_json(json& j, const SketchQuery& q);
void from_json(const json& j, SketchQuery& q);
void to_json(json& j, const TextQuery& q);
void from_json(const json& j, TextQuery& q);
void to_json(json& j, const FilterFlags& f);
void from_json(const json& j, FilterFlags& f);
void to_json(json& j, const CompositeQuery& q);
void from_json(const json& j, CompositeQuery& q);
void to_json(json& j, const RankedEntry& e);
void to_json(json& j, const RankedList& l);
void from_json(const json& j, RankedList& l);
void to_json(json& j, const VideoGroup& g);
void to_json(json& j, const KisTask& t);
void from_json(const json& j, KisTask& t);
void to_json(json& j, const LogEvent& e);
void from_json(const json& j, LogEvent& e);
void to_json(json& j, const ColorRecommendation& r);
void to_json(json& j, const ColorSignature& s);
void to_json(json& j, const EngineConfig& c);
void from_json(const json& j, EngineConfig& c);

std::string_view to_string(LogKind kind);
std::string_view to_string(TaskKind kind);
std::string_view to_string(SketchLevel level);

/// from_json wrapper that reports malformed requests as InvalidQuery.
CompositeQuery parse_composite_query(const json& j);

/// Task file: a JSON array of task records.
std::vector<KisTask> load_tasks(const std::filesystem::path& path);
EngineConfig load_config(const std::filesystem::path& path);

/// Reads a whole file as JSON; throws Error naming the path on failure.
json read_json_file(const std::filesystem::path& path);

}  // namespace kis
