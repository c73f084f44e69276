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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kis/service.hpp"

namespace kis {

/// One timed step of a scripted agent. `op` names an HTTP operation:
/// query, results, positive, feedback, submit; plus submit_top, which submits
/// the shot at `body.rank` (1-based) of the current results, and wait.
struct AgentOp {
  double at = 0.0;  // seconds from task start
  std::string op;
  nlohmann::json body;
};

using AgentScript = std::vector<AgentOp>;

/// Scripts per task id, with an optional fallback for tasks not listed.
struct AgentFile {
  std::map<std::string, AgentScript> scripts;
  std::optional<AgentScript> fallback;

  const AgentScript* script_for(const std::string& task_id) const;
};

/// Accepts either a JSON array (one script for every task) or an object
/// {"scripts": {task_id: [...]}, "default": [...]}. Throws InvalidQuery on
/// unknown operations or times that run backwards.
AgentFile parse_agent(const nlohmann::json& doc);
AgentFile load_agent(const std::filesystem::path& path);

struct TaskReport {
  std::string task_id;
  bool solved = false;
  double score = 0.0;
  double time_s = 0.0;  // time of the correct submission, or the budget
  std::size_t wrong_submissions = 0;
  std::vector<std::string> errors;  // rejected operations
  std::vector<LogEvent> log;
};

struct HarnessReport {
  std::vector<TaskReport> tasks;
  std::size_t solved = 0;
  double mean_score = 0.0;
};

/// Runs every task on a fresh session under a simulated clock.
HarnessReport run_harness(std::shared_ptr<const Engine> engine, const std::vector<KisTask>& tasks,
                          const AgentFile& agent);

nlohmann::json to_json(const HarnessReport& report);

/// A task whose target window (segment_s long, inside the video) overlaps
/// the given shot. Used to plant known answers in generated corpora.
KisTask task_around_shot(const Corpus& corpus, const std::string& shot_id, std::string task_id,
                         double segment_s = 20.0, double budget_s = 300.0);

}  // namespace kis
