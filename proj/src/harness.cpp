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

#include "kis/harness.hpp"

#include <algorithm>
#include <set>

#include "kis/error.hpp"
#include "kis/json_io.hpp"

namespace kis {

namespace {

const std::set<std::string>& known_ops() {
  static const std::set<std::string> ops = {"query", "results", "positive", "feedback", "submit", "submit_top", "wait"};
  return ops;
}

AgentScript parse_script(const json& doc, const std::string& where) {
  if (!doc.is_array()) throw InvalidQuery(where + ": script must be an array");
  AgentScript script;
  double last = 0.0;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string locus = where + "[" + std::to_string(i) + "]";
    const json& step = doc[i];
    if (!step.is_object() || !step.contains("op")) throw InvalidQuery(locus + ": missing op");
    AgentOp op;
    op.op = step.at("op").get<std::string>();
    if (!known_ops().contains(op.op)) throw InvalidQuery(locus + ": unknown operation '" + op.op + "'");
    op.at = step.value("at", last);
    if (op.at < last || op.at < 0.0) throw InvalidQuery(locus + ": operation times must be nondecreasing and >= 0");
    last = op.at;
    op.body = step.value("body", json::object());
    script.push_back(std::move(op));
  }
  return script;
}

}  // namespace

const AgentScript* AgentFile::script_for(const std::string& task_id) const {
  if (auto it = scripts.find(task_id); it != scripts.end()) return &it->second;
  return fallback ? &*fallback : nullptr;
}

AgentFile parse_agent(const json& doc) {
  AgentFile agent;
  if (doc.is_array()) {
    agent.fallback = parse_script(doc, "agent");
    return agent;
  }
  if (!doc.is_object()) throw InvalidQuery("agent file must be an array or an object");
  if (doc.contains("scripts")) {
    for (const auto& [task_id, script] : doc.at("scripts").items()) {
      agent.scripts.emplace(task_id, parse_script(script, "scripts." + task_id));
    }
  }
  if (doc.contains("default")) agent.fallback = parse_script(doc.at("default"), "default");
  return agent;
}

AgentFile load_agent(const std::filesystem::path& path) { return parse_agent(read_json_file(path)); }

HarnessReport run_harness(std::shared_ptr<const Engine> engine, const std::vector<KisTask>& tasks,
                          const AgentFile& agent) {
  auto clock = std::make_shared<SimulatedClock>(0.0);
  KisService service(engine, clock, tasks);
  HarnessReport report;
  double base = 0.0;

  for (const auto& task : tasks) {
    clock->set(base);
    const std::string sid = service.create_session(task.id);
    TaskReport tr;
    tr.task_id = task.id;
    if (const AgentScript* script = agent.script_for(task.id)) {
      for (const auto& op : *script) {
        clock->set(base + op.at);
        try {
          if (op.op == "query") {
            service.execute_query(sid, op.body);
          } else if (op.op == "results") {
            service.results(sid, op.body.value("view", "flat") == "grouped" ? ResultView::grouped : ResultView::flat);
          } else if (op.op == "positive") {
            service.mark_positive(sid, op.body.at("shot_id").get<std::string>());
          } else if (op.op == "feedback") {
            std::optional<double> lambda;
            if (op.body.contains("lambda")) lambda = op.body.at("lambda").get<double>();
            service.run_feedback(sid, lambda);
          } else if (op.op == "submit") {
            service.submit(sid, op.body.at("shot_id").get<std::string>());
          } else if (op.op == "submit_top") {
            const auto rank = op.body.value("rank", 1);
            const Session s = service.snapshot(sid);
            if (rank < 1 || static_cast<std::size_t>(rank) > s.last_results.size()) {
              throw InvalidQuery("submit_top: no result at rank " + std::to_string(rank));
            }
            service.submit(sid, s.last_results.entries[rank - 1].shot_id);
          }
        } catch (const Error& e) {
          tr.errors.push_back(std::to_string(op.at) + " " + op.op + ": " + e.what());
        } catch (const json::exception& e) {
          tr.errors.push_back(std::to_string(op.at) + " " + op.op + ": malformed body: " + e.what());
        }
        if (service.snapshot(sid).solved) break;
      }
    }
    const Session s = service.snapshot(sid);
    tr.solved = s.solved;
    tr.score = score_session(s, task, engine->config().scoring);
    tr.time_s = task.budget_s;
    for (const auto& sub : s.submissions) {
      if (sub.correct) {
        tr.time_s = sub.at;
        break;
      }
      ++tr.wrong_submissions;
    }
    tr.log = s.log;
    report.solved += tr.solved ? 1 : 0;
    report.mean_score += tr.score;
    report.tasks.push_back(std::move(tr));
    // Sessions never share simulated time.
    base += task.budget_s + 1.0;
  }
  if (!report.tasks.empty()) report.mean_score /= static_cast<double>(report.tasks.size());
  return report;
}

json to_json(const HarnessReport& report) {
  json tasks = json::array();
  for (const auto& t : report.tasks) {
    tasks.push_back({{"task_id", t.task_id},
                     {"solved", t.solved},
                     {"score", t.score},
                     {"time_s", t.time_s},
                     {"wrong_submissions", t.wrong_submissions},
                     {"errors", t.errors},
                     {"log", t.log}});
  }
  return {{"tasks", tasks},
          {"aggregate",
           {{"tasks", report.tasks.size()}, {"solved", report.solved}, {"mean_score", report.mean_score}}}};
}

KisTask task_around_shot(const Corpus& corpus, const std::string& shot_id, std::string task_id, double segment_s,
                         double budget_s) {
  const Shot* shot = corpus.find_shot(shot_id);
  if (shot == nullptr) throw InvalidQuery("unknown shot '" + shot_id + "'");
  const Video* video = corpus.find_video(shot->video_id);
  if (video->duration_s < segment_s) throw InvalidQuery("video '" + video->id + "' is shorter than the segment");
  KisTask task;
  task.id = std::move(task_id);
  task.video_id = video->id;
  task.target_start_s = std::clamp(shot->start_s, 0.0, video->duration_s - segment_s);
  task.target_end_s = std::min(task.target_start_s + segment_s, video->duration_s);
  task.budget_s = budget_s;
  task.kind = TaskKind::visual;
  task.prompt = "Find the target segment shown in reference clip " + task.id + ".";
  return task;
}

}  // namespace kis
