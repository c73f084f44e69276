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

#include "kis/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "kis/error.hpp"
#include "kis/json_io.hpp"

namespace kis {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json digest_outcome(const RankedList& list) { return {{"digest", hex64(result_digest(list))}, {"count", list.size()}}; }

}  // namespace

double WallClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void validate_task(const KisTask& task, const Corpus& corpus, double segment_s) {
  const Video* video = corpus.find_video(task.video_id);
  if (video == nullptr) throw InvalidQuery("task '" + task.id + "': unknown video '" + task.video_id + "'");
  if (!(task.target_start_s >= 0.0 && task.target_start_s < task.target_end_s && task.target_end_s <= video->duration_s)) {
    throw InvalidQuery("task '" + task.id + "': target segment lies outside video '" + task.video_id + "'");
  }
  if (std::abs((task.target_end_s - task.target_start_s) - segment_s) > 1e-9) {
    throw InvalidQuery("task '" + task.id + "': target segment must last " + std::to_string(segment_s) + " s");
  }
  if (!(task.budget_s > 0.0)) throw InvalidQuery("task '" + task.id + "': budget must be positive");
}

bool is_correct_submission(const Shot& shot, const KisTask& task) {
  if (shot.video_id != task.video_id) return false;
  const double overlap = std::min(shot.end_s, task.target_end_s) - std::max(shot.start_s, task.target_start_s);
  return overlap > 0.0;
}

double score_session(const Session& session, const KisTask& task, const ScoringConfig& scoring) {
  auto correct = std::find_if(session.submissions.begin(), session.submissions.end(),
                              [](const Submission& s) { return s.correct; });
  if (correct == session.submissions.end()) return 0.0;
  const auto wrong = std::count_if(session.submissions.begin(), correct, [](const Submission& s) { return !s.correct; });
  const double score = scoring.max_score - scoring.time_penalty * (correct->at / task.budget_s) -
                       scoring.wrong_penalty * static_cast<double>(wrong);
  return std::max(0.0, score);
}

KisService::KisService(std::shared_ptr<const Engine> engine, std::shared_ptr<Clock> clock, std::vector<KisTask> tasks,
                       std::optional<std::filesystem::path> log_dir)
    : engine_(std::move(engine)), clock_(std::move(clock)), log_dir_(std::move(log_dir)) {
  for (auto& t : tasks) {
    validate_task(t, engine_->corpus(), engine_->config().task_segment_s);
    const std::string id = t.id;
    if (!tasks_.emplace(id, std::move(t)).second) throw InvalidQuery("duplicate task id '" + id + "'");
  }
  if (log_dir_) std::filesystem::create_directories(*log_dir_);
}

const KisTask* KisService::find_task(const std::string& task_id) const {
  auto it = tasks_.find(task_id);
  return it == tasks_.end() ? nullptr : &it->second;
}

std::string KisService::create_session(const std::optional<std::string>& task_id) {
  auto state = std::make_shared<State>();
  if (task_id) {
    const KisTask* task = find_task(*task_id);
    if (task == nullptr) throw SessionError(SessionError::Reason::not_found, "unknown task '" + *task_id + "'");
    state->session.task = *task;
  }
  state->session.started_at = clock_->now();
  std::lock_guard lock(sessions_mutex_);
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::string id = "s" + std::to_string(++session_counter_) + "-" + hex64(rng()).substr(0, 8);
  state->session.id = id;
  sessions_.emplace(id, std::move(state));
  return id;
}

std::shared_ptr<KisService::State> KisService::find(const std::string& session_id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw SessionError(SessionError::Reason::not_found, "unknown session '" + session_id + "'");
  return it->second;
}

double KisService::elapsed(const Session& s) const { return clock_->now() - s.started_at; }

void KisService::require_active(Session& s, double at) const {
  if (s.solved) throw SessionError(SessionError::Reason::ended, "task already solved");
  if (s.task && at > s.task->budget_s) throw SessionError(SessionError::Reason::expired, "task budget expired");
}

void KisService::append(Session& s, LogEvent event) const {
  // Log time never runs backwards even if the clock is reset.
  if (!s.log.empty()) event.at = std::max(event.at, s.log.back().at);
  if (log_dir_) {
    std::ofstream out(*log_dir_ / (s.id + ".jsonl"), std::ios::app);
    out << json(event).dump() << '\n';
  }
  s.log.push_back(std::move(event));
}

RankedList KisService::execute_query(const std::string& session_id, const CompositeQuery& query) {
  return execute_query(session_id, json(query));
}

RankedList KisService::execute_query(const std::string& session_id, const json& request) {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  Session& s = state->session;
  const double at = elapsed(s);
  require_active(s, at);
  const CompositeQuery query = parse_composite_query(request);
  if (query.flags != s.flags) {
    append(s, {at, LogKind::filter_change, {{"from", s.flags}, {"to", query.flags}}, json()});
    s.flags = query.flags;
  }
  RankedList result;
  try {
    result = execute_composite(*engine_, query);
  } catch (const Error& e) {
    append(s, {at, LogKind::query, request, {{"error", e.what()}}});
    throw;
  }
  append(s, {at, LogKind::query, request, digest_outcome(result)});
  s.last_results = result;
  return result;
}

json KisService::results(const std::string& session_id, ResultView view) {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  Session& s = state->session;
  const double at = elapsed(s);
  json out;
  if (view == ResultView::grouped) {
    out = {{"view", "grouped"}, {"provenance", s.last_results.provenance},
           {"groups", group_by_video(s.last_results, engine_->corpus())}};
  } else {
    out = {{"view", "flat"}, {"provenance", s.last_results.provenance}, {"results", flat_view(s.last_results).entries}};
  }
  const bool active = !s.solved && !(s.task && at > s.task->budget_s);
  if (active) append(s, {at, LogKind::browse, {{"view", view == ResultView::grouped ? "grouped" : "flat"}}, json()});
  return out;
}

void KisService::mark_positive(const std::string& session_id, const std::string& shot_id) {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  Session& s = state->session;
  const double at = elapsed(s);
  require_active(s, at);
  if (engine_->corpus().find_shot(shot_id) == nullptr) throw InvalidQuery("unknown shot '" + shot_id + "'");
  s.positives.insert(shot_id);
  append(s, {at, LogKind::feedback, {{"op", "positive"}, {"shot_id", shot_id}}, json()});
}

RankedList KisService::run_feedback(const std::string& session_id, std::optional<double> lambda) {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  Session& s = state->session;
  const double at = elapsed(s);
  require_active(s, at);
  if (s.positives.empty()) throw SessionError(SessionError::Reason::precondition, "no positive shots marked");
  if (s.last_results.empty()) throw SessionError(SessionError::Reason::precondition, "no results to re-rank");
  const double l = lambda.value_or(engine_->config().feedback_lambda);
  const std::vector<std::string> positives(s.positives.begin(), s.positives.end());
  RankedList result = feedback_rerank(s.last_results, positives, engine_->corpus(), engine_->feedback_features(), l);
  append(s, {at, LogKind::feedback, {{"op", "rerank"}, {"lambda", l}}, digest_outcome(result)});
  s.last_results = result;
  return result;
}

SubmitResult KisService::submit(const std::string& session_id, const std::string& shot_id) {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  Session& s = state->session;
  const double at = elapsed(s);
  if (!s.task) throw SessionError(SessionError::Reason::precondition, "session has no task");
  if (s.solved) throw SessionError(SessionError::Reason::ended, "task already solved");
  const Shot* shot = engine_->corpus().find_shot(shot_id);
  if (shot == nullptr) throw InvalidQuery("unknown shot '" + shot_id + "'");
  if (at > s.task->budget_s) {
    append(s, {at, LogKind::submit, {{"shot_id", shot_id}}, {{"verdict", "late"}}});
    throw SessionError(SessionError::Reason::expired, "submission after task budget");
  }
  const bool correct = is_correct_submission(*shot, *s.task);
  s.submissions.push_back({shot_id, at, correct});
  append(s, {at, LogKind::submit, {{"shot_id", shot_id}}, {{"verdict", correct ? "correct" : "incorrect"}}});
  if (correct) s.solved = true;
  return {correct, at};
}

std::vector<LogEvent> KisService::log(const std::string& session_id) const {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  return state->session.log;
}

Session KisService::snapshot(const std::string& session_id) const {
  auto state = find(session_id);
  std::lock_guard lock(state->mutex);
  return state->session;
}

double KisService::score(const std::string& session_id) const {
  const Session s = snapshot(session_id);
  if (!s.task) throw SessionError(SessionError::Reason::precondition, "session has no task");
  return score_session(s, *s.task, engine_->config().scoring);
}

ReplayReport replay_log(std::shared_ptr<const Engine> engine, const std::vector<LogEvent>& log,
                        const std::optional<KisTask>& task) {
  auto clock = std::make_shared<SimulatedClock>(0.0);
  std::vector<KisTask> tasks;
  if (task) tasks.push_back(*task);
  KisService service(engine, clock, tasks);
  const std::string sid = service.create_session(task ? std::optional<std::string>(task->id) : std::nullopt);

  ReplayReport report;
  auto check = [&](const LogEvent& e, const RankedList& list) {
    ++report.compared;
    report.results.push_back(list);
    if (!e.outcome.is_object() || e.outcome.value("digest", "") != hex64(result_digest(list))) ++report.mismatches;
  };
  auto expect_error = [&](const LogEvent& e) {
    ++report.compared;
    if (!e.outcome.is_object() || !e.outcome.contains("error")) ++report.mismatches;
  };

  for (const auto& e : log) {
    ++report.events;
    clock->set(e.at);
    try {
      switch (e.kind) {
        case LogKind::query:
          check(e, service.execute_query(sid, e.payload));
          break;
        case LogKind::feedback:
          if (e.payload.value("op", "") == "positive") {
            service.mark_positive(sid, e.payload.at("shot_id").get<std::string>());
          } else {
            check(e, service.run_feedback(sid, e.payload.at("lambda").get<double>()));
          }
          break;
        case LogKind::browse:
          service.results(sid, e.payload.value("view", "flat") == "grouped" ? ResultView::grouped : ResultView::flat);
          break;
        case LogKind::submit:
          service.submit(sid, e.payload.at("shot_id").get<std::string>());
          break;
        case LogKind::filter_change:
          break;  // re-emitted by the query that follows it
      }
    } catch (const SessionError&) {
      if (e.kind == LogKind::query || (e.kind == LogKind::feedback && e.payload.value("op", "") == "rerank")) {
        ++report.compared;
        ++report.mismatches;
      }
    } catch (const Error&) {
      if (e.kind == LogKind::query) expect_error(e);
    }
  }
  const Session replayed = service.snapshot(sid);
  report.last_results = replayed.last_results;
  if (replayed.log != log) ++report.mismatches;
  return report;
}

}  // namespace kis
