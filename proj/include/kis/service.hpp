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

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kis/engine.hpp"

namespace kis {

/// Seconds on an arbitrary monotone timeline.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
};

class WallClock final : public Clock {
 public:
  double now() const override;
};

/// Manually driven clock for deterministic tests and the harness.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(double start = 0.0) : now_(start) {}
  double now() const override { return now_.load(); }
  void set(double t) { now_.store(t); }
  void advance(double dt) { now_.store(now_.load() + dt); }

 private:
  std::atomic<double> now_;
};

enum class TaskKind { visual, textual };

struct KisTask {
  std::string id;
  std::string video_id;
  double target_start_s = 0.0;
  double target_end_s = 0.0;
  double budget_s = 300.0;
  TaskKind kind = TaskKind::visual;
  std::string prompt;

  friend bool operator==(const KisTask&, const KisTask&) = default;
};

/// Throws InvalidQuery if the task's video is missing, the target falls
/// outside it, or the target length differs from `segment_s`.
void validate_task(const KisTask& task, const Corpus& corpus, double segment_s = 20.0);

enum class LogKind { query, feedback, filter_change, browse, submit };

struct LogEvent {
  double at = 0.0;  // seconds from session start
  LogKind kind = LogKind::query;
  nlohmann::json payload;  // the request as issued
  nlohmann::json outcome;  // result digest, verdict, or error

  friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

struct Submission {
  std::string shot_id;
  double at = 0.0;
  bool correct = false;

  friend bool operator==(const Submission&, const Submission&) = default;
};

/// Copy of a session's state at one instant.
struct Session {
  std::string id;
  std::optional<KisTask> task;
  double started_at = 0.0;
  RankedList last_results;
  std::set<std::string> positives;
  std::vector<LogEvent> log;
  std::vector<Submission> submissions;
  FilterFlags flags;
  bool solved = false;
};

/// True iff the shot lies in the task's video and overlaps the target window
/// with positive length.
bool is_correct_submission(const Shot& shot, const KisTask& task);

/// 0 if unsolved; otherwise max(0, max_score - time_penalty * t/budget -
/// wrong_penalty * wrong), with t the time of the correct submission.
double score_session(const Session& session, const KisTask& task, const ScoringConfig& scoring = {});

enum class ResultView { grouped, flat };

struct SubmitResult {
  bool correct = false;
  double at = 0.0;
};

/// Per-user search sessions over a shared engine. Every operation locks only
/// the session it touches, so different sessions run concurrently.
class KisService {
 public:
  KisService(std::shared_ptr<const Engine> engine, std::shared_ptr<Clock> clock, std::vector<KisTask> tasks = {},
             std::optional<std::filesystem::path> log_dir = std::nullopt);

  const Engine& engine() const noexcept { return *engine_; }
  const Clock& clock() const noexcept { return *clock_; }
  const KisTask* find_task(const std::string& task_id) const;

  std::string create_session(const std::optional<std::string>& task_id = std::nullopt);

  /// `request` is the CompositeQuery wire JSON; it is logged verbatim.
  RankedList execute_query(const std::string& session_id, const nlohmann::json& request);
  RankedList execute_query(const std::string& session_id, const CompositeQuery& query);

  /// Current results in the requested shape; logged as a browse event.
  nlohmann::json results(const std::string& session_id, ResultView view);

  void mark_positive(const std::string& session_id, const std::string& shot_id);
  RankedList run_feedback(const std::string& session_id, std::optional<double> lambda = std::nullopt);
  SubmitResult submit(const std::string& session_id, const std::string& shot_id);

  std::vector<LogEvent> log(const std::string& session_id) const;
  Session snapshot(const std::string& session_id) const;
  double score(const std::string& session_id) const;

 private:
  struct State {
    mutable std::mutex mutex;
    Session session;
  };

  std::shared_ptr<State> find(const std::string& session_id) const;
  double elapsed(const Session& s) const;
  void require_active(Session& s, double at) const;
  void append(Session& s, LogEvent event) const;

  std::shared_ptr<const Engine> engine_;
  std::shared_ptr<Clock> clock_;
  std::map<std::string, KisTask> tasks_;
  std::optional<std::filesystem::path> log_dir_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<State>> sessions_;
  std::uint64_t session_counter_ = 0;
};

struct ReplayReport {
  std::size_t events = 0;
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  std::vector<RankedList> results;  // every list reproduced, in log order
  RankedList last_results;
};

/// Re-executes a session log on a fresh session (simulated clock set to each
/// event's time) and checks each reproduced list against the logged digest.
ReplayReport replay_log(std::shared_ptr<const Engine> engine, const std::vector<LogEvent>& log,
                        const std::optional<KisTask>& task = std::nullopt);

}  // namespace kis
