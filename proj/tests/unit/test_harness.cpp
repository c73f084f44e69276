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


#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kis/error.hpp"
#include "kis/harness.hpp"
#include "kis/json_io.hpp"
#include "kis/synthetic.hpp"

namespace kis {
namespace {

class HarnessTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticOptions o;
    o.videos = 5;
    o.shots_per_video = 8;
    engine_ = Engine::build(Corpus::from_data(make_synthetic_corpus(o)));
  }
  static void TearDownTestSuite() { engine_.reset(); }

  static json sketch_of(const std::string& shot_id) {
    CompositeQuery q;
    q.sketch = sketch_from_signature(engine_->color_index().signature(*engine_->corpus().shot_index(shot_id)));
    return json(q);
  }

  static std::shared_ptr<const Engine> engine_;
};

std::shared_ptr<const Engine> HarnessTest::engine_;

TEST_F(HarnessTest, ImmediateCorrectSubmitScoresFull) {
  const KisTask t = task_around_shot(engine_->corpus(), "v001_s003", "a");
  const AgentFile agent = parse_agent(json::array({{{"at", 0.0}, {"op", "submit"}, {"body", {{"shot_id", "v001_s003"}}}}}));
  const HarnessReport r = run_harness(engine_, {t}, agent);
  ASSERT_EQ(r.tasks.size(), 1u);
  EXPECT_TRUE(r.tasks[0].solved);
  EXPECT_DOUBLE_EQ(r.tasks[0].score, 100.0);
  EXPECT_EQ(r.solved, 1u);
}

TEST_F(HarnessTest, NoSubmissionScoresZero) {
  const KisTask t = task_around_shot(engine_->corpus(), "v001_s003", "a");
  const AgentFile agent = parse_agent(json::array({{{"at", 1.0}, {"op", "query"}, {"body", sketch_of("v000_s000")}}}));
  const HarnessReport r = run_harness(engine_, {t}, agent);
  EXPECT_FALSE(r.tasks[0].solved);
  EXPECT_DOUBLE_EQ(r.tasks[0].score, 0.0);
  EXPECT_DOUBLE_EQ(r.tasks[0].time_s, t.budget_s);
  EXPECT_DOUBLE_EQ(r.mean_score, 0.0);
}

TEST_F(HarnessTest, PlantedSketchAgentScoresByFormula) {
  std::vector<KisTask> tasks;
  json scripts = json::object();
  const std::vector<std::string> targets = {"v000_s002", "v002_s005", "v004_s007"};
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string id = "task" + std::to_string(i);
    tasks.push_back(task_around_shot(engine_->corpus(), targets[i], id));
    // A wrong guess first on the last task.
    json script = json::array({{{"at", 2.0}, {"op", "query"}, {"body", sketch_of(targets[i])}}});
    if (i == 2) script.push_back({{"at", 3.0}, {"op", "submit"}, {"body", {{"shot_id", "v000_s000"}}}});
    script.push_back({{"at", 4.0 + double(i)}, {"op", "submit_top"}, {"body", {{"rank", 1}}}});
    scripts[id] = script;
  }
  const HarnessReport r = run_harness(engine_, tasks, parse_agent({{"scripts", scripts}}));
  ASSERT_EQ(r.tasks.size(), 3u);
  EXPECT_EQ(r.solved, 3u);
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double wrong = i == 2 ? 1.0 : 0.0;
    const double expected = 100.0 - 50.0 * (4.0 + double(i)) / 300.0 - 10.0 * wrong;
    EXPECT_DOUBLE_EQ(r.tasks[i].score, expected) << i;
    EXPECT_DOUBLE_EQ(r.tasks[i].time_s, 4.0 + double(i));
    EXPECT_EQ(r.tasks[i].wrong_submissions, static_cast<std::size_t>(wrong));
    sum += expected;
  }
  EXPECT_DOUBLE_EQ(r.mean_score, sum / 3.0);

  const json j = to_json(r);
  EXPECT_EQ(j.at("aggregate").at("solved"), 3);
  EXPECT_EQ(j.at("tasks").size(), 3u);

  // Each recorded log replays cleanly.
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(replay_log(engine_, r.tasks[i].log, tasks[i]).mismatches, 0u);
}

TEST_F(HarnessTest, RejectedOperationsAreRecorded) {
  const KisTask t = task_around_shot(engine_->corpus(), "v001_s003", "a");
  const AgentFile agent = parse_agent(json::array({{{"op", "feedback"}},
                                                   {{"op", "submit_top"}, {"body", {{"rank", 3}}}},
                                                   {{"op", "submit"}, {"body", json::object()}},
                                                   {{"at", 400.0}, {"op", "submit"}, {"body", {{"shot_id", "v001_s003"}}}}}));
  const HarnessReport r = run_harness(engine_, {t}, agent);
  EXPECT_EQ(r.tasks[0].errors.size(), 4u);
  EXPECT_FALSE(r.tasks[0].solved);
}

TEST(AgentFile, Parsing) {
  EXPECT_THROW(parse_agent(json::array({{{"op", "dance"}}})), InvalidQuery);
  EXPECT_THROW(parse_agent(json::array({{{"at", 5.0}, {"op", "wait"}}, {{"at", 1.0}, {"op", "wait"}}})), InvalidQuery);
  EXPECT_THROW(parse_agent(json::array({json::object()})), InvalidQuery);
  EXPECT_THROW(parse_agent(json("x")), InvalidQuery);
  const AgentFile a = parse_agent({{"scripts", {{"t1", json::array({{{"op", "wait"}}})}}},
                                   {"default", json::array({{{"op", "results"}}})}});
  ASSERT_NE(a.script_for("t1"), nullptr);
  EXPECT_EQ(a.script_for("t1")->front().op, "wait");
  EXPECT_EQ(a.script_for("other")->front().op, "results");
  EXPECT_EQ(parse_agent({{"scripts", json::object()}}).script_for("t1"), nullptr);
}

TEST(TaskAroundShot, WindowCoversShot) {
  SyntheticOptions o;
  o.videos = 3;
  o.shots_per_video = 6;
  const Corpus c = Corpus::from_data(make_synthetic_corpus(o));
  for (const auto& s : c.shots()) {
    const KisTask t = task_around_shot(c, s.id, "t");
    EXPECT_NO_THROW(validate_task(t, c));
    EXPECT_TRUE(is_correct_submission(s, t)) << s.id;
  }
  EXPECT_THROW(task_around_shot(c, "nope", "t"), InvalidQuery);
}

}  // namespace
}  // namespace kis
