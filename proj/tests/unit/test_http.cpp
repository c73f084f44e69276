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


#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "fixtures.hpp"
#include "kis/harness.hpp"
#include "kis/http.hpp"
#include "kis/json_io.hpp"
#include "kis/synthetic.hpp"

namespace kis {
namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticOptions o;
    o.videos = 4;
    o.shots_per_video = 6;
    o.object_labels = 30;
    engine_ = Engine::build(Corpus::from_data(make_synthetic_corpus(o)));
    clock_ = std::make_shared<SimulatedClock>(0.0);
    task_ = task_around_shot(engine_->corpus(), "v001_s002", "t1");
    service_ = std::make_unique<KisService>(engine_, clock_, std::vector<KisTask>{task_});
    static_dir_ = std::make_unique<testing::TempDir>();
    { std::ofstream(static_dir_->path() / "index.html") << "<html>kis</html>"; }
    server_ = std::make_unique<HttpServer>(*service_, HttpOptions{static_dir_->path()});
    port_ = server_->bind_any_port();
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  json post(const std::string& path, const json& body, int expect) {
    auto res = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  json get(const std::string& path, int expect) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  json sketch_of(const std::string& shot_id) const {
    CompositeQuery q;
    q.sketch = sketch_from_signature(engine_->color_index().signature(*engine_->corpus().shot_index(shot_id)));
    q.limit = 10;
    return json(q);
  }

  std::shared_ptr<const Engine> engine_;
  std::shared_ptr<SimulatedClock> clock_;
  KisTask task_;
  std::unique_ptr<KisService> service_;
  std::unique_ptr<testing::TempDir> static_dir_;
  std::unique_ptr<HttpServer> server_;
  int port_ = -1;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpTest, SessionLifecycle) {
  const json created = post("/session", {{"task_id", "t1"}}, 201);
  const std::string sid = created.at("session_id");
  EXPECT_EQ(created.at("task").at("id"), "t1");
  EXPECT_FALSE(created.at("task").contains("video_id"));

  clock_->set(2.0);
  const json list = post("/session/" + sid + "/query", sketch_of("v001_s002"), 200);
  ASSERT_EQ(list.at("results").size(), 10u);
  EXPECT_EQ(list.at("results")[0].at("shot_id"), "v001_s002");
  EXPECT_EQ(list.get<RankedList>(), service_->snapshot(sid).last_results);

  const json grouped = get("/session/" + sid + "/results?view=grouped", 200);
  EXPECT_EQ(grouped.at("view"), "grouped");
  EXPECT_EQ(grouped.at("groups")[0].at("video_id"), "v001");
  const json flat = get("/session/" + sid + "/results?view=flat", 200);
  EXPECT_EQ(flat.at("results"), list.at("results"));
  get("/session/" + sid + "/results?view=mosaic", 400);

  const json pos = post("/session/" + sid + "/positive", {{"shot_id", "v001_s002"}}, 200);
  EXPECT_EQ(pos.at("positives"), json::array({"v001_s002"}));
  const json fb = post("/session/" + sid + "/feedback", {{"lambda", 1.0}}, 200);
  EXPECT_EQ(fb.at("results")[0].at("shot_id"), "v001_s002");
  EXPECT_EQ(post("/session/" + sid + "/feedback", json::object(), 200).at("results").size(), 10u);

  clock_->set(12.5);
  const json wrong = post("/session/" + sid + "/submit", {{"shot_id", "v003_s000"}}, 200);
  EXPECT_EQ(wrong.at("verdict"), "incorrect");
  const json right = post("/session/" + sid + "/submit", {{"shot_id", "v001_s002"}}, 200);
  EXPECT_EQ(right.at("verdict"), "correct");
  EXPECT_DOUBLE_EQ(right.at("at").get<double>(), 12.5);
  EXPECT_EQ(post("/session/" + sid + "/submit", {{"shot_id", "v001_s002"}}, 409).at("reason"), "ended");

  const json log = get("/session/" + sid + "/log", 200);
  std::vector<LogEvent> events;
  for (const auto& e : log.at("events")) events.push_back(e.get<LogEvent>());
  EXPECT_EQ(events, service_->log(sid));
  EXPECT_EQ(replay_log(engine_, events, task_).mismatches, 0u);
}

TEST_F(HttpTest, ErrorMapping) {
  get("/session/nope/log", 404);
  post("/session", {{"task_id", "nope"}}, 404);
  const std::string sid = post("/session", {{"task_id", "t1"}}, 201).at("session_id");
  EXPECT_TRUE(post("/session/" + sid + "/query", json::object(), 400).contains("error"));
  const json bad = post("/session/" + sid + "/query", {{"concept", "person AND (dog"}}, 400);
  EXPECT_EQ(bad.at("modality"), "concept");
  EXPECT_EQ(bad.at("offset"), 11);
  const json miss = post("/session/" + sid + "/query", {{"concept", "persn"}}, 400);
  EXPECT_FALSE(miss.at("suggestions").empty());
  post("/session/" + sid + "/feedback", json::object(), 400);
  post("/session/" + sid + "/positive", json::object(), 400);

  auto res = client_->Post("/session/" + sid + "/query", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  clock_->set(301.0);
  EXPECT_EQ(post("/session/" + sid + "/query", sketch_of("v000_s000"), 409).at("reason"), "expired");
  EXPECT_EQ(post("/session/" + sid + "/submit", {{"shot_id", "v001_s002"}}, 409).at("reason"), "expired");
}

TEST_F(HttpTest, Concepts) {
  const json all = get("/concepts", 200);
  EXPECT_EQ(all.at("bank"), "concept");
  EXPECT_EQ(all.at("labels").size(), 20u);
  const json pre = get("/concepts?prefix=ca&bank=concept", 200);
  EXPECT_EQ(pre.at("labels"), json::array({"car", "cat"}));
  const json obj = get("/concepts?bank=object&prefix=object_00&limit=3", 200);
  EXPECT_EQ(obj.at("labels"), json::array({"object_000", "object_001", "object_002"}));
  get("/concepts?bank=widgets", 400);
  get("/concepts?limit=abc", 400);
}

TEST_F(HttpTest, Recommend) {
  const json r = get("/recommend?x=0.5&y=0.5&n=4", 200);
  EXPECT_TRUE(r.at("enabled").get<bool>());
  const auto direct = recommend_colors(0.5, 0.5, engine_->color_index(), 4);
  ASSERT_EQ(r.at("colors").size(), direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(r.at("colors")[i].at("palette_index"), direct[i].palette_index);
    EXPECT_DOUBLE_EQ(r.at("colors")[i].at("frequency").get<double>(), direct[i].frequency);
  }
  get("/recommend?x=0.5", 400);
  get("/recommend?x=2&y=0.5", 400);
}

TEST_F(HttpTest, KeyframesAndTasks) {
  auto res = client_->Get("/keyframe/v000_s001");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/x-portable-pixmap");
  const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
  EXPECT_EQ(decode_keyframe(bytes), engine_->corpus().keyframe(1));
  get("/keyframe/nope", 404);

  const json task = get("/task/t1", 200);
  EXPECT_EQ(task, json({{"id", "t1"}, {"kind", "visual"}, {"prompt", task_.prompt}, {"budget_s", 300.0}}));
  get("/task/nope", 404);

  auto page = client_->Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->body, "<html>kis</html>");
}

}  // namespace
}  // namespace kis
