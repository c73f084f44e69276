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

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kis/color_sketch.hpp"
#include "kis/engine.hpp"
#include "kis/error.hpp"
#include "kis/harness.hpp"
#include "kis/http.hpp"
#include "kis/json_io.hpp"
#include "kis/service.hpp"
#include "kis/synthetic.hpp"

namespace {

using kis::json;

kis::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

kis::EngineConfig config_or_default(const std::string& path) {
  return path.empty() ? kis::EngineConfig{} : kis::load_config(path);
}

std::filesystem::path default_cache(const std::string& manifest) {
  return std::filesystem::path(manifest).parent_path() / "color_index.bin";
}

int run_index(const std::string& manifest, const std::string& config_path, int k, bool no_recommend,
              const std::string& out) {
  auto config = config_or_default(config_path);
  if (k > 0) config.color.signature.k = k;
  if (no_recommend) config.color.recommendation_enabled = false;
  const auto t0 = std::chrono::steady_clock::now();
  kis::Corpus corpus = kis::load_manifest(manifest);
  const auto fp = kis::corpus_fingerprint(corpus);
  auto engine = kis::Engine::build(std::move(corpus), config);
  const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto cache = out.empty() ? default_cache(manifest) : std::filesystem::path(out);
  kis::save_color_index(cache, engine->color_index(), fp);

  std::size_t centroids = 0, bw = 0, bordered = 0;
  for (const auto& sig : engine->color_index().signatures()) centroids += sig.centroids.size();
  for (const auto& [id, v] : engine->verdicts()) {
    bw += v.is_bw ? 1 : 0;
    bordered += v.border.max() >= config.filters.border_min ? 1 : 0;
  }
  json banks = json::object();
  for (const auto& b : engine->corpus().banks()) banks[std::string(kis::to_string(b.kind))] = b.cols;
  std::cout << json{{"videos", engine->corpus().videos().size()},
                    {"shots", engine->corpus().shot_count()},
                    {"centroids", centroids},
                    {"recommendation_enabled", engine->color_index().recommendation_enabled()},
                    {"banks", banks},
                    {"black_and_white", bw},
                    {"black_bordered", bordered},
                    {"build_seconds", seconds},
                    {"color_index_cache", cache.string()}}
                   .dump(2)
            << '\n';
  return 0;
}

int run_serve(const std::string& manifest, const std::string& config_path, const std::string& host, int port,
              const std::string& index_path, const std::string& tasks_path, const std::string& static_dir,
              const std::string& log_dir) {
  const auto config = config_or_default(config_path);
  kis::Corpus corpus = kis::load_manifest(manifest);
  std::optional<kis::ColorIndex> cached;
  if (!index_path.empty()) cached = kis::load_color_index(index_path, kis::corpus_fingerprint(corpus));
  auto engine = kis::Engine::build(std::move(corpus), config, std::move(cached));
  std::vector<kis::KisTask> tasks;
  if (!tasks_path.empty()) tasks = kis::load_tasks(tasks_path);
  std::optional<std::filesystem::path> logs;
  if (!log_dir.empty()) logs = log_dir;
  kis::KisService service(engine, std::make_shared<kis::WallClock>(), tasks, logs);

  kis::HttpOptions options;
  if (!static_dir.empty()) options.static_dir = static_dir;
  kis::HttpServer server(service, options);
  if (!server.bind(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << '\n';
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cerr << "serving " << engine->corpus().shot_count() << " shots on http://" << host << ":" << port << '\n';
  server.listen();
  g_server = nullptr;
  return 0;
}

int run_harness(const std::string& manifest, const std::string& tasks_path, const std::string& agent_path,
                const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out) {
  auto config = config_or_default(config_path);
  if (seed) config.color.signature.seed = *seed;
  auto engine = kis::Engine::build(kis::load_manifest(manifest), config);
  const auto tasks = kis::load_tasks(tasks_path);
  const auto agent = kis::load_agent(agent_path);
  const auto report = kis::run_harness(engine, tasks, agent);
  const json doc = kis::to_json(report);
  if (!out.empty()) {
    std::ofstream(out) << doc.dump(2) << '\n';
  }
  for (const auto& t : report.tasks) {
    std::cout << t.task_id << "\t" << (t.solved ? "solved" : "unsolved") << "\tscore=" << t.score
              << "\ttime=" << t.time_s << "\twrong=" << t.wrong_submissions << '\n';
  }
  std::cout << "solved " << report.solved << "/" << report.tasks.size() << "  mean score " << report.mean_score
            << '\n';
  return 0;
}

int run_synth(const std::string& dir, int videos, int shots, std::uint64_t seed, std::size_t objects, int tasks) {
  kis::SyntheticOptions options;
  options.videos = videos;
  options.shots_per_video = shots;
  options.seed = seed;
  options.object_labels = objects;
  options.black_and_white_share = 0.05;
  options.letterbox_share = 0.05;
  const auto manifest = kis::write_manifest(dir, kis::make_synthetic_corpus(options));

  auto engine = kis::Engine::build(kis::load_manifest(manifest));
  const auto& corpus = engine->corpus();
  json task_doc = json::array();
  json scripts = json::object();
  const std::size_t stride = std::max<std::size_t>(1, corpus.shot_count() / std::max(1, tasks));
  for (int t = 0; t < tasks && static_cast<std::size_t>(t) * stride < corpus.shot_count(); ++t) {
    const std::size_t target = static_cast<std::size_t>(t) * stride;
    const std::string task_id = "task" + std::to_string(t + 1);
    task_doc.push_back(kis::task_around_shot(corpus, corpus.shot(target).id, task_id));
    kis::CompositeQuery query;
    query.sketch = kis::sketch_from_signature(engine->color_index().signature(target));
    scripts[task_id] = json::array({json{{"at", 2.0}, {"op", "query"}, {"body", query}},
                                    json{{"at", 4.0}, {"op", "submit_top"}, {"body", {{"rank", 1}}}}});
  }
  std::ofstream(std::filesystem::path(dir) / "tasks.json") << task_doc.dump(2) << '\n';
  std::ofstream(std::filesystem::path(dir) / "agent.json") << json{{"scripts", scripts}}.dump(2) << '\n';
  std::ofstream(std::filesystem::path(dir) / "config.json") << json(kis::EngineConfig{}).dump(2) << '\n';
  std::cout << "wrote " << manifest.string() << " (" << corpus.shot_count() << " shots), tasks.json, agent.json, config.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Known-item search engine for shot-segmented video corpora"};
  app.require_subcommand(1);

  std::string manifest, config_path, out;

  auto* index = app.add_subcommand("index", "Build and cache the color index; print corpus statistics");
  int k = 0;
  bool no_recommend = false;
  index->add_option("manifest", manifest, "Corpus manifest (JSON)")->required()->check(CLI::ExistingFile);
  index->add_option("--k", k, "Signature centroid count (1-16)")->check(CLI::Range(1, 16));
  index->add_flag("--no-recommend", no_recommend, "Disable sketch color recommendations");
  index->add_option("--config", config_path, "Engine config (JSON)")->check(CLI::ExistingFile);
  index->add_option("--out", out, "Color index cache path (default: next to the manifest)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP search service");
  std::string host = "127.0.0.1", index_path, tasks_path, static_dir, log_dir;
  int port = 8080;
  serve->add_option("manifest", manifest, "Corpus manifest (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--config", config_path, "Engine config (JSON)")->check(CLI::ExistingFile);
  serve->add_option("--index", index_path, "Color index cache from 'engine index'")->check(CLI::ExistingFile);
  serve->add_option("--tasks", tasks_path, "KIS task file (JSON)")->check(CLI::ExistingFile);
  serve->add_option("--static", static_dir, "Directory of browser client assets")->check(CLI::ExistingDirectory);
  serve->add_option("--log-dir", log_dir, "Write one JSON-lines log per session here");

  auto* harness = app.add_subcommand("harness", "Run scripted KIS tasks under a simulated clock");
  std::string agent_path;
  std::optional<std::uint64_t> seed;
  harness->add_option("manifest", manifest, "Corpus manifest (JSON)")->required()->check(CLI::ExistingFile);
  harness->add_option("tasks", tasks_path, "KIS task file (JSON)")->required()->check(CLI::ExistingFile);
  harness->add_option("agent", agent_path, "Agent script file (JSON)")->required()->check(CLI::ExistingFile);
  harness->add_option("--seed", seed, "Pixel-sampling seed for signature extraction");
  harness->add_option("--config", config_path, "Engine config (JSON)")->check(CLI::ExistingFile);
  harness->add_option("--out", out, "Write the full JSON report here");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted tasks");
  std::string dir;
  int videos = 20, shots = 10, tasks = 5;
  std::uint64_t synth_seed = 7;
  std::size_t objects = 0;
  synth->add_option("dir", dir, "Output directory")->required();
  synth->add_option("--videos", videos, "Number of videos")->check(CLI::PositiveNumber);
  synth->add_option("--shots", shots, "Shots per video")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--objects", objects, "Object bank width (e.g. 618)");
  synth->add_option("--tasks", tasks, "Planted tasks to write")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) return run_index(manifest, config_path, k, no_recommend, out);
    if (*serve) return run_serve(manifest, config_path, host, port, index_path, tasks_path, static_dir, log_dir);
    if (*harness) return run_harness(manifest, tasks_path, agent_path, config_path, seed, out);
    if (*synth) return run_synth(dir, videos, shots, synth_seed, objects, tasks);
  } catch (const kis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
