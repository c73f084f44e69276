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
#include <memory>
#include <optional>
#include <string>

#include "kis/service.hpp"

namespace kis {

struct HttpOptions {
  /// Directory served at "/" (the browser client), if any.
  std::optional<std::filesystem::path> static_dir;
};

/// HTTP+JSON front end over a KisService.
///
///   POST /session                      {"task_id"?}
///   POST /session/{id}/query           CompositeQuery
///   GET  /session/{id}/results?view=grouped|flat
///   POST /session/{id}/positive        {"shot_id"}
///   POST /session/{id}/feedback        {"lambda"?}
///   POST /session/{id}/submit          {"shot_id"}
///   GET  /session/{id}/log
///   GET  /concepts?prefix=&bank=&limit=
///   GET  /recommend?x=&y=&n=
///   GET  /keyframe/{shot_id}
///   GET  /task/{id}
class HttpServer {
 public:
  explicit HttpServer(KisService& service, HttpOptions options = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds an ephemeral port and returns it (-1 on failure).
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Serves until stop(); blocks the calling thread.
  bool listen();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kis
