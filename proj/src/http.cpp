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

#include "kis/http.hpp"

#include <httplib.h>

#include "kis/concept_algebra.hpp"
#include "kis/error.hpp"
#include "kis/json_io.hpp"

namespace kis {

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw InvalidQuery(std::string("malformed JSON body: ") + e.what());
  }
}

double number_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw InvalidQuery(std::string("missing parameter '") + name + "'");
  const std::string raw = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw InvalidQuery(std::string("parameter '") + name + "' is not a number");
  }
}

// Maps engine errors onto HTTP statuses with a JSON error body.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const SessionError& e) {
    int status = 400;
    const char* reason = "precondition";
    switch (e.reason()) {
      case SessionError::Reason::not_found:
        status = 404;
        reason = "not_found";
        break;
      case SessionError::Reason::expired:
        status = 409;
        reason = "expired";
        break;
      case SessionError::Reason::ended:
        status = 409;
        reason = "ended";
        break;
      case SessionError::Reason::precondition:
        break;
    }
    send_json(res, {{"error", e.what()}, {"reason", reason}}, status);
  } catch (const ModalityError& e) {
    json body = {{"error", e.what()}, {"modality", e.modality()}};
    if (e.offset()) body["offset"] = *e.offset();
    if (!e.suggestions().empty()) body["suggestions"] = e.suggestions();
    send_json(res, body, 400);
  } catch (const ParseError& e) {
    send_json(res, {{"error", e.what()}, {"offset", e.offset()}}, 400);
  } catch (const Error& e) {
    send_json(res, {{"error", e.what()}}, 400);
  } catch (const json::exception& e) {
    send_json(res, {{"error", std::string("malformed request: ") + e.what()}}, 400);
  }
}

}  // namespace

struct HttpServer::Impl {
  KisService& service;
  httplib::Server server;

  explicit Impl(KisService& s) : service(s) {}

  void routes() {
    server.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        std::optional<std::string> task_id;
        if (body.contains("task_id") && !body.at("task_id").is_null()) task_id = body.at("task_id").get<std::string>();
        const std::string id = service.create_session(task_id);
        json out = {{"session_id", id}};
        if (task_id) out["task"] = task_view(*service.find_task(*task_id));
        send_json(res, out, 201);
      });
    });

    server.Post(R"(/session/([^/]+)/query)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, json(service.execute_query(req.matches[1], parse_body(req)))); });
    });

    server.Get(R"(/session/([^/]+)/results)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string view = req.has_param("view") ? req.get_param_value("view") : "grouped";
        if (view != "grouped" && view != "flat") throw InvalidQuery("view must be 'grouped' or 'flat'");
        send_json(res, service.results(req.matches[1], view == "grouped" ? ResultView::grouped : ResultView::flat));
      });
    });

    server.Post(R"(/session/([^/]+)/positive)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        service.mark_positive(req.matches[1], body.at("shot_id").get<std::string>());
        const Session s = service.snapshot(req.matches[1]);
        send_json(res, {{"positives", s.positives}});
      });
    });

    server.Post(R"(/session/([^/]+)/feedback)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        std::optional<double> lambda;
        if (body.contains("lambda") && !body.at("lambda").is_null()) lambda = body.at("lambda").get<double>();
        send_json(res, json(service.run_feedback(req.matches[1], lambda)));
      });
    });

    server.Post(R"(/session/([^/]+)/submit)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const auto result = service.submit(req.matches[1], body.at("shot_id").get<std::string>());
        send_json(res, {{"verdict", result.correct ? "correct" : "incorrect"}, {"at", result.at}});
      });
    });

    server.Get(R"(/session/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, {{"events", service.log(req.matches[1])}}); });
    });

    server.Get("/concepts", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string prefix = req.has_param("prefix") ? req.get_param_value("prefix") : "";
        const std::string bank_name = req.has_param("bank") ? req.get_param_value("bank") : "concept";
        const auto bank = bank_kind_from_string(bank_name);
        if (!bank) throw InvalidQuery("bank must be 'concept' or 'object'");
        const auto limit = req.has_param("limit") ? static_cast<std::size_t>(number_param(req, "limit")) : 20;
        send_json(res, {{"bank", bank_name}, {"labels", list_concepts(service.engine().corpus(), prefix, *bank, limit)}});
      });
    });

    server.Get("/recommend", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const double x = number_param(req, "x");
        const double y = number_param(req, "y");
        const auto& engine = service.engine();
        const auto n = req.has_param("n") ? static_cast<std::size_t>(number_param(req, "n")) : engine.config().recommend_size;
        send_json(res, {{"enabled", engine.color_index().recommendation_enabled()},
                        {"colors", recommend_colors(x, y, engine.color_index(), n)}});
      });
    });

    server.Get(R"(/keyframe/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto& corpus = service.engine().corpus();
        const auto idx = corpus.shot_index(req.matches[1].str());
        if (!idx) throw SessionError(SessionError::Reason::not_found, "unknown shot '" + req.matches[1].str() + "'");
        const auto bytes = corpus.keyframe_bytes(*idx);
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/x-portable-pixmap");
      });
    });

    server.Get(R"(/task/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const KisTask* task = service.find_task(req.matches[1]);
        if (task == nullptr) throw SessionError(SessionError::Reason::not_found, "unknown task '" + req.matches[1].str() + "'");
        send_json(res, task_view(*task));
      });
    });
  }

  // What a searcher may see: never the target video or window.
  static json task_view(const KisTask& task) {
    return {{"id", task.id}, {"kind", to_string(task.kind)}, {"prompt", task.prompt}, {"budget_s", task.budget_s}};
  }
};

HttpServer::HttpServer(KisService& service, HttpOptions options) : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
  if (options.static_dir) impl_->server.set_mount_point("/", options.static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool HttpServer::listen() { return impl_->server.listen_after_bind(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }
void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace kis
