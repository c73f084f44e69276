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


// Python bindings. Structured values cross the boundary as JSON text; the
// kisengine package converts them to and from Python objects.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kis/color.hpp"
#include "kis/concept_algebra.hpp"
#include "kis/engine.hpp"
#include "kis/error.hpp"
#include "kis/fusion.hpp"
#include "kis/harness.hpp"
#include "kis/json_io.hpp"
#include "kis/service.hpp"
#include "kis/synthetic.hpp"
#include "kis/text_search.hpp"

namespace py = pybind11;
using kis::json;

namespace {

struct PyEngine {
  std::shared_ptr<const kis::Engine> engine;
};

class PyService {
 public:
  PyService(const PyEngine& engine, const std::string& tasks_json, bool simulated, double start)
      : engine_(engine.engine) {
    std::shared_ptr<kis::Clock> clock;
    if (simulated) {
      sim_ = std::make_shared<kis::SimulatedClock>(start);
      clock = sim_;
    } else {
      clock = std::make_shared<kis::WallClock>();
    }
    service_ = std::make_unique<kis::KisService>(engine_, clock, json::parse(tasks_json).get<std::vector<kis::KisTask>>());
  }

  kis::SimulatedClock& sim() {
    if (!sim_) throw kis::InvalidQuery("service runs on the wall clock");
    return *sim_;
  }
  kis::KisService& service() { return *service_; }

 private:
  std::shared_ptr<const kis::Engine> engine_;
  std::shared_ptr<kis::SimulatedClock> sim_;
  std::unique_ptr<kis::KisService> service_;
};

kis::EngineConfig config_from(const std::string& config_json) {
  return config_json.empty() ? kis::EngineConfig{} : json::parse(config_json).get<kis::EngineConfig>();
}

kis::SyntheticOptions synthetic_from(const std::string& options_json) {
  const json j = options_json.empty() ? json::object() : json::parse(options_json);
  kis::SyntheticOptions o;
  o.videos = j.value("videos", o.videos);
  o.shots_per_video = j.value("shots_per_video", o.shots_per_video);
  o.keyframe_width = j.value("width", o.keyframe_width);
  o.keyframe_height = j.value("height", o.keyframe_height);
  o.seed = j.value("seed", o.seed);
  o.concept_labels = j.value("concept_labels", o.concept_labels);
  o.object_labels = j.value("object_labels", o.object_labels);
  o.black_and_white_share = j.value("black_and_white_share", o.black_and_white_share);
  o.letterbox_share = j.value("letterbox_share", o.letterbox_share);
  o.text = j.value("text", o.text);
  return o;
}

std::size_t index_of(const kis::Corpus& corpus, const std::string& shot_id) {
  const auto i = corpus.shot_index(shot_id);
  if (!i) throw kis::InvalidQuery("unknown shot '" + shot_id + "'");
  return *i;
}

kis::BankKind bank_from(const std::string& name) {
  const auto b = kis::bank_kind_from_string(name);
  if (!b) throw kis::InvalidQuery("bank must be 'concept' or 'object'");
  return *b;
}

}  // namespace

PYBIND11_MODULE(_kisengine, m) {
  m.doc() = "Known-item search engine core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<std::vector<py::object>> types;
  types.call_once_and_store_result([&m] {
    std::vector<py::object> t;
    t.push_back(py::exception<kis::Error>(m, "KisError"));
    t.push_back(py::exception<kis::LoadError>(m, "LoadError", t[0]));
    t.push_back(py::exception<kis::InvalidQuery>(m, "InvalidQuery", t[0]));
    t.push_back(py::exception<kis::ParseError>(m, "ParseError", t[2]));
    t.push_back(py::exception<kis::ModalityError>(m, "ModalityError", t[2]));
    t.push_back(py::exception<kis::SessionError>(m, "SessionError", t[0]));
    return t;
  });
  py::register_exception_translator([](std::exception_ptr p) {
    enum { base, load, invalid, parse, modality, session };
    const auto& t = types.get_stored();
    auto raise = [&t](int type, const char* what, py::dict attrs = {}) {
      py::object exc = t[type](what);
      for (auto item : attrs) exc.attr(item.first) = item.second;
      PyErr_SetObject(t[type].ptr(), exc.ptr());
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const kis::ParseError& e) {
      py::dict a;
      a["offset"] = e.offset();
      raise(parse, e.what(), a);
    } catch (const kis::ModalityError& e) {
      py::dict a;
      a["modality"] = e.modality();
      a["offset"] = e.offset() ? py::cast(*e.offset()) : py::none();
      a["suggestions"] = e.suggestions();
      raise(modality, e.what(), a);
    } catch (const kis::UnresolvedLabelError& e) {
      py::dict a;
      a["label"] = e.label();
      a["suggestions"] = e.suggestions();
      raise(invalid, e.what(), a);
    } catch (const kis::SessionError& e) {
      static const char* reasons[] = {"not_found", "expired", "ended", "precondition"};
      py::dict a;
      a["reason"] = reasons[static_cast<int>(e.reason())];
      raise(session, e.what(), a);
    } catch (const kis::LoadError& e) {
      py::dict a;
      a["locus"] = e.locus();
      raise(load, e.what(), a);
    } catch (const kis::InvalidQuery& e) {
      raise(invalid, e.what());
    } catch (const kis::DecodeError& e) {
      raise(load, e.what());
    } catch (const kis::Error& e) {
      raise(base, e.what());
    } catch (const json::exception& e) {
      raise(invalid, (std::string("malformed JSON: ") + e.what()).c_str());
    }
  });

  py::class_<PyEngine>(m, "Engine")
      .def_static(
          "from_manifest",
          [](const std::string& path, const std::string& config_json) {
            py::gil_scoped_release release;
            return PyEngine{kis::Engine::build(kis::load_manifest(path), config_from(config_json))};
          },
          py::arg("path"), py::arg("config_json") = "")
      .def_static(
          "synthetic",
          [](const std::string& options_json, const std::string& config_json) {
            py::gil_scoped_release release;
            return PyEngine{kis::Engine::build(kis::Corpus::from_data(kis::make_synthetic_corpus(synthetic_from(options_json))),
                                               config_from(config_json))};
          },
          py::arg("options_json") = "", py::arg("config_json") = "")
      .def_property_readonly("shot_count", [](const PyEngine& e) { return e.engine->corpus().shot_count(); })
      .def("shot_ids",
           [](const PyEngine& e) {
             std::vector<std::string> out;
             for (const auto& s : e.engine->corpus().shots()) out.push_back(s.id);
             return out;
           })
      .def("fingerprint", [](const PyEngine& e) { return kis::corpus_fingerprint(e.engine->corpus()); })
      .def("config_json", [](const PyEngine& e) { return json(e.engine->config()).dump(); })
      .def(
          "query",
          [](const PyEngine& e, const std::string& query_json) {
            const kis::CompositeQuery q = kis::parse_composite_query(json::parse(query_json));
            py::gil_scoped_release release;
            return json(kis::execute_composite(*e.engine, q)).dump();
          },
          py::arg("query_json"))
      .def(
          "group_by_video",
          [](const PyEngine& e, const std::string& list_json) {
            return json(kis::group_by_video(json::parse(list_json).get<kis::RankedList>(), e.engine->corpus())).dump();
          },
          py::arg("list_json"))
      .def(
          "signature",
          [](const PyEngine& e, const std::string& shot_id) {
            return json(e.engine->color_index().signature(index_of(e.engine->corpus(), shot_id))).dump();
          },
          py::arg("shot_id"))
      .def(
          "sketch_for_shot",
          [](const PyEngine& e, const std::string& shot_id, const std::string& level) {
            const auto& sig = e.engine->color_index().signature(index_of(e.engine->corpus(), shot_id));
            return json(kis::sketch_from_signature(sig, level == "shot" ? kis::SketchLevel::shot : kis::SketchLevel::frame))
                .dump();
          },
          py::arg("shot_id"), py::arg("level") = "frame")
      .def(
          "concepts",
          [](const PyEngine& e, const std::string& prefix, const std::string& bank, std::size_t limit) {
            return kis::list_concepts(e.engine->corpus(), prefix, bank_from(bank), limit);
          },
          py::arg("prefix") = "", py::arg("bank") = "concept", py::arg("limit") = 20)
      .def(
          "recommend",
          [](const PyEngine& e, double x, double y, std::size_t n) {
            return json(kis::recommend_colors(x, y, e.engine->color_index(), n)).dump();
          },
          py::arg("x"), py::arg("y"), py::arg("n") = 8)
      .def(
          "verdict",
          [](const PyEngine& e, const std::string& shot_id) {
            const kis::FilterVerdict& v = e.engine->verdicts().at(e.engine->corpus().shot(index_of(e.engine->corpus(), shot_id)).id);
            return json{{"shot_id", v.shot_id},
                        {"black_and_white", v.is_bw},
                        {"border", {{"top", v.border.top}, {"bottom", v.border.bottom}, {"left", v.border.left}, {"right", v.border.right}}}}
                .dump();
          },
          py::arg("shot_id"))
      .def(
          "keyframe",
          [](const PyEngine& e, const std::string& shot_id) {
            const auto bytes = e.engine->corpus().keyframe_bytes(index_of(e.engine->corpus(), shot_id));
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
          },
          py::arg("shot_id"));

  py::class_<PyService>(m, "Service")
      .def(py::init<const PyEngine&, const std::string&, bool, double>(), py::arg("engine"),
           py::arg("tasks_json") = "[]", py::arg("simulated_clock") = true, py::arg("start") = 0.0,
           py::keep_alive<1, 2>())
      .def("set_time", [](PyService& s, double t) { s.sim().set(t); }, py::arg("t"))
      .def("advance", [](PyService& s, double dt) { s.sim().advance(dt); }, py::arg("dt"))
      .def("create_session", [](PyService& s, std::optional<std::string> task_id) { return s.service().create_session(task_id); },
           py::arg("task_id") = py::none())
      .def(
          "query",
          [](PyService& s, const std::string& sid, const std::string& query_json) {
            const json request = json::parse(query_json);
            py::gil_scoped_release release;
            return json(s.service().execute_query(sid, request)).dump();
          },
          py::arg("session_id"), py::arg("query_json"))
      .def(
          "results",
          [](PyService& s, const std::string& sid, const std::string& view) {
            if (view != "grouped" && view != "flat") throw kis::InvalidQuery("view must be 'grouped' or 'flat'");
            return s.service().results(sid, view == "grouped" ? kis::ResultView::grouped : kis::ResultView::flat).dump();
          },
          py::arg("session_id"), py::arg("view") = "grouped")
      .def("mark_positive", [](PyService& s, const std::string& sid, const std::string& shot) { s.service().mark_positive(sid, shot); },
           py::arg("session_id"), py::arg("shot_id"))
      .def(
          "feedback",
          [](PyService& s, const std::string& sid, std::optional<double> lambda) {
            return json(s.service().run_feedback(sid, lambda)).dump();
          },
          py::arg("session_id"), py::arg("lambda_") = py::none())
      .def(
          "submit",
          [](PyService& s, const std::string& sid, const std::string& shot) {
            const auto r = s.service().submit(sid, shot);
            return py::make_tuple(r.correct, r.at);
          },
          py::arg("session_id"), py::arg("shot_id"))
      .def("log", [](PyService& s, const std::string& sid) { return json(s.service().log(sid)).dump(); }, py::arg("session_id"))
      .def("score", [](PyService& s, const std::string& sid) { return s.service().score(sid); }, py::arg("session_id"));

  m.def("canonical_concept_query", [](const std::string& q) { return kis::print_expr(kis::parse_concept_query(q)); },
        py::arg("query"));
  m.def(
      "eval_concept_query",
      [](const std::string& q, const std::unordered_map<std::string, double>& scores) {
        return kis::eval_expr(kis::parse_concept_query(q), scores);
      },
      py::arg("query"), py::arg("scores"));
  m.def("tokenize", &kis::tokenize, py::arg("text"));
  m.def(
      "rgb_to_lab",
      [](int r, int g, int b) {
        if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) throw kis::InvalidQuery("channel outside 0..255");
        const kis::LabColor c = kis::rgb_to_lab(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b));
        return py::make_tuple(c.L, c.a, c.b);
      },
      py::arg("r"), py::arg("g"), py::arg("b"));
  m.def(
      "fuse",
      [](const std::string& lists_json, const std::vector<double>& weights, double k) {
        const auto lists = json::parse(lists_json).get<std::vector<kis::RankedList>>();
        if (lists.size() != weights.size()) throw kis::InvalidQuery("one weight per list is required");
        std::vector<kis::FusionInput> in;
        for (std::size_t i = 0; i < lists.size(); ++i) in.push_back({std::cref(lists[i]), weights[i]});
        return json(kis::fuse(in, k)).dump();
      },
      py::arg("lists_json"), py::arg("weights"), py::arg("k") = 60.0);
  m.def(
      "replay",
      [](const PyEngine& e, const std::string& log_json, const std::string& task_json) {
        const auto log = json::parse(log_json).get<std::vector<kis::LogEvent>>();
        std::optional<kis::KisTask> task;
        if (!task_json.empty()) task = json::parse(task_json).get<kis::KisTask>();
        const kis::ReplayReport r = kis::replay_log(e.engine, log, task);
        return json{{"events", r.events}, {"compared", r.compared}, {"mismatches", r.mismatches}, {"results", r.results},
                    {"last_results", r.last_results}}
            .dump();
      },
      py::arg("engine"), py::arg("log_json"), py::arg("task_json") = "");
  m.def(
      "run_harness",
      [](const PyEngine& e, const std::string& tasks_json, const std::string& agent_json) {
        const auto tasks = json::parse(tasks_json).get<std::vector<kis::KisTask>>();
        const kis::AgentFile agent = kis::parse_agent(json::parse(agent_json));
        py::gil_scoped_release release;
        return kis::to_json(kis::run_harness(e.engine, tasks, agent)).dump();
      },
      py::arg("engine"), py::arg("tasks_json"), py::arg("agent_json"));
  m.def(
      "task_around_shot",
      [](const PyEngine& e, const std::string& shot_id, const std::string& task_id, double budget_s) {
        return json(kis::task_around_shot(e.engine->corpus(), shot_id, task_id, e.engine->config().task_segment_s, budget_s))
            .dump();
      },
      py::arg("engine"), py::arg("shot_id"), py::arg("task_id"), py::arg("budget_s") = 300.0);
  m.def(
      "write_synthetic",
      [](const std::string& dir, const std::string& options_json) {
        return kis::write_manifest(dir, kis::make_synthetic_corpus(synthetic_from(options_json))).string();
      },
      py::arg("dir"), py::arg("options_json") = "");
}
