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

#include "kis/corpus.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "kis/error.hpp"
#include "kis/hash.hpp"

namespace kis {

namespace {

using json = nlohmann::json;

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// PPM header token reader: skips whitespace and '#' comments.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t read_uint(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) throw DecodeError(std::string("PPM ") + what + " too large");
      ++pos_;
    }
    if (pos_ == start) throw DecodeError(std::string("PPM header: expected ") + what);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the payload.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw DecodeError("PPM header: truncated");
    ++pos_;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

template <typename T>
T require(const json& obj, const char* key, const std::string& locus) {
  if (!obj.is_object() || !obj.contains(key)) throw LoadError(locus + "." + key, "missing field");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw LoadError(locus + "." + key, std::string("wrong type: ") + e.what());
  }
}

template <typename T>
T optional_field(const json& obj, const char* key, const std::string& locus, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw LoadError(locus + "." + key, std::string("wrong type: ") + e.what());
  }
}

std::vector<std::string> read_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open labels file");
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    labels.push_back(line);
  }
  return labels;
}

}  // namespace

std::string_view to_string(BankKind kind) { return kind == BankKind::concepts ? "concept" : "object"; }

std::optional<BankKind> bank_kind_from_string(std::string_view s) {
  if (s == "concept") return BankKind::concepts;
  if (s == "object") return BankKind::objects;
  return std::nullopt;
}

Keyframe decode_keyframe(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw DecodeError("bad magic: expected P6");
  HeaderReader reader(bytes);
  reader.advance(2);
  const std::size_t width = reader.read_uint("width");
  const std::size_t height = reader.read_uint("height");
  const std::size_t maxval = reader.read_uint("maxval");
  if (maxval != 255) throw DecodeError("unsupported maxval " + std::to_string(maxval) + " (expected 255)");
  if (width == 0 || height == 0) throw DecodeError("empty image");
  reader.expect_single_space();

  const std::size_t need = width * height * 3;
  const std::size_t have = bytes.size() - reader.pos();
  if (have < need) {
    throw DecodeError("truncated payload: expected " + std::to_string(need) + " bytes, got " + std::to_string(have));
  }
  Keyframe kf(static_cast<int>(width), static_cast<int>(height));
  const std::uint8_t* p = bytes.data() + reader.pos();
  for (auto& px : kf.pixels) {
    px = {p[0], p[1], p[2]};
    p += 3;
  }
  return kf;
}

std::vector<std::uint8_t> encode_keyframe(const Keyframe& kf) {
  const std::string header = "P6\n" + std::to_string(kf.width) + " " + std::to_string(kf.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + kf.pixels.size() * 3);
  for (const auto& px : kf.pixels) {
    out.push_back(px.r);
    out.push_back(px.g);
    out.push_back(px.b);
  }
  return out;
}

Keyframe read_keyframe_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_keyframe(bytes);
}

void write_keyframe_file(const std::filesystem::path& path, const Keyframe& kf) {
  const auto bytes = encode_keyframe(kf);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<Violation> validate_corpus(const CorpusData& data) {
  std::vector<Violation> out;
  auto report = [&](std::string entity, std::string rule, std::string detail) {
    out.push_back({std::move(entity), std::move(rule), std::move(detail)});
  };

  std::unordered_map<std::string, const Video*> videos;
  for (const auto& v : data.videos) {
    if (v.id.empty()) report(v.id, "nonempty_id", "video id is empty");
    if (!videos.emplace(v.id, &v).second) report(v.id, "duplicate_id", "duplicate video id");
    if (!std::isfinite(v.duration_s) || v.duration_s < 0) report(v.id, "duration_nonnegative", "invalid duration");
  }

  std::unordered_map<std::string, const Shot*> shots;
  for (const auto& s : data.shots) {
    if (s.id.empty()) report(s.id, "nonempty_id", "shot id is empty");
    if (!shots.emplace(s.id, &s).second) report(s.id, "duplicate_id", "duplicate shot id");
    if (!(std::isfinite(s.start_s) && std::isfinite(s.end_s)) || s.start_s < 0) {
      report(s.id, "start_nonnegative", "start_s must be a finite value >= 0");
    }
    if (!(s.start_s < s.end_s)) report(s.id, "start_before_end", "start_s must be < end_s");
    auto it = videos.find(s.video_id);
    if (it == videos.end()) {
      report(s.id, "dangling_reference", "video '" + s.video_id + "' not found");
    } else if (s.end_s > it->second->duration_s) {
      report(s.id, "within_video", "end_s exceeds duration of video '" + s.video_id + "'");
    }
    if (s.keyframe_ref.empty() && !data.inline_keyframes.contains(s.id)) {
      report(s.id, "keyframe_present", "shot has no master keyframe");
    }
  }

  std::unordered_set<std::string> listed;
  for (const auto& v : data.videos) {
    const Shot* prev = nullptr;
    for (const auto& sid : v.shot_ids) {
      auto it = shots.find(sid);
      if (it == shots.end()) {
        report(v.id, "dangling_reference", "shot '" + sid + "' not found");
        continue;
      }
      const Shot* s = it->second;
      if (!listed.insert(sid).second) report(v.id, "shot_listed_once", "shot '" + sid + "' listed more than once");
      if (s->video_id != v.id) report(v.id, "shot_backref", "shot '" + sid + "' belongs to video '" + s->video_id + "'");
      if (prev != nullptr) {
        if (s->start_s < prev->start_s) report(v.id, "shot_order", "shot '" + sid + "' out of time order");
        else if (s->start_s < prev->end_s) report(v.id, "shot_overlap", "shot '" + sid + "' overlaps '" + prev->id + "'");
      }
      prev = s;
    }
  }
  for (const auto& s : data.shots) {
    if (videos.contains(s.video_id) && !listed.contains(s.id)) {
      report(s.id, "shot_listed", "shot missing from video '" + s.video_id + "' shot list");
    }
  }

  std::set<BankKind> kinds;
  for (const auto& bank : data.banks) {
    const std::string entity = "bank:" + std::string(to_string(bank.kind));
    if (!kinds.insert(bank.kind).second) report(entity, "duplicate_bank", "more than one bank of this kind");
    std::unordered_set<std::string> seen;
    for (const auto& label : bank.labels) {
      if (!seen.insert(label).second) report(entity, "duplicate_label", "label '" + label + "' repeated");
    }
    if (bank.cols != bank.labels.size()) {
      report(entity, "dimension_mismatch",
             "matrix has " + std::to_string(bank.cols) + " columns but " + std::to_string(bank.labels.size()) +
                 " labels are declared");
    }
    if (bank.rows != data.shots.size()) {
      report(entity, "row_count",
             "matrix has " + std::to_string(bank.rows) + " rows for " + std::to_string(data.shots.size()) + " shots");
    }
    if (bank.values.size() != bank.rows * bank.cols) {
      report(entity, "matrix_size", "value count does not equal rows x cols");
      continue;
    }
    for (std::size_t i = 0; i < bank.values.size(); ++i) {
      const float v = bank.values[i];
      if (!(v >= 0.0f && v <= 1.0f)) {
        report(entity, "score_range",
               "score out of [0,1] at row " + std::to_string(i / std::max<std::size_t>(bank.cols, 1)) + ", column " +
                   std::to_string(i % std::max<std::size_t>(bank.cols, 1)));
        break;
      }
    }
  }
  return out;
}

Corpus Corpus::from_data(CorpusData data) {
  const auto violations = validate_corpus(data);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw LoadError(v.entity, v.rule + ": " + v.detail);
  }
  Corpus c;
  for (std::size_t i = 0; i < data.shots.size(); ++i) c.shot_lookup_.emplace(data.shots[i].id, i);
  for (std::size_t i = 0; i < data.videos.size(); ++i) c.video_lookup_.emplace(data.videos[i].id, i);
  c.position_in_video_.assign(data.shots.size(), 0);
  for (const auto& v : data.videos) {
    for (std::size_t pos = 0; pos < v.shot_ids.size(); ++pos) c.position_in_video_[c.shot_lookup_.at(v.shot_ids[pos])] = pos;
  }
  c.built_at_ = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
  c.data_ = std::make_shared<const CorpusData>(std::move(data));
  return c;
}

std::optional<std::size_t> Corpus::shot_index(std::string_view id) const {
  auto it = shot_lookup_.find(std::string(id));
  if (it == shot_lookup_.end()) return std::nullopt;
  return it->second;
}

const Shot* Corpus::find_shot(std::string_view id) const {
  auto idx = shot_index(id);
  return idx ? &data_->shots[*idx] : nullptr;
}

const Video* Corpus::find_video(std::string_view id) const {
  auto it = video_lookup_.find(std::string(id));
  return it == video_lookup_.end() ? nullptr : &data_->videos[it->second];
}

const ScoreBank* Corpus::bank(BankKind kind) const {
  for (const auto& b : data_->banks) {
    if (b.kind == kind) return &b;
  }
  return nullptr;
}

Keyframe Corpus::keyframe(std::size_t shot_index) const {
  const Shot& s = data_->shots.at(shot_index);
  if (auto it = data_->inline_keyframes.find(s.id); it != data_->inline_keyframes.end()) return it->second;
  return read_keyframe_file(data_->base_dir / s.keyframe_ref);
}

std::vector<std::uint8_t> Corpus::keyframe_bytes(std::size_t shot_index) const {
  const Shot& s = data_->shots.at(shot_index);
  if (auto it = data_->inline_keyframes.find(s.id); it != data_->inline_keyframes.end()) return encode_keyframe(it->second);
  return read_file_bytes(data_->base_dir / s.keyframe_ref);
}

ScoreBank read_matrix_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 8) throw LoadError(path.string(), "matrix header truncated");
  ScoreBank bank;
  bank.rows = read_u32_le(bytes.data());
  bank.cols = read_u32_le(bytes.data() + 4);
  const std::size_t count = bank.rows * bank.cols;
  if (bytes.size() != 8 + count * 4) {
    throw LoadError(path.string(), "matrix payload has " + std::to_string(bytes.size() - 8) + " bytes, header implies " +
                                       std::to_string(count * 4));
  }
  bank.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    bank.values[i] = std::bit_cast<float>(read_u32_le(bytes.data() + 8 + i * 4));
  }
  return bank;
}

void write_matrix_file(const std::filesystem::path& path, const ScoreBank& bank) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_u32_le(out, static_cast<std::uint32_t>(bank.rows));
  write_u32_le(out, static_cast<std::uint32_t>(bank.cols));
  for (float v : bank.values) write_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

CorpusData read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw LoadError(path.string(), std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError(path.string(), "manifest must be a JSON object");

  CorpusData data;
  data.base_dir = path.parent_path();

  const json videos = doc.value("videos", json::array());
  if (!videos.is_array()) throw LoadError("videos", "must be an array");
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const std::string locus = "videos[" + std::to_string(i) + "]";
    Video v;
    v.id = require<std::string>(videos[i], "id", locus);
    v.duration_s = require<double>(videos[i], "duration_s", locus);
    v.title = optional_field<std::string>(videos[i], "title", locus, "");
    v.shot_ids = optional_field<std::vector<std::string>>(videos[i], "shot_ids", locus, {});
    data.videos.push_back(std::move(v));
  }

  const json shots = doc.value("shots", json::array());
  if (!shots.is_array()) throw LoadError("shots", "must be an array");
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const std::string locus = "shots[" + std::to_string(i) + "]";
    Shot s;
    s.id = require<std::string>(shots[i], "id", locus);
    s.video_id = require<std::string>(shots[i], "video_id", locus);
    s.start_s = require<double>(shots[i], "start_s", locus);
    s.end_s = require<double>(shots[i], "end_s", locus);
    s.keyframe_ref = require<std::string>(shots[i], "keyframe", locus);
    s.description = optional_field<std::string>(shots[i], "description", locus, "");
    s.speech = optional_field<std::string>(shots[i], "speech", locus, "");
    s.ocr = optional_field<std::string>(shots[i], "ocr", locus, "");
    data.shots.push_back(std::move(s));
  }

  // Videos may omit shot_ids; those lists are derived from shot start times.
  for (auto& v : data.videos) {
    if (!v.shot_ids.empty()) continue;
    std::vector<const Shot*> mine;
    for (const auto& s : data.shots) {
      if (s.video_id == v.id) mine.push_back(&s);
    }
    std::stable_sort(mine.begin(), mine.end(), [](const Shot* a, const Shot* b) { return a->start_s < b->start_s; });
    for (const Shot* s : mine) v.shot_ids.push_back(s->id);
  }

  const json banks = doc.value("banks", json::array());
  if (!banks.is_array()) throw LoadError("banks", "must be an array");
  for (std::size_t i = 0; i < banks.size(); ++i) {
    const std::string locus = "banks[" + std::to_string(i) + "]";
    const auto kind_name = require<std::string>(banks[i], "kind", locus);
    const auto kind = bank_kind_from_string(kind_name);
    if (!kind) throw LoadError(locus + ".kind", "unknown bank kind '" + kind_name + "'");
    const auto labels_file = require<std::string>(banks[i], "labels_file", locus);
    const auto matrix_file = require<std::string>(banks[i], "matrix_file", locus);
    ScoreBank bank;
    try {
      bank = read_matrix_file(data.base_dir / matrix_file);
    } catch (const LoadError& e) {
      throw LoadError(locus + ".matrix_file", e.what());
    }
    try {
      bank.labels = read_labels_file(data.base_dir / labels_file);
    } catch (const LoadError& e) {
      throw LoadError(locus + ".labels_file", e.what());
    }
    bank.kind = *kind;
    data.banks.push_back(std::move(bank));
  }
  return data;
}

Corpus load_manifest(const std::filesystem::path& path) { return Corpus::from_data(read_manifest(path)); }

std::filesystem::path write_manifest(const std::filesystem::path& dir, const CorpusData& data) {
  std::filesystem::create_directories(dir);
  json doc;
  doc["videos"] = json::array();
  for (const auto& v : data.videos) {
    doc["videos"].push_back({{"id", v.id}, {"duration_s", v.duration_s}, {"title", v.title}, {"shot_ids", v.shot_ids}});
  }
  doc["shots"] = json::array();
  bool has_inline = false;
  for (const auto& s : data.shots) {
    std::string ref = s.keyframe_ref;
    if (auto it = data.inline_keyframes.find(s.id); it != data.inline_keyframes.end()) {
      if (!has_inline) std::filesystem::create_directories(dir / "keyframes");
      has_inline = true;
      ref = "keyframes/" + s.id + ".ppm";
      write_keyframe_file(dir / ref, it->second);
    } else if (!data.base_dir.empty() && data.base_dir != dir) {
      const auto target = dir / ref;
      std::filesystem::create_directories(target.parent_path());
      std::filesystem::copy_file(data.base_dir / ref, target, std::filesystem::copy_options::overwrite_existing);
    }
    doc["shots"].push_back({{"id", s.id},
                            {"video_id", s.video_id},
                            {"start_s", s.start_s},
                            {"end_s", s.end_s},
                            {"keyframe", ref},
                            {"description", s.description},
                            {"speech", s.speech},
                            {"ocr", s.ocr}});
  }
  doc["banks"] = json::array();
  for (const auto& bank : data.banks) {
    const std::string name(to_string(bank.kind));
    const std::string labels_file = name + "_labels.txt";
    const std::string matrix_file = name + "_scores.bin";
    std::ofstream labels(dir / labels_file);
    for (const auto& l : bank.labels) labels << l << '\n';
    write_matrix_file(dir / matrix_file, bank);
    doc["banks"].push_back({{"kind", name}, {"labels_file", labels_file}, {"matrix_file", matrix_file}});
  }
  const auto path = dir / "manifest.json";
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  return path;
}

std::uint64_t corpus_fingerprint(const Corpus& corpus) {
  Fnv1a h;
  const auto& d = corpus.data();
  for (const auto& v : d.videos) {
    h.add(v.id).add(v.duration_s).add(v.title);
    for (const auto& s : v.shot_ids) h.add(s);
  }
  for (const auto& s : d.shots) {
    h.add(s.id).add(s.video_id).add(s.start_s).add(s.end_s).add(s.keyframe_ref);
    h.add(s.description).add(s.speech).add(s.ocr);
    if (auto it = d.inline_keyframes.find(s.id); it != d.inline_keyframes.end()) {
      for (const auto& px : it->second.pixels) h.add_bytes(&px, sizeof(px));
    }
  }
  for (const auto& b : d.banks) {
    h.add(to_string(b.kind)).add(b.rows).add(b.cols);
    for (const auto& l : b.labels) h.add(l);
    h.add_bytes(b.values.data(), b.values.size() * sizeof(float));
  }
  return h.value();
}

}  // namespace kis
