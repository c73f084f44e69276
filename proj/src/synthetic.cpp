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

#include "kis/synthetic.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

#include "kis/hash.hpp"

namespace kis {

namespace {

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "red",    "car",     "street", "night",  "city",   "person", "walking", "dog",     "beach",  "ocean",
      "sunset", "forest",  "tree",   "snow",   "mountain", "river", "boat",   "bridge",  "crowd",  "stadium",
      "music",  "concert", "guitar", "kitchen", "cooking", "food",  "table",  "window",  "office", "computer",
      "news",   "anchor",  "studio", "interview", "child", "school", "bicycle", "train", "station", "airport",
      "plane",  "sky",     "cloud",  "rain",   "umbrella", "market", "shop",  "sign",    "text",   "logo"};
  return words;
}

const std::vector<std::string>& concept_words() {
  static const std::vector<std::string> words = {
      "person", "indoor", "outdoor", "vehicle", "car", "dog", "cat", "building", "sky", "water",
      "tree", "crowd", "face", "text_overlay", "night", "snow", "beach", "road", "animal", "food",
      "sports", "music", "kitchen", "office"};
  return words;
}

std::string sentence(std::mt19937_64& rng, int min_words, int max_words) {
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocabulary().size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += vocabulary()[pick(rng)];
  }
  return out;
}

Rgb random_color(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(0, 255);
  return {static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng))};
}

Keyframe block_keyframe(std::mt19937_64& rng, int w, int h) {
  Keyframe kf(w, h, random_color(rng));
  std::uniform_int_distribution<int> blocks(2, 4);
  const int n = blocks(rng);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> x0(0, w - 2), y0(0, h - 2);
    const int left = x0(rng), top = y0(rng);
    std::uniform_int_distribution<int> bw(std::max(1, w / 6), std::max(1, w / 2));
    std::uniform_int_distribution<int> bh(std::max(1, h / 6), std::max(1, h / 2));
    const int right = std::min(w, left + bw(rng)), bottom = std::min(h, top + bh(rng));
    const Rgb color = random_color(rng);
    for (int y = top; y < bottom; ++y) {
      for (int x = left; x < right; ++x) kf.at(x, y) = color;
    }
  }
  return kf;
}

void make_gray(Keyframe& kf) {
  for (auto& p : kf.pixels) {
    const auto v = static_cast<std::uint8_t>((299 * p.r + 587 * p.g + 114 * p.b) / 1000);
    p = {v, v, v};
  }
}

void add_letterbox(Keyframe& kf, int bar) {
  for (int y = 0; y < kf.height; ++y) {
    if (y >= bar && y < kf.height - bar) continue;
    for (int x = 0; x < kf.width; ++x) kf.at(x, y) = {0, 0, 0};
  }
  // Keep the picture area clear of near-black rows so the bar width is exact.
  for (int y = bar; y < kf.height - bar; ++y) {
    for (int x = 0; x < kf.width; ++x) {
      auto& p = kf.at(x, y);
      if (0.299 * p.r + 0.587 * p.g + 0.114 * p.b <= 40.0) p = {static_cast<std::uint8_t>(p.r + 60), static_cast<std::uint8_t>(p.g + 60), static_cast<std::uint8_t>(p.b + 60)};
    }
  }
}

std::uint64_t keyframe_hash(const Keyframe& kf) {
  Fnv1a h;
  h.add(kf.width).add(kf.height);
  h.add_bytes(kf.pixels.data(), kf.pixels.size() * sizeof(Rgb));
  return h.value();
}

}  // namespace

std::vector<std::string> synthetic_labels(std::size_t count, const std::string& stem) {
  std::vector<std::string> out;
  const auto& words = concept_words();
  for (std::size_t i = 0; i < count; ++i) {
    if (stem.empty() && i < words.size()) {
      out.push_back(words[i]);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s%03zu", stem.empty() ? "concept_" : stem.c_str(), i);
      out.push_back(buf);
    }
  }
  return out;
}

CorpusData make_synthetic_corpus(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  CorpusData data;
  std::unordered_set<std::uint64_t> seen;
  std::uniform_real_distribution<double> duration(8.0, 14.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int v = 0; v < options.videos; ++v) {
    char vid[16];
    std::snprintf(vid, sizeof(vid), "v%03d", v);
    Video video;
    video.id = vid;
    video.title = "Synthetic video " + std::to_string(v);
    double t = 0.0;
    for (int s = 0; s < options.shots_per_video; ++s) {
      char sid[24];
      std::snprintf(sid, sizeof(sid), "v%03d_s%03d", v, s);
      Shot shot;
      shot.id = sid;
      shot.video_id = video.id;
      shot.start_s = t;
      t += std::round(duration(rng) * 10.0) / 10.0;
      shot.end_s = t;
      shot.keyframe_ref = "keyframes/" + shot.id + ".ppm";
      if (options.text) {
        shot.description = sentence(rng, 3, 8);
        shot.speech = unit(rng) < 0.7 ? sentence(rng, 2, 12) : "";
        shot.ocr = unit(rng) < 0.3 ? sentence(rng, 1, 3) : "";
      }
      Keyframe kf;
      do {
        kf = block_keyframe(rng, options.keyframe_width, options.keyframe_height);
        if (unit(rng) < options.black_and_white_share) make_gray(kf);
        if (unit(rng) < options.letterbox_share) add_letterbox(kf, std::max(4, options.keyframe_height / 6));
      } while (!seen.insert(keyframe_hash(kf)).second);
      data.inline_keyframes.emplace(shot.id, std::move(kf));
      video.shot_ids.push_back(shot.id);
      data.shots.push_back(std::move(shot));
    }
    video.duration_s = t;
    data.videos.push_back(std::move(video));
  }

  auto make_bank = [&](BankKind kind, std::size_t cols, const std::string& stem) {
    ScoreBank bank;
    bank.kind = kind;
    bank.labels = synthetic_labels(cols, stem);
    bank.rows = data.shots.size();
    bank.cols = cols;
    bank.values.resize(bank.rows * cols);
    for (auto& value : bank.values) {
      // About a third of entries are exact zeros, as detector outputs often are.
      value = unit(rng) < 0.3 ? 0.0f : static_cast<float>(unit(rng));
    }
    return bank;
  };
  if (options.concept_labels > 0) data.banks.push_back(make_bank(BankKind::concepts, options.concept_labels, ""));
  if (options.object_labels > 0) data.banks.push_back(make_bank(BankKind::objects, options.object_labels, "object_"));
  return data;
}

}  // namespace kis
