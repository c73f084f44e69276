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

// Generated keyframes for the black-and-white and black-border detectors.
#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "kis/corpus.hpp"

namespace kis::testing {

struct FilterCase {
  std::string category;
  Keyframe frame;
};

inline std::uint8_t clamp8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

// Bright, colorful content: every pixel has luma well above any bar threshold.
inline Rgb bright_color(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(70, 255);
  return {clamp8(c(rng)), clamp8(c(rng)), clamp8(c(rng))};
}

inline Keyframe content(std::mt19937_64& rng, int w, int h) {
  Keyframe kf(w, h);
  for (auto& p : kf.pixels) p = bright_color(rng);
  return kf;
}

// Per category `per_category` images: gray, tinted gray within the chroma
// threshold, colorful, gray with a color fraction straddling 98%, letterbox,
// pillarbox, boxed, noisy bars, dark scenes without bars.
inline std::vector<FilterCase> filter_suite(std::uint64_t seed, int per_category) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(24, 96), level(0, 255), jitter(-6, 6);
  std::vector<FilterCase> out;
  for (int i = 0; i < per_category; ++i) {
    const int w = dim(rng), h = dim(rng);

    Keyframe gray(w, h);
    for (auto& p : gray.pixels) {
      const auto v = clamp8(level(rng));
      p = {v, v, v};
    }
    out.push_back({"gray", gray});

    Keyframe tinted(w, h);
    for (auto& p : tinted.pixels) {
      const int v = std::uniform_int_distribution<int>(10, 245)(rng);
      p = {clamp8(v + jitter(rng)), clamp8(v + jitter(rng)), clamp8(v + jitter(rng))};
    }
    out.push_back({"tinted_gray", tinted});

    out.push_back({"color", content(rng, w, h)});

    // Colored share between 0.5% and 4%: either side of the 2% allowance.
    Keyframe mixed = gray;
    const double share = std::uniform_real_distribution<double>(0.005, 0.04)(rng);
    const auto n = static_cast<std::size_t>(share * static_cast<double>(mixed.size()));
    for (std::size_t k = 0; k < n; ++k) mixed.pixels[rng() % mixed.size()] = {255, 0, 0};
    out.push_back({"mostly_gray", mixed});

    auto bars = [&](Keyframe kf, int top, int bottom, int left, int right, double noise) {
      for (int y = 0; y < kf.height; ++y) {
        for (int x = 0; x < kf.width; ++x) {
          if (y < top || y >= kf.height - bottom || x < left || x >= kf.width - right) {
            const int v = std::uniform_int_distribution<int>(0, 12)(rng);
            kf.at(x, y) = {clamp8(v), clamp8(v), clamp8(v)};
            if (std::uniform_real_distribution<double>(0, 1)(rng) < noise) kf.at(x, y) = bright_color(rng);
          }
        }
      }
      return kf;
    };
    std::uniform_int_distribution<int> bar_h(1, h / 4), bar_w(1, w / 4);
    out.push_back({"letterbox", bars(content(rng, w, h), bar_h(rng), bar_h(rng), 0, 0, 0.0)});
    out.push_back({"pillarbox", bars(content(rng, w, h), 0, 0, bar_w(rng), bar_w(rng), 0.0)});
    out.push_back({"boxed", bars(content(rng, w, h), bar_h(rng), bar_h(rng), bar_w(rng), bar_w(rng), 0.0)});
    out.push_back({"noisy_bars", bars(content(rng, w, h), bar_h(rng), bar_h(rng), 0, 0, 0.01)});

    // Dark scene with no bars: dark pixels everywhere but under 95% per line.
    Keyframe dark(w, h);
    for (auto& p : dark.pixels) {
      p = std::uniform_real_distribution<double>(0, 1)(rng) < 0.9 ? Rgb{5, 5, 5} : bright_color(rng);
    }
    out.push_back({"dark_scene", dark});
  }
  return out;
}

}  // namespace kis::testing
