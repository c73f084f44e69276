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

#include "kis/shot_filters.hpp"

#include <algorithm>
#include <vector>

#include "detail/parallel.hpp"
#include "kis/error.hpp"

namespace kis {

namespace {

bool is_dark(const Rgb& p, int luma_threshold) {
  return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b <= static_cast<double>(luma_threshold);
}

// Length of the run of consecutive bar lines starting at the edge.
template <typename LineIsBar>
int edge_run(int lines, LineIsBar&& is_bar) {
  int run = 0;
  while (run < lines / 2 && is_bar(run)) ++run;
  return run;
}

}  // namespace

bool is_black_and_white(const Keyframe& kf, int chroma_threshold, double pixel_fraction) {
  if (kf.pixels.empty()) return false;
  std::size_t gray = 0;
  for (const auto& p : kf.pixels) {
    const int hi = std::max({p.r, p.g, p.b});
    const int lo = std::min({p.r, p.g, p.b});
    if (hi - lo <= chroma_threshold) ++gray;
  }
  return static_cast<double>(gray) >= pixel_fraction * static_cast<double>(kf.pixels.size());
}

BorderWidths detect_black_border(const Keyframe& kf, int luma_threshold, double row_fraction) {
  const int w = kf.width, h = kf.height;
  auto row_is_bar = [&](int y) {
    int dark = 0;
    for (int x = 0; x < w; ++x) dark += is_dark(kf.at(x, y), luma_threshold) ? 1 : 0;
    return dark >= row_fraction * w;
  };
  auto col_is_bar = [&](int x) {
    int dark = 0;
    for (int y = 0; y < h; ++y) dark += is_dark(kf.at(x, y), luma_threshold) ? 1 : 0;
    return dark >= row_fraction * h;
  };
  BorderWidths b;
  b.top = edge_run(h, [&](int i) { return row_is_bar(i); });
  b.bottom = edge_run(h, [&](int i) { return row_is_bar(h - 1 - i); });
  b.left = edge_run(w, [&](int i) { return col_is_bar(i); });
  b.right = edge_run(w, [&](int i) { return col_is_bar(w - 1 - i); });
  return b;
}

FilterVerdict compute_verdict(const std::string& shot_id, const Keyframe& kf, const FilterThresholds& t) {
  return {shot_id, is_black_and_white(kf, t.chroma_threshold, t.bw_fraction),
          detect_black_border(kf, t.luma_threshold, t.border_fraction)};
}

VerdictMap compute_verdicts(const Corpus& corpus, const FilterThresholds& t) {
  std::vector<FilterVerdict> verdicts(corpus.shot_count());
  detail::parallel_for(
      corpus.shot_count(),
      [&](std::size_t i) {
        const auto& id = corpus.shot(i).id;
        Keyframe kf;
        try {
          kf = corpus.keyframe(i);
        } catch (const Error& e) {
          throw LoadError(id, std::string("undecodable keyframe: ") + e.what());
        }
        verdicts[i] = compute_verdict(id, kf, t);
      },
      64);
  VerdictMap out;
  out.reserve(verdicts.size());
  for (auto& v : verdicts) out.emplace(v.shot_id, std::move(v));
  return out;
}

RankedList apply_filters(const RankedList& list, const FilterFlags& flags, const VerdictMap& verdicts, int border_min) {
  RankedList out;
  out.provenance = list.provenance;
  if (!flags.drop_black_and_white && !flags.drop_black_bordered) {
    for (const auto& e : list.entries) {
      if (!verdicts.contains(e.shot_id)) throw InvalidQuery("no filter verdict for shot '" + e.shot_id + "'");
    }
    out.entries = list.entries;
    return out;
  }
  out.entries.reserve(list.entries.size());
  for (const auto& e : list.entries) {
    auto it = verdicts.find(e.shot_id);
    if (it == verdicts.end()) throw InvalidQuery("no filter verdict for shot '" + e.shot_id + "'");
    const auto& v = it->second;
    if (flags.drop_black_and_white && v.is_bw) continue;
    if (flags.drop_black_bordered && v.border.max() >= border_min) continue;
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace kis
