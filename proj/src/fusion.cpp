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

#include "kis/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "kis/error.hpp"

namespace kis {

RankedList fuse(std::span<const FusionInput> lists, double k) {
  if (!(k > 0.0)) throw InvalidQuery("fusion constant k must be positive");
  if (lists.empty()) throw InvalidQuery("fusion needs at least one list");
  bool any_positive = false;
  for (const auto& in : lists) {
    if (!(in.weight >= 0.0) || !std::isfinite(in.weight)) throw InvalidQuery("fusion weights must be nonnegative");
    any_positive = any_positive || in.weight > 0.0;
    if (!is_well_formed(in.list.get())) {
      throw InvalidQuery("fusion input '" + in.list.get().provenance + "' is not a ranked list");
    }
  }
  if (!any_positive) throw InvalidQuery("at least one fusion weight must be positive");

  std::unordered_map<std::string_view, double> scores;
  for (const auto& in : lists) {
    if (in.weight == 0.0) continue;
    const auto& entries = in.list.get().entries;
    for (std::size_t r = 0; r < entries.size(); ++r) {
      scores[entries[r].shot_id] += in.weight / (k + static_cast<double>(r + 1));
    }
  }
  RankedList out;
  out.provenance = "fused";
  out.entries.reserve(scores.size());
  for (const auto& [id, score] : scores) out.entries.push_back({std::string(id), score});
  sort_by_score(out.entries);
  return out;
}

FeedbackFeatures::FeedbackFeatures(const Corpus& corpus, const ColorIndex& index) {
  if (index.size() != corpus.shot_count()) throw InvalidQuery("color index does not match corpus");
  concept_bank_ = corpus.bank(BankKind::concepts);
  const std::size_t n = corpus.shot_count();
  const std::size_t palette = index.palette().size();
  palette_dimension_ = static_cast<std::size_t>(index.grid()) * index.grid() * palette;

  concept_norms_.assign(n, 0.0);
  if (concept_bank_ != nullptr) {
    for (std::size_t s = 0; s < n; ++s) {
      double sq = 0.0;
      for (float v : concept_bank_->row(s)) sq += static_cast<double>(v) * v;
      concept_norms_[s] = std::sqrt(sq);
    }
  }

  palette_blocks_.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& sig = index.signature(s);
    const auto bins = index.centroid_bins(s);
    std::map<std::uint32_t, double> mass;
    for (std::size_t c = 0; c < sig.centroids.size(); ++c) {
      const auto& centroid = sig.centroids[c];
      const auto key = static_cast<std::uint32_t>(index.cell_of(centroid.x, centroid.y) * palette + bins[c]);
      mass[key] += centroid.weight;
    }
    double sq = 0.0;
    for (const auto& [k, v] : mass) sq += v * v;
    const double norm = std::sqrt(sq);
    auto& block = palette_blocks_[s];
    if (norm == 0.0) continue;
    for (const auto& [k, v] : mass) {
      block.keys.push_back(k);
      block.values.push_back(v / norm);
    }
  }
}

double FeedbackFeatures::similarity(std::size_t a, std::size_t b) const {
  double dot = 0.0;
  double blocks_a = 0.0, blocks_b = 0.0;
  if (concept_bank_ != nullptr && concept_norms_[a] > 0.0 && concept_norms_[b] > 0.0) {
    const auto ra = concept_bank_->row(a);
    const auto rb = concept_bank_->row(b);
    double d = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) d += static_cast<double>(ra[i]) * rb[i];
    dot += d / (concept_norms_[a] * concept_norms_[b]);
  }
  if (concept_bank_ != nullptr) {
    blocks_a += concept_norms_[a] > 0.0 ? 1.0 : 0.0;
    blocks_b += concept_norms_[b] > 0.0 ? 1.0 : 0.0;
  }
  const auto& pa = palette_blocks_[a];
  const auto& pb = palette_blocks_[b];
  blocks_a += pa.keys.empty() ? 0.0 : 1.0;
  blocks_b += pb.keys.empty() ? 0.0 : 1.0;
  for (std::size_t i = 0, j = 0; i < pa.keys.size() && j < pb.keys.size();) {
    if (pa.keys[i] < pb.keys[j]) {
      ++i;
    } else if (pb.keys[j] < pa.keys[i]) {
      ++j;
    } else {
      dot += pa.values[i++] * pb.values[j++];
    }
  }
  if (blocks_a == 0.0 || blocks_b == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(blocks_a * blocks_b), 0.0, 1.0);
}

std::vector<double> FeedbackFeatures::dense_vector(std::size_t shot) const {
  std::vector<double> out;
  if (concept_bank_ != nullptr) {
    for (float v : concept_bank_->row(shot)) {
      out.push_back(concept_norms_[shot] > 0.0 ? v / concept_norms_[shot] : 0.0);
    }
  }
  const std::size_t offset = out.size();
  out.resize(offset + palette_dimension_, 0.0);
  const auto& block = palette_blocks_[shot];
  for (std::size_t i = 0; i < block.keys.size(); ++i) out[offset + block.keys[i]] = block.values[i];
  return out;
}

RankedList feedback_rerank(const RankedList& base, std::span<const std::string> positives, const Corpus& corpus,
                           const FeedbackFeatures& features, double lambda) {
  if (base.empty()) throw InvalidQuery("feedback needs a nonempty result list");
  if (positives.empty()) throw InvalidQuery("feedback needs at least one positive shot");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidQuery("feedback lambda must be within [0,1]");

  std::vector<std::size_t> positive_rows;
  std::unordered_set<std::string_view> positive_ids;
  for (const auto& id : positives) {
    const auto row = corpus.shot_index(id);
    if (!row) throw InvalidQuery("unknown positive shot '" + id + "'");
    if (positive_ids.insert(id).second) positive_rows.push_back(*row);
  }

  double lo = base.entries.front().score, hi = lo;
  for (const auto& e : base.entries) {
    lo = std::min(lo, e.score);
    hi = std::max(hi, e.score);
  }

  std::vector<std::string> pinned;
  std::vector<RankedEntry> rest;
  for (const auto& e : base.entries) {
    if (positive_ids.contains(e.shot_id)) {
      pinned.push_back(e.shot_id);
      continue;
    }
    const auto row = corpus.shot_index(e.shot_id);
    if (!row) throw InvalidQuery("result list references unknown shot '" + e.shot_id + "'");
    double sim = 0.0;
    for (auto p : positive_rows) sim = std::max(sim, features.similarity(*row, p));
    const double normalized = hi > lo ? (e.score - lo) / (hi - lo) : 1.0;
    rest.push_back({e.shot_id, lambda * normalized + (1.0 - lambda) * sim});
  }
  std::vector<std::string> absent;
  for (const auto& id : positive_ids) {
    if (std::find(pinned.begin(), pinned.end(), id) == pinned.end()) absent.emplace_back(id);
  }
  std::sort(absent.begin(), absent.end());
  pinned.insert(pinned.end(), absent.begin(), absent.end());
  sort_by_score(rest);

  RankedList out;
  out.provenance = "feedback";
  const double count = static_cast<double>(pinned.size());
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    // Pinned scores lie strictly above 1, the ceiling of every mixed score.
    out.entries.push_back({pinned[i], 1.0 + (count - static_cast<double>(i)) / count});
  }
  out.entries.insert(out.entries.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace kis
