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

#include "kis/ranked_list.hpp"

#include <algorithm>
#include <unordered_set>

#include "kis/hash.hpp"

namespace kis {

void sort_by_score(std::vector<RankedEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.shot_id < b.shot_id;
  });
}

bool is_well_formed(const RankedList& list) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    if (i > 0 && list.entries[i].score > list.entries[i - 1].score) return false;
    if (!seen.insert(list.entries[i].shot_id).second) return false;
  }
  return true;
}

std::uint64_t result_digest(const RankedList& list) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(list.entries.size()));
  for (const auto& e : list.entries) h.add(e.shot_id).add(e.score);
  return h.value();
}

}  // namespace kis
