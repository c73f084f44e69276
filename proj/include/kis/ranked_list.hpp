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

#include <cstdint>
#include <string>
#include <vector>

namespace kis {

struct RankedEntry {
  std::string shot_id;
  double score = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Ordered shot ids with scores. Scores are non-increasing and ids unique.
/// `provenance` tags the modality (or pipeline stage) that produced the list.
struct RankedList {
  std::vector<RankedEntry> entries;
  std::string provenance;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

/// Sorts by descending score, ties broken by ascending shot id.
void sort_by_score(std::vector<RankedEntry>& entries);

/// True when scores are non-increasing and shot ids are unique.
bool is_well_formed(const RankedList& list);

/// Digest over ids and exact score bits; equal digests mean bit-identical lists.
std::uint64_t result_digest(const RankedList& list);

}  // namespace kis
