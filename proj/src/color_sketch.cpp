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

#include "kis/color_sketch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "detail/parallel.hpp"
#include "kis/error.hpp"

namespace kis {

namespace {

using Feature = std::array<double, 5>;

constexpr double kSameColor = 1e-6;  // deltaE below which two cluster colors coincide

Feature to_feature(double x, double y, const LabColor& c) { return {x, y, c.L / 100.0, c.a / 256.0, c.b / 256.0}; }

double squared_distance(const Feature& p, const Feature& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += (p[i] - q[i]) * (p[i] - q[i]);
  return d;
}

std::vector<Feature> sample_pixels(const Keyframe& kf, const SignatureOptions& opt) {
  const std::size_t total = kf.size();
  const auto feature_at = [&](std::size_t i) {
    const int px = static_cast<int>(i % kf.width);
    const int py = static_cast<int>(i / kf.width);
    return to_feature((px + 0.5) / kf.width, (py + 0.5) / kf.height, rgb_to_lab(kf.pixels[i]));
  };
  std::vector<Feature> out;
  if (total <= static_cast<std::size_t>(opt.sample_count)) {
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) out.push_back(feature_at(i));
    return out;
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  out.reserve(opt.sample_count);
  for (int i = 0; i < opt.sample_count; ++i) out.push_back(feature_at(pick(rng)));
  return out;
}

struct Clustering {
  std::vector<Feature> centers;
  std::vector<std::uint32_t> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

// k-means++ seeding; stops early once every sample coincides with a center.
std::vector<Feature> seed_centers(const std::vector<Feature>& samples, int k, std::mt19937_64& rng) {
  std::vector<Feature> centers;
  std::uniform_int_distribution<std::size_t> first(0, samples.size() - 1);
  centers.push_back(samples[first(rng)]);
  std::vector<double> d2(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) d2[i] = squared_distance(samples[i], centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (total <= 0.0) break;
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    std::size_t chosen = samples.size() - 1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      target -= d2[i];
      if (target < 0.0 && d2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    if (d2[chosen] <= 0.0) {
      // Floating-point residue landed on a covered sample; take the farthest.
      chosen = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    centers.push_back(samples[chosen]);
    for (std::size_t i = 0; i < samples.size(); ++i) d2[i] = std::min(d2[i], squared_distance(samples[i], centers.back()));
  }
  return centers;
}

Clustering lloyd(const std::vector<Feature>& samples, std::vector<Feature> centers, int max_iterations) {
  Clustering c;
  c.assignment.assign(samples.size(), std::numeric_limits<std::uint32_t>::max());
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::uint32_t best = 0;
      double best_d = squared_distance(samples[i], centers[0]);
      for (std::uint32_t j = 1; j < centers.size(); ++j) {
        const double d = squared_distance(samples[i], centers[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (c.assignment[i] != best) {
        c.assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Feature> sums(centers.size(), Feature{});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto& s = sums[c.assignment[i]];
      for (std::size_t d = 0; d < s.size(); ++d) s[d] += samples[i][d];
      ++counts[c.assignment[i]];
    }
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (counts[j] == 0) continue;  // empty clusters keep their center and are dropped at the end
      for (std::size_t d = 0; d < centers[j].size(); ++d) centers[j][d] = sums[j][d] / counts[j];
    }
  }
  c.inertia = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) c.inertia += squared_distance(samples[i], centers[c.assignment[i]]);
  c.centers = std::move(centers);
  return c;
}

}  // namespace

void validate(const SketchQuery& query) {
  if (query.points.empty()) throw InvalidQuery("sketch must contain at least one point");
  if (query.points.size() > static_cast<std::size_t>(kMaxSketchPoints)) {
    throw InvalidQuery("sketch has " + std::to_string(query.points.size()) + " points; at most 16 allowed");
  }
  for (const auto& p : query.points) {
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) throw InvalidQuery("sketch point outside [0,1]^2");
    if (!(std::isfinite(p.color.L) && std::isfinite(p.color.a) && std::isfinite(p.color.b))) {
      throw InvalidQuery("sketch point color is not finite");
    }
  }
}

SketchQuery sketch_from_signature(const ColorSignature& sig, SketchLevel level) {
  SketchQuery q;
  q.level = level;
  for (const auto& c : sig.centroids) {
    if (q.points.size() == static_cast<std::size_t>(kMaxSketchPoints)) break;
    q.points.push_back({c.x, c.y, c.color});
  }
  return q;
}

ColorSignature extract_signature(const Keyframe& kf, int k) {
  SignatureOptions opt;
  opt.k = k;
  return extract_signature(kf, opt);
}

ColorSignature extract_signature(const Keyframe& kf, const SignatureOptions& options) {
  if (options.k < 1) throw InvalidQuery("centroid count must be >= 1");
  if (kf.width < 1 || kf.height < 1 || kf.size() != static_cast<std::size_t>(kf.width) * kf.height) {
    throw InvalidQuery("keyframe is empty or inconsistent");
  }
  const int k = std::min(options.k, kMaxCentroids);
  const auto samples = sample_pixels(kf, options);

  Clustering best;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    std::mt19937_64 rng(options.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1));
    auto candidate = lloyd(samples, seed_centers(samples, k, rng), options.max_iterations);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }

  // Centroids are exact per-cluster means of the assigned samples.
  std::vector<Feature> sums(best.centers.size(), Feature{});
  std::vector<std::size_t> counts(best.centers.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& s = sums[best.assignment[i]];
    for (std::size_t d = 0; d < s.size(); ++d) s[d] += samples[i][d];
    ++counts[best.assignment[i]];
  }
  ColorSignature sig;
  const double n = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < sums.size(); ++j) {
    if (counts[j] == 0) continue;
    const double m = static_cast<double>(counts[j]);
    SignatureCentroid c;
    c.x = std::clamp(sums[j][0] / m, 0.0, 1.0);
    c.y = std::clamp(sums[j][1] / m, 0.0, 1.0);
    c.color = {std::clamp(sums[j][2] / m * 100.0, 0.0, 100.0), sums[j][3] / m * 256.0, sums[j][4] / m * 256.0};
    c.weight = m / n;
    // Clusters of one color are duplicates: a flat region split only by
    // position. They merge into one centroid at their weighted mean position.
    auto dup = std::find_if(sig.centroids.begin(), sig.centroids.end(), [&](const SignatureCentroid& o) {
      return delta_e76(o.color, c.color) < kSameColor;
    });
    if (dup != sig.centroids.end()) {
      const double w = dup->weight + c.weight;
      dup->x = (dup->x * dup->weight + c.x * c.weight) / w;
      dup->y = (dup->y * dup->weight + c.y * c.weight) / w;
      dup->weight = w;
    } else {
      sig.centroids.push_back(c);
    }
  }
  std::sort(sig.centroids.begin(), sig.centroids.end(), [](const SignatureCentroid& a, const SignatureCentroid& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.color.L < b.color.L;
  });
  return sig;
}

double score_sketch(const SketchQuery& query, const ColorSignature& sig, double alpha) {
  double total = 0.0;
  for (const auto& p : query.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : sig.centroids) {
      const double spatial = std::hypot(p.x - c.x, p.y - c.y);
      const double cost = alpha * spatial + delta_e76(p.color, c.color) / 100.0;
      best = std::min(best, cost);
    }
    total += best;
  }
  return total;
}

Palette::Palette(int levels_per_channel) : levels_(levels_per_channel) {
  if (levels_ < 2 || levels_ > 16) throw InvalidQuery("palette levels must be within [2,16]");
  for (int r = 0; r < levels_; ++r) {
    for (int g = 0; g < levels_; ++g) {
      for (int b = 0; b < levels_; ++b) {
        auto level = [&](int i) { return static_cast<std::uint8_t>(std::lround(i * 255.0 / (levels_ - 1))); };
        const Rgb rgb{level(r), level(g), level(b)};
        entries_.push_back({rgb, rgb_to_lab(rgb)});
      }
    }
  }
}

std::size_t Palette::nearest(const LabColor& c) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double d = delta_e76(c, entries_[i].lab);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t ColorIndex::cell_of(double x, double y) const {
  auto axis = [&](double v) {
    const int i = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * grid_));
    return static_cast<std::size_t>(std::min(i, grid_ - 1));
  };
  return axis(y) * static_cast<std::size_t>(grid_) + axis(x);
}

std::span<const std::uint16_t> ColorIndex::centroid_bins(std::size_t shot_index) const {
  return {bins_.data() + bin_offsets_[shot_index], bin_offsets_[shot_index + 1] - bin_offsets_[shot_index]};
}

ColorIndex ColorIndex::from_signatures(std::vector<ColorSignature> signatures, int grid, int palette_levels,
                                       bool recommendation_enabled) {
  if (grid < 1) throw InvalidQuery("grid must be >= 1");
  ColorIndex idx(palette_levels);
  idx.grid_ = grid;
  idx.recommendation_enabled_ = recommendation_enabled;
  idx.signatures_ = std::move(signatures);
  const std::size_t cells = static_cast<std::size_t>(grid) * grid;
  idx.histograms_.assign(cells * idx.palette_.size(), 0);
  idx.cell_totals_.assign(cells, 0);
  idx.bin_offsets_.push_back(0);
  for (const auto& sig : idx.signatures_) {
    for (const auto& c : sig.centroids) {
      const auto bin = idx.palette_.nearest(c.color);
      const auto cell = idx.cell_of(c.x, c.y);
      ++idx.histograms_[cell * idx.palette_.size() + bin];
      ++idx.cell_totals_[cell];
      idx.bins_.push_back(static_cast<std::uint16_t>(bin));
    }
    idx.bin_offsets_.push_back(idx.bins_.size());
  }
  return idx;
}

ColorIndex build_color_index(const Corpus& corpus, const ColorIndexOptions& options) {
  std::vector<ColorSignature> signatures(corpus.shot_count());
  detail::parallel_for(
      corpus.shot_count(),
      [&](std::size_t i) {
        const auto& shot = corpus.shot(i);
        Keyframe kf;
        try {
          kf = corpus.keyframe(i);
        } catch (const Error& e) {
          throw LoadError(shot.id, std::string("undecodable keyframe: ") + e.what());
        }
        signatures[i] = extract_signature(kf, options.signature);
        signatures[i].shot_id = shot.id;
      },
      16);
  return ColorIndex::from_signatures(std::move(signatures), options.grid, options.palette_levels,
                                     options.recommendation_enabled);
}

RankedList rank_by_sketch(const SketchQuery& query, const ColorIndex& index, const Corpus& corpus, double alpha) {
  validate(query);
  if (index.size() != corpus.shot_count()) {
    throw InvalidQuery("color index covers " + std::to_string(index.size()) + " shots but corpus has " +
                       std::to_string(corpus.shot_count()));
  }
  const std::size_t n = corpus.shot_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (index.signature(i).shot_id != corpus.shot(i).id) {
      throw InvalidQuery("color index does not match corpus at shot '" + corpus.shot(i).id + "'");
    }
  }

  std::vector<double> dissimilarity(n);
  detail::parallel_for(n, [&](std::size_t i) { dissimilarity[i] = score_sketch(query, index.signature(i), alpha); }, 2048);

  if (query.level == SketchLevel::shot) {
    std::vector<double> pooled(dissimilarity);
    for (const auto& video : corpus.videos()) {
      const auto& ids = video.shot_ids;
      for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        const std::size_t self = *corpus.shot_index(ids[pos]);
        double best = dissimilarity[self];
        if (pos > 0) best = std::min(best, dissimilarity[*corpus.shot_index(ids[pos - 1])]);
        if (pos + 1 < ids.size()) best = std::min(best, dissimilarity[*corpus.shot_index(ids[pos + 1])]);
        pooled[self] = best;
      }
    }
    dissimilarity = std::move(pooled);
  }

  RankedList out;
  out.provenance = "sketch";
  out.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.entries.push_back({corpus.shot(i).id, 1.0 / (1.0 + dissimilarity[i])});
  sort_by_score(out.entries);
  return out;
}

std::vector<ColorRecommendation> recommend_colors(double x, double y, const ColorIndex& index, std::size_t n) {
  if (!index.recommendation_enabled()) return {};
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) throw InvalidQuery("recommendation coordinates outside [0,1]");
  const auto cell = index.cell_of(x, y);
  const auto hist = index.cell_histogram(cell);
  const double total = static_cast<double>(index.cell_total(cell));
  std::vector<std::size_t> bins;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] > 0) bins.push_back(i);
  }
  std::stable_sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t b) { return hist[a] > hist[b]; });
  if (bins.size() > n) bins.resize(n);
  std::vector<ColorRecommendation> out;
  for (auto b : bins) {
    out.push_back({b, index.palette()[b].rgb, index.palette()[b].lab, hist[b] / total});
  }
  return out;
}

namespace {

constexpr char kCacheMagic[8] = {'K', 'I', 'S', 'C', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("color index cache truncated");
  return v;
}

}  // namespace

void save_color_index(const std::filesystem::path& path, const ColorIndex& index, std::uint64_t corpus_fp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  put(out, kCacheVersion);
  put(out, corpus_fp);
  put(out, static_cast<std::uint32_t>(index.grid()));
  put(out, static_cast<std::uint32_t>(index.palette().levels()));
  put(out, static_cast<std::uint8_t>(index.recommendation_enabled()));
  put(out, static_cast<std::uint64_t>(index.size()));
  for (const auto& sig : index.signatures()) {
    put(out, static_cast<std::uint32_t>(sig.shot_id.size()));
    out.write(sig.shot_id.data(), static_cast<std::streamsize>(sig.shot_id.size()));
    put(out, static_cast<std::uint32_t>(sig.centroids.size()));
    for (const auto& c : sig.centroids) {
      for (double v : {c.x, c.y, c.color.L, c.color.a, c.color.b, c.weight}) put(out, v);
    }
  }
}

ColorIndex load_color_index(const std::filesystem::path& path, std::uint64_t expected_corpus_fp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw Error(path.string() + ": not a color index cache");
  }
  if (const auto version = get<std::uint32_t>(in); version != kCacheVersion) {
    throw Error(path.string() + ": unsupported cache version " + std::to_string(version));
  }
  if (get<std::uint64_t>(in) != expected_corpus_fp) throw Error(path.string() + ": cache built for a different corpus");
  const auto grid = static_cast<int>(get<std::uint32_t>(in));
  const auto levels = static_cast<int>(get<std::uint32_t>(in));
  const bool enabled = get<std::uint8_t>(in) != 0;
  const auto count = get<std::uint64_t>(in);
  std::vector<ColorSignature> sigs(count);
  for (auto& sig : sigs) {
    sig.shot_id.resize(get<std::uint32_t>(in));
    if (!in.read(sig.shot_id.data(), static_cast<std::streamsize>(sig.shot_id.size()))) throw Error("cache truncated");
    sig.centroids.resize(get<std::uint32_t>(in));
    for (auto& c : sig.centroids) {
      c.x = get<double>(in);
      c.y = get<double>(in);
      c.color.L = get<double>(in);
      c.color.a = get<double>(in);
      c.color.b = get<double>(in);
      c.weight = get<double>(in);
    }
  }
  return ColorIndex::from_signatures(std::move(sigs), grid, levels, enabled);
}

}  // namespace kis
