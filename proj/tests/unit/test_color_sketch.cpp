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

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kis/color.hpp"
#include "kis/color_sketch.hpp"
#include "kis/error.hpp"
#include "kis/synthetic.hpp"
#include "oracles.hpp"

namespace kis {
namespace {

using testing::TempDir;

void expect_lab_near(const LabColor& got, const LabColor& want, double tol) {
  EXPECT_NEAR(got.L, want.L, tol);
  EXPECT_NEAR(got.a, want.a, tol);
  EXPECT_NEAR(got.b, want.b, tol);
}

TEST(Lab, ReferencePoints) {
  expect_lab_near(rgb_to_lab(255, 255, 255), {100, 0, 0}, 1e-3);
  expect_lab_near(rgb_to_lab(0, 0, 0), {0, 0, 0}, 1e-12);
  // Published sRGB primaries under D65.
  expect_lab_near(rgb_to_lab(255, 0, 0), {53.2408, 80.0925, 67.2032}, 1e-3);
  expect_lab_near(rgb_to_lab(0, 255, 0), {87.7347, -86.1827, 83.1793}, 1e-3);
  expect_lab_near(rgb_to_lab(0, 0, 255), {32.2970, 79.1875, -107.8602}, 1e-3);
}

TEST(Lab, MatchesIndependentConverter) {
  for (int r = 0; r < 256; r += 5) {
    for (int g = 0; g < 256; g += 5) {
      for (int b = 0; b < 256; b += 5) {
        const LabColor got = rgb_to_lab(r, g, b);
        expect_lab_near(got, oracle::lab(r, g, b), 1e-6);
        ASSERT_GE(got.L, 0.0);
        ASSERT_LE(got.L, 100.0 + 1e-5);  // the sRGB matrix row for Y sums to 1.0000001
      }
    }
  }
}

TEST(Lab, InverseRecoversEightBitColors) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 255);
  for (int i = 0; i < 5000; ++i) {
    const Rgb x{static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng))};
    EXPECT_EQ(lab_to_rgb(rgb_to_lab(x)), x);
  }
}

TEST(Lab, DeltaE) {
  EXPECT_NEAR(delta_e76(rgb_to_lab(0, 0, 0), rgb_to_lab(255, 255, 255)), 100.0, 1e-3);
  EXPECT_DOUBLE_EQ(delta_e76({50, 3, 4}, {50, 0, 0}), 5.0);
}

double weight_sum(const ColorSignature& s) {
  return std::accumulate(s.centroids.begin(), s.centroids.end(), 0.0,
                         [](double acc, const SignatureCentroid& c) { return acc + c.weight; });
}

TEST(Signature, UniformImageCollapsesToOneCentroid) {
  const auto sig = extract_signature(Keyframe(64, 64, {255, 0, 0}), 4);
  ASSERT_EQ(sig.centroids.size(), 1u);
  EXPECT_NEAR(sig.centroids[0].x, 0.5, 0.02);
  EXPECT_NEAR(sig.centroids[0].y, 0.5, 0.02);
  EXPECT_NEAR(sig.centroids[0].weight, 1.0, 1e-12);
  expect_lab_near(sig.centroids[0].color, oracle::lab(255, 0, 0), 1e-6);
}

TEST(Signature, HalvesSplitByColor) {
  Keyframe kf(64, 64, {0, 0, 0});
  for (int y = 0; y < 64; ++y) {
    for (int x = 32; x < 64; ++x) kf.at(x, y) = {255, 255, 255};
  }
  auto sig = extract_signature(kf, 2);
  ASSERT_EQ(sig.centroids.size(), 2u);
  std::sort(sig.centroids.begin(), sig.centroids.end(), [](auto& a, auto& b) { return a.x < b.x; });
  EXPECT_NEAR(sig.centroids[0].x, 0.25, 0.02);
  EXPECT_NEAR(sig.centroids[1].x, 0.75, 0.02);
  EXPECT_NEAR(sig.centroids[0].weight, 0.5, 0.05);
  EXPECT_NEAR(sig.centroids[1].weight, 0.5, 0.05);
  EXPECT_NEAR(sig.centroids[0].color.L, 0.0, 1e-6);
  EXPECT_NEAR(sig.centroids[1].color.L, 100.0, 1e-3);
}

TEST(Signature, QuadrantsMatchExhaustiveMeans) {
  const Rgb colors[4] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 0}};
  Keyframe kf(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) kf.at(x, y) = colors[(y >= 32) * 2 + (x >= 32)];
  }
  // Oracle: mean normalized position and color of every pixel per quadrant.
  struct Mean {
    double x = 0, y = 0;
    LabColor lab;
    double n = 0;
  };
  Mean means[4];
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      auto& m = means[(y >= 32) * 2 + (x >= 32)];
      m.x += (x + 0.5) / 64;
      m.y += (y + 0.5) / 64;
      m.n += 1;
    }
  }
  const auto sig = extract_signature(kf, 4);
  ASSERT_EQ(sig.centroids.size(), 4u);
  for (int q = 0; q < 4; ++q) {
    const LabColor want = oracle::lab(colors[q].r, colors[q].g, colors[q].b);
    auto it = std::find_if(sig.centroids.begin(), sig.centroids.end(),
                           [&](const SignatureCentroid& c) { return delta_e76(c.color, want) < 0.5; });
    ASSERT_NE(it, sig.centroids.end()) << "quadrant " << q;
    EXPECT_NEAR(it->x, means[q].x / means[q].n, 0.1);
    EXPECT_NEAR(it->y, means[q].y / means[q].n, 0.1);
    EXPECT_NEAR(it->weight, 0.25, 0.05);
  }
}

TEST(Signature, InvariantsOnRandomImages) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 70), kk(1, 20);
  for (int i = 0; i < 60; ++i) {
    const Keyframe kf = testing::random_keyframe(rng, dim(rng), dim(rng));
    const int k = kk(rng);
    const auto sig = extract_signature(kf, k);
    ASSERT_GE(sig.centroids.size(), 1u);
    ASSERT_LE(sig.centroids.size(), static_cast<std::size_t>(std::min(k, kMaxCentroids)));
    EXPECT_NEAR(weight_sum(sig), 1.0, 1e-6);
    for (const auto& c : sig.centroids) {
      EXPECT_GE(c.x, 0.0);
      EXPECT_LE(c.x, 1.0);
      EXPECT_GE(c.y, 0.0);
      EXPECT_LE(c.y, 1.0);
      EXPECT_GT(c.weight, 0.0);
    }
    EXPECT_EQ(extract_signature(kf, k), sig);
  }
  EXPECT_THROW(extract_signature(Keyframe(4, 4), 0), InvalidQuery);
}

SketchPoint point(double x, double y, LabColor c) { return {x, y, c}; }

TEST(SketchScore, Definitions) {
  ColorSignature sig;
  sig.centroids = {{0.3, 0.4, {50, 10, -10}, 0.6}, {0.8, 0.1, {0, 0, 0}, 0.4}};
  SketchQuery q;
  q.points = {point(0.3, 0.4, {50, 10, -10})};
  EXPECT_EQ(score_sketch(q, sig), 0.0);

  ColorSignature one;
  one.centroids = {{0.5, 0.5, {0, 0, 0}, 1.0}};
  q.points = {point(0.5, 0.5, {100, 0, 0})};
  EXPECT_DOUBLE_EQ(score_sketch(q, one), 1.0);
}

TEST(SketchScore, MatchesBruteForce) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1), ab(-100, 100), L(0, 100);
  for (int trial = 0; trial < 500; ++trial) {
    ColorSignature sig;
    const int nc = 1 + trial % 16;
    for (int i = 0; i < nc; ++i) sig.centroids.push_back({u(rng), u(rng), {L(rng), ab(rng), ab(rng)}, 1.0 / nc});
    SketchQuery q;
    const int np = 1 + trial % 7;
    for (int i = 0; i < np; ++i) q.points.push_back(point(u(rng), u(rng), {L(rng), ab(rng), ab(rng)}));
    const double alpha = trial % 2 ? 2.0 : 0.5;
    const double got = score_sketch(q, sig, alpha);
    EXPECT_NEAR(got, oracle::sketch_score(q.points, sig.centroids, alpha), 1e-12);
    EXPECT_GE(got, 0.0);

    // Additivity over points.
    double parts = 0.0;
    for (const auto& p : q.points) parts += score_sketch(SketchQuery{{p}, SketchLevel::frame}, sig, alpha);
    EXPECT_NEAR(got, parts, 1e-12);
  }
}

TEST(SketchScore, MovingAwayFromNearestCentroidNeverHelps) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  ColorSignature sig;
  sig.centroids = {{0.5, 0.5, {60, 20, 20}, 1.0}};
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), y = u(rng);
    SketchQuery near{{point(x, y, {40, 0, 0})}, SketchLevel::frame};
    const double t = 1.0 + u(rng);
    const double fx = std::clamp(0.5 + (x - 0.5) * t, 0.0, 1.0), fy = std::clamp(0.5 + (y - 0.5) * t, 0.0, 1.0);
    if (std::hypot(fx - 0.5, fy - 0.5) < std::hypot(x - 0.5, y - 0.5)) continue;
    SketchQuery far{{point(fx, fy, {40, 0, 0})}, SketchLevel::frame};
    EXPECT_GE(score_sketch(far, sig), score_sketch(near, sig));
  }
}

TEST(SketchQuery, Validation) {
  SketchQuery q;
  EXPECT_THROW(validate(q), InvalidQuery);
  q.points.assign(17, point(0.5, 0.5, {}));
  EXPECT_THROW(validate(q), InvalidQuery);
  q.points.assign(16, point(0.5, 0.5, {}));
  EXPECT_NO_THROW(validate(q));
  q.points = {point(1.5, 0.5, {})};
  EXPECT_THROW(validate(q), InvalidQuery);
}

class SyntheticIndex : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new Corpus(Corpus::from_data(make_synthetic_corpus()));
    index_ = new ColorIndex(build_color_index(*corpus_));
  }
  static void TearDownTestSuite() {
    delete index_;
    delete corpus_;
  }
  static Corpus* corpus_;
  static ColorIndex* index_;
};
Corpus* SyntheticIndex::corpus_ = nullptr;
ColorIndex* SyntheticIndex::index_ = nullptr;

TEST_F(SyntheticIndex, SelfRetrievalRanksTargetFirst) {
  for (std::size_t i = 0; i < corpus_->shot_count(); ++i) {
    const auto list = rank_by_sketch(sketch_from_signature(index_->signature(i)), *index_, *corpus_);
    ASSERT_FALSE(list.empty());
    EXPECT_EQ(list.entries[0].shot_id, corpus_->shot(i).id);
    EXPECT_EQ(list.entries[0].score, 1.0);
  }
}

TEST_F(SyntheticIndex, FrameLevelEqualsExhaustiveScoring) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1), ab(-80, 80), L(0, 100);
  for (int trial = 0; trial < 10; ++trial) {
    SketchQuery q;
    for (int i = 0; i < 4; ++i) q.points.push_back(point(u(rng), u(rng), {L(rng), ab(rng), ab(rng)}));
    std::map<std::string, double> want;
    for (std::size_t i = 0; i < corpus_->shot_count(); ++i) {
      want[corpus_->shot(i).id] = 1.0 / (1.0 + oracle::sketch_score(q.points, index_->signature(i).centroids, 2.0));
    }
    const auto expected = oracle::ordered(want);
    const auto got = rank_by_sketch(q, *index_, *corpus_);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t r = 0; r < got.size(); ++r) {
      EXPECT_EQ(got.entries[r].shot_id, expected[r].first);
      EXPECT_NEAR(got.entries[r].score, expected[r].second, 1e-12);
    }
    EXPECT_TRUE(is_well_formed(got));
  }
}

TEST_F(SyntheticIndex, ShotLevelPoolsTemporalNeighbours) {
  const std::size_t target = 57;
  SketchQuery q = sketch_from_signature(index_->signature(target), SketchLevel::shot);
  const auto got = rank_by_sketch(q, *index_, *corpus_);
  std::map<std::string, double> frame;
  for (std::size_t i = 0; i < corpus_->shot_count(); ++i) {
    frame[corpus_->shot(i).id] = oracle::sketch_score(q.points, index_->signature(i).centroids, 2.0);
  }
  std::map<std::string, double> pooled;
  for (const auto& v : corpus_->videos()) {
    for (std::size_t p = 0; p < v.shot_ids.size(); ++p) {
      double best = frame[v.shot_ids[p]];
      if (p > 0) best = std::min(best, frame[v.shot_ids[p - 1]]);
      if (p + 1 < v.shot_ids.size()) best = std::min(best, frame[v.shot_ids[p + 1]]);
      pooled[v.shot_ids[p]] = 1.0 / (1.0 + best);
    }
  }
  const auto expected = oracle::ordered(pooled);
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t r = 0; r < got.size(); ++r) {
    EXPECT_EQ(got.entries[r].shot_id, expected[r].first);
    EXPECT_NEAR(got.entries[r].score, expected[r].second, 1e-12);
  }
  // The target and both neighbours tie at the top.
  EXPECT_EQ(got.entries[0].score, 1.0);
  EXPECT_EQ(got.entries[2].score, 1.0);
}

TEST_F(SyntheticIndex, HistogramsEqualRecount) {
  const int G = index_->grid();
  std::vector<std::vector<std::uint32_t>> recount(G * G, std::vector<std::uint32_t>(index_->palette().size(), 0));
  std::size_t centroids = 0;
  for (const auto& sig : index_->signatures()) {
    for (const auto& c : sig.centroids) {
      const int cx = std::min(G - 1, static_cast<int>(c.x * G));
      const int cy = std::min(G - 1, static_cast<int>(c.y * G));
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t b = 0; b < index_->palette().size(); ++b) {
        const Rgb p = index_->palette()[b].rgb;
        const double d = delta_e76(c.color, oracle::lab(p.r, p.g, p.b));
        if (d < best_d - 1e-9) {
          best_d = d;
          best = b;
        }
      }
      ++recount[cy * G + cx][best];
      ++centroids;
    }
  }
  std::uint64_t total = 0;
  for (int cell = 0; cell < G * G; ++cell) {
    const auto h = index_->cell_histogram(cell);
    EXPECT_EQ(std::vector<std::uint32_t>(h.begin(), h.end()), recount[cell]) << "cell " << cell;
    total += index_->cell_total(cell);
  }
  EXPECT_EQ(total, centroids);
}

TEST_F(SyntheticIndex, RecommendationsEqualRecount) {
  const int G = index_->grid();
  for (int cell = 0; cell < G * G; ++cell) {
    const double x = (cell % G + 0.5) / G, y = (cell / G + 0.5) / G;
    const auto recs = recommend_colors(x, y, *index_, 3);
    const auto h = index_->cell_histogram(cell);
    std::vector<std::size_t> order(h.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return h[a] > h[b]; });
    std::size_t expect_n = 0;
    for (std::size_t i = 0; i < 3 && h[order[i]] > 0; ++i) {
      ASSERT_LT(i, recs.size());
      EXPECT_EQ(recs[i].palette_index, order[i]);
      EXPECT_DOUBLE_EQ(recs[i].frequency, double(h[order[i]]) / index_->cell_total(cell));
      ++expect_n;
    }
    EXPECT_EQ(recs.size(), expect_n);
    const auto full = recommend_colors(x, y, *index_, index_->palette().size());
    if (!full.empty()) {
      double sum = 0.0;
      for (const auto& r : full) sum += r.frequency;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST_F(SyntheticIndex, CacheRoundTripsAndRebuildIsIdentical) {
  TempDir dir;
  const auto fp = corpus_fingerprint(*corpus_);
  save_color_index(dir / "idx.bin", *index_, fp);
  EXPECT_EQ(load_color_index(dir / "idx.bin", fp), *index_);
  EXPECT_THROW(load_color_index(dir / "idx.bin", fp + 1), Error);
  EXPECT_EQ(build_color_index(*corpus_), *index_);
}

TEST(ColorIndexBuild, CountsAndSingleColorCorpus) {
  const Corpus two = Corpus::from_data(testing::one_video({Keyframe(16, 16, {10, 200, 30}), Keyframe(16, 16, {0, 0, 255})}));
  const auto idx = build_color_index(two);
  ASSERT_EQ(idx.size(), 2u);
  std::uint64_t total = 0;
  std::size_t centroids = 0;
  for (std::size_t c = 0; c < std::size_t(idx.grid() * idx.grid()); ++c) total += idx.cell_total(c);
  for (const auto& s : idx.signatures()) centroids += s.centroids.size();
  EXPECT_EQ(total, centroids);

  std::vector<Keyframe> blues(5, Keyframe(16, 16, {0, 0, 255}));
  for (std::size_t i = 0; i < blues.size(); ++i) blues[i].at(0, 0) = {0, 0, static_cast<std::uint8_t>(250 - i)};
  const Corpus blue = Corpus::from_data(testing::one_video(blues));
  const auto bidx = build_color_index(blue, {.signature = {.k = 1}});
  const std::size_t blue_bin = bidx.palette().nearest(rgb_to_lab(0, 0, 255));
  EXPECT_EQ(bidx.palette()[blue_bin].rgb, (Rgb{0, 0, 255}));
  for (std::size_t c = 0; c < std::size_t(bidx.grid() * bidx.grid()); ++c) {
    if (bidx.cell_total(c) == 0) continue;
    EXPECT_EQ(bidx.cell_histogram(c)[blue_bin], bidx.cell_total(c));
  }
}

TEST(ColorIndexBuild, UndecodableKeyframeNamesTheShot) {
  TempDir dir;
  CorpusData data = testing::one_video({Keyframe(2, 2), Keyframe(2, 2)});
  data.inline_keyframes.erase("v0_s1");
  data.base_dir = dir.path();
  std::filesystem::create_directories(dir / "keyframes");
  std::ofstream(dir / "keyframes/v0_s1.ppm") << "not an image";
  const Corpus c = Corpus::from_data(data);
  try {
    build_color_index(c);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.locus(), "v0_s1");
  }
}

TEST(Recommend, ToggleAndSingleColorCell) {
  ColorSignature a{"a", {{0.05, 0.05, rgb_to_lab(255, 0, 0), 0.5}, {0.9, 0.9, rgb_to_lab(0, 255, 0), 0.5}}};
  ColorSignature b{"b", {{0.1, 0.02, rgb_to_lab(250, 5, 5), 1.0}}};
  const auto on = ColorIndex::from_signatures({a, b}, 8, 4, true);
  const auto recs = recommend_colors(0.0, 0.0, on, 8);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].rgb, (Rgb{255, 0, 0}));
  EXPECT_DOUBLE_EQ(recs[0].frequency, 1.0);
  EXPECT_TRUE(recommend_colors(0.5, 0.5, on, 8).empty());

  const auto off = ColorIndex::from_signatures({a, b}, 8, 4, false);
  EXPECT_TRUE(recommend_colors(0.0, 0.0, off, 8).empty());
}

TEST(RankBySketch, EmptyCorpusAndMismatch) {
  const Corpus empty = Corpus::from_data({});
  const auto idx = build_color_index(empty);
  SketchQuery q{{point(0.5, 0.5, {50, 0, 0})}, SketchLevel::frame};
  EXPECT_TRUE(rank_by_sketch(q, idx, empty).empty());

  const Corpus one = Corpus::from_data(testing::one_video({Keyframe(4, 4)}));
  EXPECT_THROW(rank_by_sketch(q, idx, one), InvalidQuery);
}

}  // namespace
}  // namespace kis
