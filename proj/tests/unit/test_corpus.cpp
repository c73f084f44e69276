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

#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "kis/corpus.hpp"
#include "kis/error.hpp"
#include "kis/synthetic.hpp"

namespace kis {
namespace {

using testing::TempDir;

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

TEST(Keyframe, DecodesTwoPixelImage) {
  std::string raw = "P6\n2 1\n255\n";
  raw += std::string("\xff\x00\x00\x00\x00\xff", 6);
  const Keyframe kf = decode_keyframe(bytes_of(raw));
  EXPECT_EQ(kf.width, 2);
  EXPECT_EQ(kf.height, 1);
  EXPECT_EQ(kf.at(0, 0), (Rgb{255, 0, 0}));
  EXPECT_EQ(kf.at(1, 0), (Rgb{0, 0, 255}));
}

TEST(Keyframe, RejectsTruncatedPayload) {
  std::string raw = "P6\n4 4\n255\n" + std::string(9, '\x10');
  EXPECT_THROW(decode_keyframe(bytes_of(raw)), DecodeError);
}

TEST(Keyframe, RejectsBadMagicAndMaxval) {
  EXPECT_THROW(decode_keyframe(bytes_of("P3\n1 1\n255\n1 2 3")), DecodeError);
  EXPECT_THROW(decode_keyframe(bytes_of("P6\n1 1\n65535\n" + std::string(6, 'a'))), DecodeError);
  EXPECT_THROW(decode_keyframe(bytes_of("P6\n1 1\n15\n" + std::string(3, 'a'))), DecodeError);
  EXPECT_THROW(decode_keyframe(bytes_of("")), DecodeError);
  EXPECT_THROW(decode_keyframe(bytes_of("P6\n0 1\n255\n")), DecodeError);
}

TEST(Keyframe, AcceptsHeaderComments) {
  std::string raw = "P6 # made by hand\n1 # width\n1\n255\nabc";
  const Keyframe kf = decode_keyframe(bytes_of(raw));
  EXPECT_EQ(kf.at(0, 0), (Rgb{'a', 'b', 'c'}));
}

TEST(Keyframe, GrayFileRoundTripsThroughDisk) {
  TempDir dir;
  write_keyframe_file(dir / "gray.ppm", Keyframe(64, 64, {128, 128, 128}));
  const Keyframe kf = read_keyframe_file(dir / "gray.ppm");
  ASSERT_EQ(kf.size(), 4096u);
  for (const auto& p : kf.pixels) EXPECT_EQ(p, (Rgb{128, 128, 128}));
}

TEST(Keyframe, EncodeDecodeIsLossless) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 40);
  for (int i = 0; i < 200; ++i) {
    const Keyframe kf = testing::random_keyframe(rng, dim(rng), dim(rng));
    const auto bytes = encode_keyframe(kf);
    const Keyframe back = decode_keyframe(bytes);
    EXPECT_EQ(back, kf);
    EXPECT_EQ(encode_keyframe(back), bytes);
  }
}

nlohmann::json minimal_manifest() {
  return {{"videos", {{{"id", "v1"}, {"duration_s", 30.0}}}},
          {"shots",
           {{{"id", "s1"}, {"video_id", "v1"}, {"start_s", 0.0}, {"end_s", 10.0}, {"keyframe", "k/s1.ppm"}},
            {{"id", "s2"}, {"video_id", "v1"}, {"start_s", 10.0}, {"end_s", 30.0}, {"keyframe", "k/s2.ppm"},
             {"description", "red car"}}}}};
}

void write_minimal(const TempDir& dir, const nlohmann::json& manifest) {
  write_keyframe_file(dir / "k/s1.ppm", Keyframe(2, 2, {1, 2, 3}));
  write_keyframe_file(dir / "k/s2.ppm", Keyframe(2, 2, {4, 5, 6}));
  write_text(dir / "manifest.json", manifest.dump());
}

TEST(Manifest, LoadsMinimalCorpus) {
  TempDir dir;
  write_minimal(dir, minimal_manifest());
  const Corpus c = load_manifest(dir / "manifest.json");
  EXPECT_EQ(c.shot_count(), 2u);
  EXPECT_TRUE(c.banks().empty());
  ASSERT_NE(c.find_video("v1"), nullptr);
  EXPECT_EQ(c.find_video("v1")->shot_ids, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(c.keyframe(1).at(0, 0), (Rgb{4, 5, 6}));
  EXPECT_EQ(c.find_shot("s2")->description, "red car");
}

TEST(Manifest, DanglingVideoReferenceNamesTheVideo) {
  TempDir dir;
  auto m = minimal_manifest();
  m["shots"][1]["video_id"] = "vX";
  write_minimal(dir, m);
  try {
    load_manifest(dir / "manifest.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.locus(), "s2");
    EXPECT_NE(std::string(e.what()).find("dangling_reference"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'vX'"), std::string::npos);
  }
}

TEST(Manifest, MalformedRecordsReportTheirLocus) {
  TempDir dir;
  auto m = minimal_manifest();
  m["shots"][1]["start_s"] = "soon";
  write_minimal(dir, m);
  try {
    load_manifest(dir / "manifest.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.locus(), "shots[1].start_s");
  }
  EXPECT_THROW(load_manifest(dir / "absent.json"), LoadError);
  write_text(dir / "broken.json", "{\"videos\": [");
  EXPECT_THROW(load_manifest(dir / "broken.json"), LoadError);
}

TEST(Manifest, DuplicateIdsAreRejected) {
  TempDir dir;
  auto m = minimal_manifest();
  m["shots"][1]["id"] = "s1";
  write_minimal(dir, m);
  EXPECT_THROW(load_manifest(dir / "manifest.json"), LoadError);
}

TEST(Manifest, ShotIdsDerivedFromStartTimes) {
  TempDir dir;
  auto m = minimal_manifest();
  std::swap(m["shots"][0], m["shots"][1]);
  write_minimal(dir, m);
  const Corpus c = load_manifest(dir / "manifest.json");
  EXPECT_EQ(c.find_video("v1")->shot_ids, (std::vector<std::string>{"s1", "s2"}));
}

TEST(Manifest, ScoreOutOfRangeIsRejected) {
  TempDir dir;
  auto m = minimal_manifest();
  m["banks"] = {{{"kind", "concept"}, {"labels_file", "c.txt"}, {"matrix_file", "c.bin"}}};
  write_minimal(dir, m);
  write_text(dir / "c.txt", "a\nb\n");
  write_matrix_file(dir / "c.bin", testing::make_bank(BankKind::concepts, {"a", "b"}, 2, {0.1f, 0.2f, 1.5f, 0.0f}));
  try {
    load_manifest(dir / "manifest.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("score_range"), std::string::npos);
  }
}

TEST(Manifest, BankLoadsWithSidecars) {
  TempDir dir;
  auto m = minimal_manifest();
  m["banks"] = {{{"kind", "object"}, {"labels_file", "o.txt"}, {"matrix_file", "o.bin"}}};
  write_minimal(dir, m);
  write_text(dir / "o.txt", "dog\ncat\n");
  write_matrix_file(dir / "o.bin", testing::make_bank(BankKind::objects, {"dog", "cat"}, 2, {0.1f, 0.2f, 0.3f, 0.4f}));
  const Corpus c = load_manifest(dir / "manifest.json");
  const ScoreBank* b = c.bank(BankKind::objects);
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->labels, (std::vector<std::string>{"dog", "cat"}));
  EXPECT_FLOAT_EQ(b->at(1, 0), 0.3f);
  EXPECT_EQ(c.bank(BankKind::concepts), nullptr);
}

TEST(Manifest, MatrixHeaderMustMatchPayload) {
  TempDir dir;
  write_matrix_file(dir / "m.bin", testing::make_bank(BankKind::concepts, {"a"}, 3, {0.0f, 0.5f, 1.0f}));
  const ScoreBank b = read_matrix_file(dir / "m.bin");
  EXPECT_EQ(b.rows, 3u);
  EXPECT_EQ(b.cols, 1u);
  EXPECT_EQ(b.values, (std::vector<float>{0.0f, 0.5f, 1.0f}));
  std::filesystem::resize_file(dir / "m.bin", std::filesystem::file_size(dir / "m.bin") - 2);
  EXPECT_THROW(read_matrix_file(dir / "m.bin"), LoadError);
}

TEST(Validate, SyntheticCorpusIsClean) {
  const CorpusData data = make_synthetic_corpus();
  EXPECT_TRUE(validate_corpus(data).empty());
  const Corpus c = Corpus::from_data(data);
  EXPECT_EQ(c.shot_count(), 200u);
  EXPECT_EQ(c.videos().size(), 20u);
  for (const auto& v : c.videos()) {
    ASSERT_EQ(v.shot_ids.size(), 10u);
    for (std::size_t i = 1; i < v.shot_ids.size(); ++i) {
      const Shot* a = c.find_shot(v.shot_ids[i - 1]);
      const Shot* b = c.find_shot(v.shot_ids[i]);
      EXPECT_LT(a->start_s, b->start_s);
      EXPECT_LE(a->end_s, b->start_s);
      EXPECT_EQ(c.position_in_video(*c.shot_index(b->id)), i);
    }
  }
}

TEST(Validate, EmptyIntervalCitesTheShot) {
  CorpusData data = testing::one_video({Keyframe(1, 1), Keyframe(1, 1)});
  data.shots[1].end_s = data.shots[1].start_s;
  const auto report = validate_corpus(data);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].entity, "v0_s1");
  EXPECT_EQ(report[0].rule, "start_before_end");
}

TEST(Validate, DeclaredWidthMismatchIsReported) {
  CorpusData data = testing::one_video({Keyframe(1, 1)});
  std::vector<std::string> labels;
  for (int i = 0; i < 618; ++i) labels.push_back("object_" + std::to_string(i));
  ScoreBank bank = testing::make_bank(BankKind::objects, labels, 1, std::vector<float>(617, 0.5f));
  bank.cols = 617;
  data.banks.push_back(bank);
  const auto report = validate_corpus(data);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].rule, "dimension_mismatch");
  EXPECT_EQ(report[0].detail, "matrix has 617 columns but 618 labels are declared");
}

TEST(Validate, StructuralRules) {
  auto rules = [](const CorpusData& d) {
    std::vector<std::string> r;
    for (const auto& v : validate_corpus(d)) r.push_back(v.rule);
    return r;
  };
  const CorpusData base = testing::one_video({Keyframe(1, 1), Keyframe(1, 1)});

  CorpusData overlap = base;
  overlap.shots[1].start_s = 5.0;
  EXPECT_EQ(rules(overlap), (std::vector<std::string>{"shot_overlap"}));

  CorpusData outside = base;
  outside.shots[1].end_s = 25.0;
  EXPECT_EQ(rules(outside), (std::vector<std::string>{"within_video"}));

  CorpusData unlisted = base;
  unlisted.videos[0].shot_ids.pop_back();
  EXPECT_EQ(rules(unlisted), (std::vector<std::string>{"shot_listed"}));

  CorpusData no_frame = base;
  no_frame.inline_keyframes.clear();
  no_frame.shots[0].keyframe_ref.clear();
  EXPECT_EQ(rules(no_frame), (std::vector<std::string>{"keyframe_present"}));

  CorpusData dup_label = base;
  dup_label.banks.push_back(testing::make_bank(BankKind::concepts, {"a", "a"}, 2, {0, 0, 0, 0}));
  EXPECT_EQ(rules(dup_label), (std::vector<std::string>{"duplicate_label"}));

  CorpusData rows = base;
  rows.banks.push_back(testing::make_bank(BankKind::concepts, {"a"}, 1, {0}));
  EXPECT_FALSE(rules(rows).empty());
}

TEST(Validate, LoadedCorpusRevalidatesClean) {
  TempDir dir;
  SyntheticOptions opts;
  opts.videos = 3;
  opts.shots_per_video = 4;
  opts.object_labels = 618;
  const auto manifest = write_manifest(dir.path(), make_synthetic_corpus(opts));
  const CorpusData data = read_manifest(manifest);
  EXPECT_TRUE(validate_corpus(data).empty());
  const Corpus c = load_manifest(manifest);
  EXPECT_EQ(c.bank(BankKind::objects)->labels.size(), 618u);

  const Corpus in_memory = Corpus::from_data(make_synthetic_corpus(opts));
  for (std::size_t i = 0; i < c.shot_count(); ++i) EXPECT_EQ(c.keyframe(i), in_memory.keyframe(i));
  EXPECT_EQ(corpus_fingerprint(c), corpus_fingerprint(load_manifest(manifest)));
}

}  // namespace
}  // namespace kis
