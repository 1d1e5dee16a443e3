#include "oracles.hpp"
#include "synthetic_corpus.hpp"

#include <gtest/gtest.h>

using namespace occlumix;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("occlumix_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST(Flo2, RoundTripAtFloatPrecision) {
  std::mt19937_64 g(71);
  const auto f = oracle::random_flow(7, 5, g);
  const auto back = decode_flow(encode_flow(f));
  ASSERT_EQ(back.size(), f.size());
  for (std::size_t i = 0; i < f.data().size(); ++i)
    EXPECT_EQ(back.data()[i], static_cast<double>(static_cast<float>(f.data()[i])));
  EXPECT_EQ(encode_flow(back), encode_flow(f));
}

TEST(Flo2, HeaderLayout) {
  const auto bytes = encode_flow(FlowField(3, 2));
  ASSERT_EQ(bytes.size(), 12u + 3 * 2 * 2 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FLO2");
  EXPECT_EQ(bytes[4], 3);
  EXPECT_EQ(bytes[8], 2);
}

TEST(Flo2, RejectsBadFiles) {
  auto bytes = encode_flow(FlowField(3, 2));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_flow(truncated), InputError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_flow(trailing), InputError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_flow(magic), InputError);
  EXPECT_THROW(decode_flow(std::vector<std::uint8_t>{'F', 'L'}), InputError);
  // huge declared size with a tiny payload must not allocate
  auto huge = bytes;
  huge[4] = huge[5] = huge[6] = huge[7] = 0xff;
  EXPECT_THROW(decode_flow(huge), InputError);
}

TEST(Ften, RoundTripAndErrors) {
  FeatureStack s;
  s.emplace_back(2, 3, 4, std::vector<double>(24, 0.25));
  s.emplace_back(1, 1, 2, std::vector<double>{1.5, -2.0});
  const auto bytes = encode_features(s);
  EXPECT_EQ(decode_features(bytes), s);
  EXPECT_EQ(flatten(s).size(), 26u);
  auto t = bytes;
  t.pop_back();
  EXPECT_THROW(decode_features(t), InputError);
  auto tr = bytes;
  tr.push_back(7);
  EXPECT_THROW(decode_features(tr), InputError);
}

TEST(Png, RoundTripRgbAndGray) {
  std::mt19937_64 g(72);
  const auto rgb = oracle::random_image8(9, 7, 3, g);
  EXPECT_EQ(to_image(decode_png(encode_png(to_raster8(rgb)))), rgb);
  const auto gray = oracle::random_image8(5, 6, 1, g);
  EXPECT_EQ(to_image(decode_png(encode_png(to_raster8(gray)))), gray);
}

TEST(Png, RejectsTruncationAndTrailingBytes) {
  const auto bytes = encode_png(Raster8{4, 4, 1, std::vector<std::uint8_t>(16, 9)});
  EXPECT_NO_THROW(decode_png(bytes));
  auto t = bytes;
  t.resize(t.size() - 5);
  EXPECT_THROW(decode_png(t), InputError);
  auto tr = bytes;
  tr.push_back(0);
  EXPECT_THROW(decode_png(tr), InputError);
  auto sig = bytes;
  sig[1] = 'Q';
  EXPECT_THROW(decode_png(sig), InputError);
}

TEST(MaskIo, ZeroOneAnd0_255Files) {
  const auto dir = scratch("masks");
  const BinaryMask m(3, 2, {1, 0, 1, 0, 0, 1});
  save_mask(dir / "a.png", m);
  EXPECT_EQ(load_mask(dir / "a.png"), m);
  write_file_bytes(dir / "b.png", encode_png(Raster8{3, 2, 1, {1, 0, 1, 0, 0, 1}}));
  EXPECT_EQ(load_mask(dir / "b.png"), m);
  write_file_bytes(dir / "c.png", encode_png(Raster8{3, 2, 1, {200, 0, 128, 127, 5, 255}}));
  EXPECT_EQ(load_mask(dir / "c.png"), m);
  write_file_bytes(dir / "rgb.png", encode_png(Raster8{1, 1, 3, {1, 2, 3}}));
  EXPECT_THROW(load_mask(dir / "rgb.png"), InputError);
}

TEST(Palette, FlatAndGrouped) {
  const auto p = parse_palette(synth::palette_json());
  EXPECT_EQ(p.cloth_ids, std::vector<int>{3});
  EXPECT_EQ(p.body_ids.size(), 5u);
  const auto q = parse_palette(json{{"classes", {{"bg", 0}, {"shirt", 1}, {"skin", 2}}},
                                    {"cloth", {"shirt"}},
                                    {"body", {"skin"}}});
  EXPECT_EQ(q.cloth_ids, std::vector<int>{1});
  EXPECT_EQ(q.body_ids, std::vector<int>{2});
  EXPECT_THROW(parse_palette(json{{"a", 1}, {"b", 1}}), InputError);
  EXPECT_THROW(parse_palette(json{{"a", 300}}), InputError);
}

TEST(Pose, ParseAndValidate) {
  json j = json::array();
  for (int i = 0; i < 18; ++i)
    j.push_back({i, i + 1, 0.5});
  EXPECT_EQ(parse_pose(j).joints[3].x, 3.0);
  j[2][2] = 1.5;
  EXPECT_THROW(parse_pose(j), InputError);
  EXPECT_THROW(parse_pose(json::array({{1, 2, 0.3}})), InputError);
}

TEST(Pools, Disjoint) {
  EXPECT_NO_THROW(parse_pools(json{{"complex", {"a"}}, {"simple", {"b"}}}));
  EXPECT_THROW(parse_pools(json{{"complex", {"a"}}, {"simple", {"a"}}}), InputError);
  EXPECT_THROW(parse_pools(json{{"complex", {"a"}}}), InputError);
}

TEST(Manifest, RoundTripIsStable) {
  const auto dir = scratch("manifest");
  const auto c = synth::make_corpus(dir / "c", 4, 16, 16, 1);
  const auto m = load_manifest(c.manifest);
  ASSERT_EQ(m.entries.size(), 4u);
  save_manifest(dir / "copy.json", m);
  const auto m2 = load_manifest(dir / "copy.json");
  EXPECT_EQ(to_json(m2), to_json(m));
  save_manifest(dir / "copy2.json", m2);
  EXPECT_EQ(read_file_bytes(dir / "copy.json"), read_file_bytes(dir / "copy2.json"));
}

TEST(Manifest, KeepsUnknownKeys) {
  const json j{{"entries", {{{"id", "a"}, {"person_image", "x.png"}, {"note", 42}}}}};
  const auto m = parse_manifest(j);
  EXPECT_EQ(m.entries[0].extra.at("note"), 42);
  EXPECT_EQ(to_json(m)["entries"][0]["note"], 42);
}

TEST(Manifest, DistinctErrors) {
  const auto dir = scratch("manifest_err");
  write_text_file(dir / "bad.json", "{not json");
  try {
    load_manifest(dir / "bad.json");
    FAIL();
  } catch (const InputError &e) {
    EXPECT_NE(std::string(e.what()).find("parse error"), std::string::npos);
  }
  auto message = [](const json &j, std::vector<std::string> req = {}) {
    try {
      parse_manifest(j, fs::temp_directory_path(), req);
    } catch (const InputError &e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(json{{"entries", {{{"id", "a"}}, {{"id", "a"}}}}}).find("duplicate"), std::string::npos);
  EXPECT_NE(message(json{{"entries", {{{"person_image", "a.png"}}}}}).find("missing required field 'id'"),
            std::string::npos);
  EXPECT_NE(message(json{{"entries", {{{"id", "a"}}}}}, {"person_image"}).find("missing required field 'person_image'"),
            std::string::npos);
  EXPECT_NE(message(json{{"entries", {{{"id", "a"}, {"person_image", "nope_404.png"}}}}}, {"person_image"})
                .find("file not found"),
            std::string::npos);
  EXPECT_NE(message(json{{"entries", {{{"id", "../x"}}}}}).find("may only use"), std::string::npos);
}

TEST(RunConfig, ParsesAndRejectsUnknownKeys) {
  const auto c = parse_run_config(json{{"seed", 9}, {"lambda", 0.25}, {"glcm_levels", 16}, {"epsilon", 0.0}});
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.lambda, 0.25);
  EXPECT_EQ(c.glcm.levels, 16);
  EXPECT_EQ(c.charbonnier.epsilon, 0.0);
  EXPECT_THROW(parse_run_config(json{{"lamda", 0.5}}), InputError);
  EXPECT_THROW(parse_run_config(json{{"lambda", 2.0}}), InputError);
  EXPECT_THROW(parse_run_config(json{{"lambda", "x"}}), InputError);
}

TEST(CorpusStats, FrequenciesSumToOne) {
  const auto dir = scratch("stats");
  const auto c = synth::make_corpus(dir / "c", 3, 20, 16, 2);
  const auto m = load_manifest(c.manifest);
  const auto palette = load_palette(c.palette);
  const json s = corpus_stats(m, palette);
  EXPECT_EQ(s["total_pixels"], 3 * 20 * 16);
  double sum = 0.0;
  for (const auto &[k, v] : s["class_frequency"].items())
    sum += v.get<double>();
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(s["entries"].size(), 3u);
  EXPECT_TRUE(s["skipped"].empty());
}

TEST(ContentHash, DependsOnPixelsAndShape) {
  const ImageBuffer a(2, 2, 1, {0, 0, 0, 0}), b(4, 1, 1, {0, 0, 0, 0}), c(2, 2, 1, {0, 0, 0, 1});
  EXPECT_EQ(content_hash(a), content_hash(a));
  EXPECT_NE(content_hash(a), content_hash(b));
  EXPECT_NE(content_hash(a), content_hash(c));
  EXPECT_EQ(content_hash(a).size(), 16u);
}
