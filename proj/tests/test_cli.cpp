#include "synthetic_corpus.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace occlumix;

namespace {

int run(const std::string &args, const fs::path &log = {}) {
  std::string cmd = std::string(OCCLUMIX_CLI) + " " + args;
  cmd += log.empty() ? " >/dev/null 2>&1" : " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("occlumix_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  const auto b = read_file_bytes(p);
  return {b.begin(), b.end()};
}

} // namespace

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help"), 0);
  for (const char *sub : {"classify", "augment", "maskops", "warp", "smoothness", "loss", "fid", "stats"})
    EXPECT_EQ(run(std::string(sub) + " --help"), 0) << sub;
}

TEST(Cli, UsageErrorsExitOne) {
  const auto dir = scratch("usage");
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("classify --bogus-flag 1"), 1);
  EXPECT_EQ(run("classify --manifest " + (dir / "missing.json").string(), dir / "err.txt"), 1);
  EXPECT_FALSE(slurp(dir / "err.txt").empty());
}

TEST(Cli, DegenerateInputExitsTwo) {
  const auto dir = scratch("degenerate");
  FlowField tiny(2, 2);
  save_flow(dir / "tiny.flo", tiny);
  EXPECT_EQ(run("smoothness --flow " + (dir / "tiny.flo").string(), dir / "err.txt"), 2);
  EXPECT_NE(slurp(dir / "err.txt").find("smaller than 3x3"), std::string::npos);
}

TEST(Cli, ClassifyWritesPoolsAtThreshold) {
  const auto dir = scratch("classify");
  const auto c = synth::make_corpus(dir / "c", 4, 32, 32, 20);
  ASSERT_EQ(run("classify --manifest " + c.manifest.string() + " --threshold 2.5 --out " + (dir / "o").string()), 0);
  const auto pools = load_pools(dir / "o/pools.json");
  EXPECT_EQ(pools.complex, (std::vector<std::string>{"p000", "p002"}));
  EXPECT_EQ(pools.simple, (std::vector<std::string>{"p001", "p003"}));
  const std::string lines = slurp(dir / "o/texture.jsonl");
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 4);
  for (std::size_t pos = 0, next; (next = lines.find('\n', pos)) != std::string::npos; pos = next + 1) {
    const json row = json::parse(lines.substr(pos, next - pos));
    EXPECT_EQ(row["label"] == "complex", row["entropy"].get<double>() >= 2.5);
  }
}

TEST(Cli, AugmentIsReproducible) {
  const auto dir = scratch("augment");
  const auto c = synth::make_corpus(dir / "c", 6, 24, 32, 21);
  ASSERT_EQ(run("classify --manifest " + c.manifest.string() + " --out " + (dir / "cls").string()), 0);
  const std::string base = "augment --manifest " + c.manifest.string() + " --pools " + (dir / "cls/pools.json").string() +
                           " --dist " + c.distribution.string() + " --lambda 0.5 --seed 4 --out ";
  ASSERT_EQ(run("--threads 1 " + base + (dir / "a").string()), 0);
  ASSERT_EQ(run("--threads 4 " + base + (dir / "b").string()), 0);
  EXPECT_EQ(synth::snapshot(dir / "a"), synth::snapshot(dir / "b"));
  EXPECT_EQ(read_json_file(dir / "a/report.json")["succeeded"], 6);
}

TEST(Cli, ConfigFileAndOverrides) {
  const auto dir = scratch("config");
  const auto c = synth::make_corpus(dir / "c", 4, 24, 24, 22);
  ASSERT_EQ(run("classify --manifest " + c.manifest.string() + " --out " + (dir / "cls").string()), 0);
  write_text_file(dir / "run.json", json{{"seed", 3}, {"lambda", 1.0}, {"occlusion_distribution", c.distribution.string()}}.dump());
  const std::string base = "augment --manifest " + c.manifest.string() + " --pools " +
                           (dir / "cls/pools.json").string() + " --config " + (dir / "run.json").string();
  ASSERT_EQ(run(base + " --out " + (dir / "a").string()), 0);
  const json meta = read_json_file(dir / "a/p000.json");
  EXPECT_EQ(meta["seed"], 3);
  EXPECT_EQ(meta["partner_pool"], "complex");
  ASSERT_EQ(run(base + " --lambda 0 --out " + (dir / "b").string()), 0);
  EXPECT_EQ(read_json_file(dir / "b/p000.json")["partner_pool"], "simple");
  write_text_file(dir / "bad.json", R"({"lamda": 0.5})");
  EXPECT_EQ(run("classify --manifest " + c.manifest.string() + " --config " + (dir / "bad.json").string()), 1);
}

TEST(Cli, WarpSmoothnessLossStatsFid) {
  const auto dir = scratch("misc");
  const auto c = synth::make_corpus(dir / "c", 4, 32, 32, 23);
  save_flow(dir / "zero.flo", FlowField(32, 32));
  const auto img = c.dir / "img/p000_person.png";
  ASSERT_EQ(run("warp --image " + img.string() + " --flow " + (dir / "zero.flo").string() + " --out " +
                (dir / "w.png").string()),
            0);
  EXPECT_EQ(load_image(dir / "w.png"), load_image(img));

  ASSERT_EQ(run("smoothness --flow " + (dir / "zero.flo").string() + " --epsilon 0.001 --alpha 0.5 --out " +
                (dir / "s.json").string()),
            0);
  const json s = read_json_file(dir / "s.json");
  EXPECT_NEAR(s["value"].get<double>(), s["terms"].get<double>() * 1e-3, 1e-12);

  ASSERT_EQ(run("loss --generated " + img.string() + " --reference " + img.string() + " --out " +
                (dir / "l.json").string()),
            0);
  EXPECT_EQ(read_json_file(dir / "l.json")["total"], 0.0);

  ASSERT_EQ(run("stats --manifest " + c.manifest.string() + " --palette " + c.palette.string() + " --out " +
                (dir / "st.json").string()),
            0);
  EXPECT_EQ(read_json_file(dir / "st.json")["total_pixels"], 4 * 32 * 32);

  write_text_file(dir / "regions.json", json{{"torso", {2}}, {"head", {1}}}.dump());
  ASSERT_EQ(run("fid --gen-manifest " + c.manifest.string() + " --real-manifest " + c.manifest.string() +
                " --regions " + (dir / "regions.json").string() + " --builtin-seed 1 --crop-size 16 --out " +
                (dir / "fid.json").string()),
            0);
  const json f = read_json_file(dir / "fid.json");
  EXPECT_LE(f["table"]["torso"].get<double>(), 1e-8);
  EXPECT_EQ(run("fid --gen-manifest " + c.manifest.string() + " --real-manifest " + c.manifest.string() +
                " --regions " + (dir / "regions.json").string()),
            1);
}

TEST(Cli, MaskopsDeterministic) {
  const auto dir = scratch("maskops");
  const auto c = synth::make_corpus(dir / "c", 3, 24, 32, 24);
  const std::string base = "maskops --manifest " + c.manifest.string() + " --palette " + c.palette.string() +
                           " --irregular " + c.holes_dir.string() + " --seed 8 --out ";
  ASSERT_EQ(run(base + (dir / "a").string()), 0);
  ASSERT_EQ(run("--threads 3 " + base + (dir / "b").string()), 0);
  EXPECT_EQ(synth::snapshot(dir / "a"), synth::snapshot(dir / "b"));
}
