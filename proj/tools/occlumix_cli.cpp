#include "occlumix/occlumix.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace occlumix;

namespace {

void emit(const json &j, const std::string &out) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_text_file(out, j.dump(2) + "\n");
}

std::vector<std::string> required_fields(std::initializer_list<const char *> names) {
  return {names.begin(), names.end()};
}

struct Common {
  unsigned threads = default_thread_count();
  std::string config;
  RunConfig run;

  void load_config() {
    if (!config.empty())
      run = load_run_config(config);
  }
};

// --- classify ----------------------------------------------------------------

struct ClassifyArgs {
  std::string manifest, out = ".";
  int levels = 32;
  double threshold = kDefaultEntropyThreshold;
  std::uint64_t seed = 0;
  CLI::Option *levels_opt = nullptr, *threshold_opt = nullptr;
};

int run_classify(const ClassifyArgs &a, Common &c) {
  c.load_config();
  GlcmParams glcm = c.run.glcm;
  double threshold = c.run.entropy_threshold;
  if (a.levels_opt->count())
    glcm.levels = a.levels;
  if (a.threshold_opt->count())
    threshold = a.threshold;
  detail::require(glcm.levels >= 2 && glcm.levels <= 256, "--levels must be in 2..256");

  const auto manifest = load_manifest(a.manifest, required_fields({"cloth_image"}));
  const auto result = classify_corpus(manifest, glcm, threshold, c.threads);

  fs::create_directories(a.out);
  std::string lines;
  json skipped = json::array();
  for (const auto &row : result.entries) {
    if (row.result) {
      lines += json{{"id", row.id}, {"entropy", row.result->entropy}, {"label", to_string(row.result->label)}}.dump() +
               "\n";
    } else {
      skipped.push_back({{"id", row.id}, {"reason", row.error}});
      std::cerr << "occlumix classify: skipping '" << row.id << "': " << row.error << "\n";
    }
  }
  write_text_file(fs::path(a.out) / "texture.jsonl", lines);
  json pools = to_json(result.pools);
  pools["threshold"] = threshold;
  pools["levels"] = glcm.levels;
  pools["skipped"] = skipped;
  write_text_file(fs::path(a.out) / "pools.json", pools.dump(2) + "\n");
  std::cout << "classified " << result.entries.size() - skipped.size() << " garments: " << result.pools.complex.size()
            << " complex, " << result.pools.simple.size() << " simple, " << skipped.size() << " skipped\n";
  return 0;
}

// --- augment -----------------------------------------------------------------

struct AugmentArgs {
  std::string manifest, pools, dist, out, palette;
  double lambda = 0.5;
  std::uint64_t seed = 0;
  bool no_align = false;
  std::size_t min_pixels = 16;
  int max_attempts = 8;
  CLI::Option *lambda_opt = nullptr, *seed_opt = nullptr, *min_pixels_opt = nullptr, *dist_opt = nullptr,
              *no_align_opt = nullptr;
};

int run_augment(const AugmentArgs &a, Common &c) {
  c.load_config();
  AugmentOptions opt;
  opt.lambda = a.lambda_opt->count() ? a.lambda : c.run.lambda;
  opt.seed = a.seed_opt->count() ? a.seed : c.run.seed;
  opt.compose.min_pixels = a.min_pixels_opt->count() ? a.min_pixels : c.run.min_pixels;
  opt.compose.align = a.no_align_opt->count() ? false : c.run.align;
  opt.compose.max_attempts = a.max_attempts;
  opt.threads = c.threads;
  if (!a.palette.empty())
    opt.palette = load_palette(a.palette);

  std::string dist_path = a.dist_opt->count() ? a.dist : c.run.occlusion_distribution;
  if (dist_path.empty())
    throw InputError("augment needs --dist or occlusion_distribution in --config");

  const auto manifest = load_manifest(a.manifest, required_fields({"person_image", "region_map"}));
  const auto pools = load_pools(a.pools);
  for (const auto *pool : {&pools.complex, &pools.simple})
    for (const auto &id : *pool)
      if (!manifest.find(id))
        throw InputError("pools file lists '" + id + "', which is not in the manifest");
  const auto dist = load_occlusion_distribution(dist_path);
  const auto report = synthesize_batch(manifest, pools, dist, opt, a.out);
  std::cout << "augmented " << report.succeeded() << " of " << report.records.size() << " entries ("
            << report.skipped() << " skipped) into " << a.out << "\n";
  return 0;
}

// --- maskops -----------------------------------------------------------------

struct MaskOpsArgs {
  std::string manifest, palette, irregular, out;
  std::uint64_t seed = 0;
};

int run_maskops(const MaskOpsArgs &a, Common &c) {
  c.load_config();
  const auto manifest = load_manifest(a.manifest, required_fields({"label_map", "warped_cloth_mask", "pose"}));
  const auto palette = load_palette(a.palette);
  MaskOpsOptions opt{a.seed, c.threads};
  const auto report = build_spn_batch(manifest, palette, a.irregular, opt, a.out);
  std::cout << "built parsing samples for " << report.succeeded() << " of " << report.records.size()
            << " entries into " << a.out << "\n";
  return 0;
}

// --- warp --------------------------------------------------------------------

struct WarpArgs {
  std::string image, flow, out;
  bool mask = false;
};

int run_warp(const WarpArgs &a, Common &) {
  const FlowField flow = load_flow(a.flow);
  if (a.mask)
    save_mask(a.out, warp_mask_by_flow(load_mask(a.image), flow));
  else
    save_image(a.out, warp_by_flow(load_image(a.image), flow));
  return 0;
}

// --- smoothness --------------------------------------------------------------

struct SmoothnessArgs {
  std::vector<std::string> flows;
  std::string out;
  double epsilon = 1e-3, alpha = 0.45;
  CLI::Option *eps_opt = nullptr, *alpha_opt = nullptr;
};

int run_smoothness(const SmoothnessArgs &a, Common &c) {
  c.load_config();
  CharbonnierParams p = c.run.charbonnier;
  if (a.eps_opt->count())
    p.epsilon = a.epsilon;
  if (a.alpha_opt->count())
    p.alpha = a.alpha;
  std::vector<FlowField> scales;
  for (const auto &f : a.flows)
    scales.push_back(load_flow(f));
  const auto r = second_order_smoothness_terms(FlowPyramid(std::move(scales)), p);
  emit(json{{"value", r.value}, {"terms", r.terms}, {"epsilon", p.epsilon}, {"alpha", p.alpha}, {"scales", a.flows.size()}},
       a.out);
  return 0;
}

// --- loss --------------------------------------------------------------------

struct LossArgs {
  std::string generated, reference, gen_features, ref_features, out;
  std::uint64_t seed = 0;
  double alpha_l = 1.0, alpha_p = 1.0;
  CLI::Option *al_opt = nullptr, *ap_opt = nullptr;
};

int run_loss(const LossArgs &a, Common &c) {
  c.load_config();
  LossWeights w = c.run.loss_weights;
  if (a.al_opt->count())
    w.alpha_l = a.alpha_l;
  if (a.ap_opt->count())
    w.alpha_p = a.alpha_p;
  w.validate();
  const ImageBuffer gen = load_image(a.generated);
  const ImageBuffer ref = load_image(a.reference);
  const double l1 = l1_loss(gen, ref);
  double perc = 0.0;
  std::string source;
  if (!a.gen_features.empty() || !a.ref_features.empty()) {
    if (a.gen_features.empty() || a.ref_features.empty())
      throw InputError("--gen-features and --ref-features must be given together");
    perc = perceptual_loss(load_features(a.gen_features), load_features(a.ref_features));
    source = "files";
  } else {
    perc = perceptual_loss(builtin_feature_stack(gen, a.seed), builtin_feature_stack(ref, a.seed));
    source = "builtin";
  }
  emit(json{{"l1", l1},
            {"perceptual", perc},
            {"total", combined_loss(l1, perc, w)},
            {"alpha_l", w.alpha_l},
            {"alpha_p", w.alpha_p},
            {"features", source}},
       a.out);
  return 0;
}

// --- fid ---------------------------------------------------------------------

struct FidArgs {
  std::string gen_manifest, real_manifest, features_dir, regions, export_crops, out;
  std::uint64_t builtin_seed = 0;
  int crop_size = 64;
  CLI::Option *builtin_opt = nullptr;
};

int run_fid(const FidArgs &a, Common &c) {
  FidOptions opt;
  opt.crop_size = a.crop_size;
  opt.threads = c.threads;
  if (a.builtin_opt->count())
    opt.builtin_seed = a.builtin_seed;
  if (!a.features_dir.empty())
    opt.features_dir = a.features_dir;
  if (opt.features_dir && opt.builtin_seed)
    throw InputError("give either --features-dir or --builtin-seed, not both");
  if (!opt.features_dir && !opt.builtin_seed)
    throw InputError("fid needs --features-dir (or --builtin-seed for the built-in extractor)");
  if (!a.export_crops.empty())
    opt.export_crops = a.export_crops;
  const auto req = required_fields({"person_image", "region_map"});
  const auto gen = load_manifest(a.gen_manifest, req);
  const auto real = load_manifest(a.real_manifest, req);
  const auto sets = parse_region_sets(read_json_file(a.regions));
  const auto report = region_fid(gen, real, sets, opt);
  emit(to_json(report), a.out);
  for (const auto &[name, row] : report.rows)
    if (row.status == RowStatus::error)
      std::cerr << "occlumix fid: row '" << name << "': " << row.detail << "\n";
  return 0;
}

// --- stats -------------------------------------------------------------------

struct StatsArgs {
  std::string manifest, palette, out;
};

int run_stats(const StatsArgs &a, Common &) {
  const auto manifest = load_manifest(a.manifest, required_fields({"label_map"}));
  emit(corpus_stats(manifest, load_palette(a.palette)), a.out);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"occlumix: occlusion-mixup augmentation and try-on evaluation tools"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads (default: logical cores)")
      ->check(CLI::PositiveNumber);

  auto add_config = [&](CLI::App *sub) {
    sub->add_option("--config", common.config, "run configuration JSON; explicit flags override it")
        ->check(CLI::ExistingFile);
  };

  ClassifyArgs ca;
  auto *classify = app.add_subcommand("classify", "GLCM texture entropy of each in-shop garment; writes pools");
  classify->add_option("--manifest", ca.manifest, "dataset manifest")->required();
  classify->add_option("--out", ca.out, "output directory for texture.jsonl and pools.json");
  ca.levels_opt = classify->add_option("--levels", ca.levels, "gray levels (default 32)");
  ca.threshold_opt = classify->add_option("--threshold", ca.threshold, "complex iff entropy >= threshold (nats)");
  classify->add_option("--seed", ca.seed, "accepted for uniformity; classification is deterministic");
  add_config(classify);

  AugmentArgs aa;
  auto *augment = app.add_subcommand("augment", "synthesize one OccluMix sample per manifest entry");
  augment->add_option("--manifest", aa.manifest, "dataset manifest")->required();
  augment->add_option("--pools", aa.pools, "pools.json from classify")->required();
  aa.dist_opt = augment->add_option("--dist", aa.dist, "occlusion distribution JSON (region id -> weight)");
  aa.lambda_opt = augment->add_option("--lambda", aa.lambda, "probability of drawing a complex partner");
  aa.seed_opt = augment->add_option("--seed", aa.seed, "global seed");
  augment->add_option("--out", aa.out, "output directory")->required();
  aa.no_align_opt = augment->add_flag("--no-align", aa.no_align, "do not move the partner garment onto the region");
  aa.min_pixels_opt = augment->add_option("--min-pixels", aa.min_pixels, "smallest accepted composite");
  augment->add_option("--max-attempts", aa.max_attempts, "region redraws before skipping an entry")
      ->check(CLI::PositiveNumber);
  augment->add_option("--palette", aa.palette, "palette for entries without worn_cloth_mask");
  add_config(augment);

  MaskOpsArgs ma;
  auto *maskops = app.add_subcommand("maskops", "build parsing-network inputs, targets and degraded layouts");
  maskops->add_option("--manifest", ma.manifest, "dataset manifest")->required();
  maskops->add_option("--palette", ma.palette, "palette JSON")->required();
  maskops->add_option("--irregular", ma.irregular, "directory of irregular-mask PNGs")->required();
  maskops->add_option("--seed", ma.seed, "global seed");
  maskops->add_option("--out", ma.out, "output directory")->required();
  add_config(maskops);

  WarpArgs wa;
  auto *warp = app.add_subcommand("warp", "backward-warp an image by a FLO2 flow field");
  warp->add_option("--image", wa.image, "input PNG")->required();
  warp->add_option("--flow", wa.flow, "FLO2 flow file")->required();
  warp->add_option("--out", wa.out, "output PNG")->required();
  warp->add_flag("--mask", wa.mask, "treat the input as a binary mask");

  SmoothnessArgs sa;
  auto *smooth = app.add_subcommand("smoothness", "second-order charbonnier smoothness of a flow pyramid");
  smooth->add_option("--flow", sa.flows, "FLO2 files, one per scale, coarse to fine")->required();
  sa.eps_opt = smooth->add_option("--epsilon", sa.epsilon, "charbonnier epsilon (default 1e-3)");
  sa.alpha_opt = smooth->add_option("--alpha", sa.alpha, "charbonnier exponent (default 0.45)");
  smooth->add_option("--out", sa.out, "report JSON (default stdout)");
  add_config(smooth);

  LossArgs la;
  auto *loss = app.add_subcommand("loss", "L1, perceptual and combined loss between two images");
  loss->add_option("--generated", la.generated, "generated PNG")->required();
  loss->add_option("--reference", la.reference, "reference PNG")->required();
  loss->add_option("--gen-features", la.gen_features, "FTEN features of the generated image");
  loss->add_option("--ref-features", la.ref_features, "FTEN features of the reference image");
  loss->add_option("--seed", la.seed, "seed of the built-in feature bank");
  la.al_opt = loss->add_option("--alpha-l", la.alpha_l, "L1 weight");
  la.ap_opt = loss->add_option("--alpha-p", la.alpha_p, "perceptual weight");
  loss->add_option("--out", la.out, "report JSON (default stdout)");
  add_config(loss);

  FidArgs fa;
  auto *fid = app.add_subcommand("fid", "per-region Frechet distance report");
  fid->add_option("--gen-manifest", fa.gen_manifest, "manifest of generated images")->required();
  fid->add_option("--real-manifest", fa.real_manifest, "manifest of real images")->required();
  fid->add_option("--regions", fa.regions, "region sets JSON (name -> [region ids])")->required();
  fid->add_option("--features-dir", fa.features_dir, "directory of <crop hash>.ften files");
  fa.builtin_opt = fid->add_option("--builtin-seed", fa.builtin_seed, "use the built-in feature bank");
  fid->add_option("--export-crops", fa.export_crops, "write <crop hash>.png crops here");
  fid->add_option("--crop-size", fa.crop_size, "side of the square region crops")->check(CLI::Range(8, 4096));
  fid->add_option("--out", fa.out, "report JSON (default stdout)");

  StatsArgs sta;
  auto *stats = app.add_subcommand("stats", "per-class pixel frequencies of a corpus");
  stats->add_option("--manifest", sta.manifest, "dataset manifest")->required();
  stats->add_option("--palette", sta.palette, "palette JSON")->required();
  stats->add_option("--out", sta.out, "report JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*classify)
      return run_classify(ca, common);
    if (*augment)
      return run_augment(aa, common);
    if (*maskops)
      return run_maskops(ma, common);
    if (*warp)
      return run_warp(wa, common);
    if (*smooth)
      return run_smoothness(sa, common);
    if (*loss)
      return run_loss(la, common);
    if (*fid)
      return run_fid(fa, common);
    if (*stats)
      return run_stats(sta, common);
  } catch (const InputError &e) {
    std::cerr << "occlumix " << name << ": input error: " << e.what() << "\n";
    return 1;
  } catch (const DegenerateInputError &e) {
    std::cerr << "occlumix " << name << ": degenerate input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError &e) {
    std::cerr << "occlumix " << name << ": numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "occlumix " << name << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}
