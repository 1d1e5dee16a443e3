#pragma once

// Manifest-driven batch entry points used by the command-line tool:
// texture classification, OccluMix synthesis, parsing-network sample
// construction and per-region Frechet evaluation.

#include "occlumix/dataset_io.hpp"
#include "occlumix/fid_eval.hpp"
#include "occlumix/mask_algebra.hpp"
#include "occlumix/occlumix_compose.hpp"
#include "occlumix/parallel.hpp"
#include "occlumix/texture_glcm.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace occlumix {

// ---------------------------------------------------------------------------
// Occlusion distribution file
// ---------------------------------------------------------------------------

/// {"<region id>": weight, ...}
inline OcclusionDistribution parse_occlusion_distribution(const json &j, int region_count = kDefaultRegionCount) {
  if (!j.is_object())
    throw InputError("occlusion distribution must be a JSON object of region id -> weight");
  std::map<int, double> weights;
  for (const auto &[key, value] : j.items()) {
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size())
        throw std::invalid_argument(key);
    } catch (const std::exception &) {
      throw InputError("occlusion distribution key '" + key + "' is not a region id");
    }
    if (id < 1 || id > region_count)
      throw InputError("occlusion distribution region " + key + " is outside 1.." + std::to_string(region_count));
    if (!value.is_number())
      throw InputError("occlusion distribution weight for region " + key + " must be a number");
    weights[id] = value.get<double>();
  }
  return OcclusionDistribution(std::move(weights));
}

inline OcclusionDistribution load_occlusion_distribution(const fs::path &path,
                                                         int region_count = kDefaultRegionCount) {
  return parse_occlusion_distribution(read_json_file(path), region_count);
}

// ---------------------------------------------------------------------------
// Texture classification
// ---------------------------------------------------------------------------

struct ClassifiedEntry {
  std::string id;
  std::optional<TextureClass> result;
  std::string error;
};

struct ClassifyResult {
  std::vector<ClassifiedEntry> entries; // manifest order
  TexturePools pools;
};

/// Entropy of each entry's in-shop garment (cloth_image restricted to
/// cloth_mask when given), split into complex / simple pools.
inline ClassifyResult classify_corpus(const DatasetManifest &manifest, const GlcmParams &glcm, double threshold,
                                      unsigned threads) {
  ClassifyResult out;
  out.entries.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    const auto &e = manifest.entries[i];
    auto &row = out.entries[i];
    row.id = e.id;
    try {
      const ImageBuffer cloth = load_image(manifest.path_of(e, "cloth_image"));
      std::optional<BinaryMask> mask;
      if (e.get("cloth_mask"))
        mask = load_mask(manifest.path_of(e, "cloth_mask"));
      row.result = classify_texture(cloth_texture_entropy(cloth, mask ? &*mask : nullptr, glcm), threshold);
    } catch (const InputError &err) {
      row.error = err.what();
    } catch (const DegenerateInputError &err) {
      row.error = err.what();
    }
  });
  for (const auto &row : out.entries)
    if (row.result)
      (row.result->label == TextureLabel::complex ? out.pools.complex : out.pools.simple).push_back(row.id);
  return out;
}

// ---------------------------------------------------------------------------
// OccluMix batch synthesis
// ---------------------------------------------------------------------------

struct AugmentOptions {
  double lambda = 0.5;
  std::uint64_t seed = 0;
  ComposeOptions compose;
  unsigned threads = 1;
  std::shared_ptr<const Palette> palette; // needed when partners lack worn_cloth_mask
};

struct AugmentRecord {
  std::string id;
  bool ok = false;
  std::string reason;
  json metadata;
};

struct BatchReport {
  std::vector<AugmentRecord> records; // manifest order
  std::size_t succeeded() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](auto &r) { return r.ok; }));
  }
  std::size_t skipped() const { return records.size() - succeeded(); }
  json to_json() const {
    json skips = json::array();
    for (const auto &r : records)
      if (!r.ok)
        skips.push_back({{"id", r.id}, {"reason", r.reason}});
    return json{{"entries", records.size()}, {"succeeded", succeeded()}, {"skipped", skipped()}, {"skips", skips}};
  }
};

/// Worn-garment mask of a manifest entry: worn_cloth_mask if present,
/// otherwise the palette's cloth classes in its label map.
inline BinaryMask worn_cloth_mask(const DatasetManifest &m, const ManifestEntry &e,
                                  const std::shared_ptr<const Palette> &palette) {
  if (e.get("worn_cloth_mask"))
    return load_mask(m.path_of(e, "worn_cloth_mask"));
  if (e.get("label_map") && palette) {
    const LabelMap labels = load_label_map(m.path_of(e, "label_map"), palette);
    detail::require(!palette->cloth_ids.empty(), "palette defines no cloth classes");
    return extract_class_mask(labels, std::set<int>(palette->cloth_ids.begin(), palette->cloth_ids.end()));
  }
  throw InputError("entry '" + e.id + "' has neither worn_cloth_mask nor label_map with a palette");
}

/// One OccluMix sample per manifest entry. Entry i uses its own generator
/// seeded with derive_seed(seed, i); outputs do not depend on thread count.
/// Writes <id>.png, <id>_composite.png, <id>.json and report.json.
inline BatchReport synthesize_batch(const DatasetManifest &manifest, const TexturePools &pools,
                                    const OcclusionDistribution &dist, const AugmentOptions &opt,
                                    const fs::path &out_dir) {
  detail::require(opt.lambda >= 0.0 && opt.lambda <= 1.0, "lambda must lie in [0, 1]");
  fs::create_directories(out_dir);
  BatchReport report;
  report.records.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), opt.threads, [&](std::size_t i) {
    const auto &e = manifest.entries[i];
    auto &rec = report.records[i];
    rec.id = e.id;
    try {
      const std::uint64_t entry_seed = derive_seed(opt.seed, i);
      Rng rng(entry_seed);
      const ImageBuffer x_a = load_image(manifest.path_of(e, "person_image"));
      const PartRegionMap regions = load_region_map(manifest.path_of(e, "region_map"));
      if (regions.size() != x_a.size())
        throw InputError("region map " + to_string(regions.size()) + " does not match person image " +
                         to_string(x_a.size()));

      const PartnerDraw partner = sample_partner(pools, opt.lambda, rng);
      const ManifestEntry *pe = manifest.find(partner.id);
      if (!pe)
        throw InputError("partner '" + partner.id + "' is not in the manifest");
      ImageBuffer x_b = load_image(manifest.path_of(*pe, "person_image"));
      BinaryMask cloth_b = worn_cloth_mask(manifest, *pe, opt.palette);
      if (x_b.channels() != x_a.channels())
        throw InputError("partner '" + partner.id + "' has a different channel count");
      x_b = resize_bilinear(x_b, x_a.width(), x_a.height());
      cloth_b = resize_nearest(cloth_b, x_a.width(), x_a.height());

      ComposeOutcome res = compose_with_retries(x_a, regions, x_b, cloth_b, dist, opt.compose, rng);
      if (!res.sample) {
        rec.reason = res.skip_reason;
        return;
      }
      const std::string image_name = e.id + ".png";
      const std::string composite_name = e.id + "_composite.png";
      save_image(out_dir / image_name, res.sample->image);
      save_mask(out_dir / composite_name, res.sample->composite);
      rec.metadata = json{{"id", e.id},
                          {"partner_id", partner.id},
                          {"partner_pool", partner.from_complex ? "complex" : "simple"},
                          {"pool_fallback", partner.fell_back},
                          {"lambda", opt.lambda},
                          {"lambda_draw", partner.draw},
                          {"region_used", res.sample->region_used},
                          {"seed", opt.seed},
                          {"entry_seed", entry_seed},
                          {"aligned", opt.compose.align},
                          {"translation", {res.shift_x, res.shift_y}},
                          {"attempts", res.attempts},
                          {"composite_pixels", res.sample->composite.count()},
                          {"image", image_name},
                          {"composite", composite_name}};
      write_text_file(out_dir / (e.id + ".json"), rec.metadata.dump(2) + "\n");
      rec.ok = true;
    } catch (const InputError &err) {
      rec.reason = err.what();
    } catch (const DegenerateInputError &err) {
      rec.reason = err.what();
    }
  });
  write_text_file(out_dir / "report.json", report.to_json().dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------
// Parsing-network sample construction
// ---------------------------------------------------------------------------

struct MaskOpsOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Sorted list of PNG files in a directory.
inline std::vector<fs::path> list_pngs(const fs::path &dir) {
  if (!fs::is_directory(dir))
    throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto &de : fs::directory_iterator(dir))
    if (de.is_regular_file() && de.path().extension() == ".png")
      out.push_back(de.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// For each entry (label_map, warped_cloth_mask, pose) writes the generator
/// input/target and the restorer's degraded layout, using one irregular
/// mask drawn from `irregular_dir` and placed with the entry's seed.
inline BatchReport build_spn_batch(const DatasetManifest &manifest, const std::shared_ptr<const Palette> &palette,
                                   const fs::path &irregular_dir, const MaskOpsOptions &opt,
                                   const fs::path &out_dir) {
  const auto hole_files = list_pngs(irregular_dir);
  if (hole_files.empty())
    throw DegenerateInputError("no irregular masks in " + irregular_dir.string());
  fs::create_directories(out_dir);
  BatchReport report;
  report.records.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), opt.threads, [&](std::size_t i) {
    const auto &e = manifest.entries[i];
    auto &rec = report.records[i];
    rec.id = e.id;
    try {
      const std::uint64_t entry_seed = derive_seed(opt.seed, i);
      Rng rng(entry_seed);
      const LabelMap labels = load_label_map(manifest.path_of(e, "label_map"), palette);
      const BinaryMask tryon_cloth = load_mask(manifest.path_of(e, "warped_cloth_mask"));
      const PoseKeypoints pose = load_pose(manifest.path_of(e, "pose"));
      const auto &hole_file = hole_files[rng.uniform_index(hole_files.size())];
      const BinaryMask holes = place_irregular_mask(load_mask(hole_file), labels.size(), rng);
      const SpnSample s = build_spn_samples(labels, tryon_cloth, pose, holes);

      const ImageBuffer heat =
          rasterize_pose(s.pose, labels.width(), labels.height(), default_pose_sigma(labels.height()));
      std::vector<double> peak(static_cast<std::size_t>(labels.width()) * labels.height(), 0.0);
      for (std::size_t p = 0; p < peak.size(); ++p)
        for (int j = 0; j < kPoseJointCount; ++j)
          peak[p] = std::max(peak[p], heat.data()[p * kPoseJointCount + static_cast<std::size_t>(j)]);

      save_mask(out_dir / (e.id + "_potential_body.png"), s.potential_body);
      save_mask(out_dir / (e.id + "_target_body.png"), s.target_body);
      save_mask(out_dir / (e.id + "_degraded_body.png"), s.degraded_layout.body);
      save_mask(out_dir / (e.id + "_degraded_cloth.png"), s.degraded_layout.cloth);
      save_image(out_dir / (e.id + "_pose.png"), ImageBuffer(labels.width(), labels.height(), 1, std::move(peak)));
      rec.metadata = json{{"id", e.id},
                          {"seed", opt.seed},
                          {"entry_seed", entry_seed},
                          {"irregular_mask", hole_file.filename().string()}};
      write_text_file(out_dir / (e.id + ".json"), rec.metadata.dump(2) + "\n");
      rec.ok = true;
    } catch (const InputError &err) {
      rec.reason = err.what();
    }
  });
  write_text_file(out_dir / "report.json", report.to_json().dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------
// Per-region Frechet evaluation
// ---------------------------------------------------------------------------

using RegionSets = std::map<std::string, std::set<int>>;

/// {"name": [region ids], ...}
inline RegionSets parse_region_sets(const json &j) {
  if (!j.is_object() || j.empty())
    throw InputError("region sets must be a non-empty JSON object of name -> [region ids]");
  RegionSets out;
  for (const auto &[name, ids] : j.items()) {
    if (!ids.is_array() || ids.empty())
      throw InputError("region set '" + name + "' must be a non-empty array of ids");
    for (const auto &id : ids) {
      if (!id.is_number_integer() || id.get<int>() < 1 || id.get<int>() > 255)
        throw InputError("region set '" + name + "' contains an invalid id");
      out[name].insert(id.get<int>());
    }
  }
  return out;
}

/// Masked crop of one region set: outside pixels become mid-gray, the tight
/// bounding box is cut out and resized to crop_size x crop_size. Returns
/// nothing when the region is absent from the image.
inline std::optional<ImageBuffer> region_crop(const ImageBuffer &img, const PartRegionMap &regions,
                                              const std::set<int> &ids, int crop_size) {
  detail::require(regions.size() == img.size(), "region map does not match the image");
  const BinaryMask mask = extract_region_mask(regions, ids);
  const auto box = bounding_box(mask);
  if (!box)
    return std::nullopt;
  const int c = img.channels();
  std::vector<double> masked(img.data().begin(), img.data().end());
  for (std::size_t p = 0; p < mask.pixel_count(); ++p)
    if (!mask.data()[p])
      for (int k = 0; k < c; ++k)
        masked[p * static_cast<std::size_t>(c) + static_cast<std::size_t>(k)] = 0.5;
  const ImageBuffer grayed(img.width(), img.height(), c, std::move(masked));
  return resize_bilinear(crop(grayed, *box), crop_size, crop_size);
}

struct FidOptions {
  std::optional<fs::path> features_dir;     // <hash>.ften lookups
  std::optional<std::uint64_t> builtin_seed; // use the built-in bank instead
  std::optional<fs::path> export_crops;     // write <hash>.png crops here
  int crop_size = 64;
  unsigned threads = 1;
};

namespace detail {

struct CropFeature {
  std::optional<std::vector<double>> vec;
  std::string missing; // non-empty when a feature file was not found
};

inline CropFeature crop_feature(const ImageBuffer &crop_img, const FidOptions &opt) {
  const std::string hash = content_hash(crop_img);
  if (opt.export_crops)
    save_image(*opt.export_crops / (hash + ".png"), crop_img);
  if (opt.builtin_seed)
    return {pooled_descriptor(builtin_feature_stack(crop_img, *opt.builtin_seed)), {}};
  const fs::path file = *opt.features_dir / (hash + ".ften");
  if (!fs::exists(file))
    return {std::nullopt, hash + ".ften"};
  return {flatten(load_features(file)), {}};
}

} // namespace detail

/// Collects per-row feature vectors for one side (generated or real).
inline void collect_region_features(const DatasetManifest &manifest, const RegionSets &sets, const FidOptions &opt,
                                    const char *side, std::map<std::string, RowSamples> &rows,
                                    RowSamples &overall, bool generated) {
  struct PerImage {
    std::map<std::string, detail::CropFeature> rows;
    detail::CropFeature overall;
  };
  std::vector<PerImage> results(manifest.entries.size());
  parallel_for(manifest.entries.size(), opt.threads, [&](std::size_t i) {
    const auto &e = manifest.entries[i];
    const ImageBuffer img = load_image(manifest.path_of(e, "person_image"));
    const PartRegionMap regions = load_region_map(manifest.path_of(e, "region_map"));
    for (const auto &[name, ids] : sets)
      if (auto c = region_crop(img, regions, ids, opt.crop_size))
        results[i].rows[name] = detail::crop_feature(*c, opt);
    results[i].overall = detail::crop_feature(resize_bilinear(img, opt.crop_size, opt.crop_size), opt);
  });

  auto absorb = [&](RowSamples &row, const detail::CropFeature &f, const std::string &id) {
    if (f.vec)
      (generated ? row.generated : row.real).push_back(*f.vec);
    else if (!row.error)
      row.error = "missing feature file " + f.missing + " (" + side + " entry '" + id + "')";
  };
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto &id = manifest.entries[i].id;
    for (const auto &[name, f] : results[i].rows)
      absorb(rows[name], f, id);
    absorb(overall, results[i].overall, id);
  }
}

inline RegionReport region_fid(const DatasetManifest &generated, const DatasetManifest &real, const RegionSets &sets,
                               const FidOptions &opt) {
  detail::require(opt.features_dir || opt.builtin_seed, "region_fid needs a features directory or the builtin bank");
  detail::require(opt.crop_size >= 8, "crop size must be at least 8");
  if (opt.export_crops)
    fs::create_directories(*opt.export_crops);
  std::map<std::string, RowSamples> rows;
  for (const auto &[name, ids] : sets)
    rows[name];
  RowSamples overall;
  collect_region_features(generated, sets, opt, "generated", rows, overall, true);
  collect_region_features(real, sets, opt, "real", rows, overall, false);
  return score_regions(rows, overall);
}

inline json to_json(const RegionRow &row) {
  json j{{"status", to_string(row.status)},
         {"generated_samples", row.generated_samples},
         {"real_samples", row.real_samples}};
  j["fid"] = row.fid ? json(*row.fid) : json(nullptr);
  if (!row.detail.empty())
    j["detail"] = row.detail;
  return j;
}

/// Rows in region-set order followed by the whole-image column.
inline json to_json(const RegionReport &report) {
  json rows = json::object();
  json table = json::object();
  for (const auto &[name, row] : report.rows) {
    rows[name] = to_json(row);
    table[name] = row.fid ? json(*row.fid) : json(nullptr);
  }
  table["overall"] = report.overall.fid ? json(*report.overall.fid) : json(nullptr);
  return json{{"rows", rows}, {"overall", to_json(report.overall)}, {"table", table}};
}

} // namespace occlumix
