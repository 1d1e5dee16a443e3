#pragma once

// Occlusion-region selection and the copy-paste compositor:
//   C = y_A^r * y_B^c,   x~ = C * x_B + (1 - C) * x_A

#include "occlumix/core_types.hpp"
#include "occlumix/mask_algebra.hpp"
#include "occlumix/random.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace occlumix {

/// Relative occlusion frequency per body-part region id.
class OcclusionDistribution {
public:
  OcclusionDistribution() = default;
  explicit OcclusionDistribution(std::map<int, double> weights) : weights_(std::move(weights)) {
    bool any_positive = false;
    for (const auto &[id, w] : weights_) {
      detail::require(id >= 1 && id <= 255, "occlusion distribution region id " + std::to_string(id) +
                                                " must be in 1..255");
      detail::require(std::isfinite(w) && w >= 0.0, "occlusion weights must be finite and non-negative");
      any_positive = any_positive || w > 0.0;
    }
    detail::require(any_positive, "occlusion distribution needs at least one positive weight");
  }

  const std::map<int, double> &weights() const noexcept { return weights_; }

private:
  std::map<int, double> weights_;
};

struct RegionSelection {
  int region_id = 0;
  BinaryMask mask;
};

/// Samples a region id from the distribution restricted to regions present
/// in the map (weights renormalized), and returns that region's indicator.
inline RegionSelection select_occlusion_region(const PartRegionMap &regions, const OcclusionDistribution &dist,
                                               Rng &rng) {
  detail::require(regions.pixel_count() > 0, "region map is empty");
  std::vector<bool> present(256, false);
  for (auto v : regions.data())
    present[v] = true;

  std::vector<std::pair<int, double>> candidates;
  double total = 0.0;
  for (const auto &[id, w] : dist.weights())
    if (w > 0.0 && present[static_cast<std::size_t>(id)]) {
      candidates.emplace_back(id, w);
      total += w;
    }
  if (candidates.empty())
    throw DegenerateInputError("none of the distribution's regions occur in the region map");

  const double u = rng.uniform01() * total;
  int chosen = candidates.back().first;
  double acc = 0.0;
  for (const auto &[id, w] : candidates) {
    acc += w;
    if (u < acc) {
      chosen = id;
      break;
    }
  }
  return {chosen, extract_region_mask(regions, {chosen})};
}

inline RegionSelection select_occlusion_region(const PartRegionMap &regions, const OcclusionDistribution &dist,
                                               std::uint64_t seed) {
  Rng rng(seed);
  return select_occlusion_region(regions, dist, rng);
}

struct OccluMixSample {
  ImageBuffer image;    // x~
  BinaryMask composite; // C
  int region_used = 0;
  std::string partner_id;
};

/// Hard copy-paste: partner pixels where C = 1, original pixels elsewhere.
inline OccluMixSample compose_occlumix(const ImageBuffer &x_a, const ImageBuffer &x_b, const BinaryMask &region,
                                       const BinaryMask &partner_cloth) {
  detail::require(x_a.size() == x_b.size() && x_a.channels() == x_b.channels(),
                  "compose_occlumix: images differ in shape");
  detail::require(region.size() == x_a.size(), "compose_occlumix: region mask does not match the image");
  detail::require(partner_cloth.size() == x_a.size(), "compose_occlumix: cloth mask does not match the image");

  BinaryMask composite = mask_intersect(region, partner_cloth);
  const int c = x_a.channels();
  std::vector<double> out(x_a.data().begin(), x_a.data().end());
  auto src_b = x_b.data();
  auto cm = composite.data();
  for (std::size_t p = 0; p < cm.size(); ++p)
    if (cm[p])
      for (int k = 0; k < c; ++k)
        out[p * c + k] = src_b[p * c + k];
  return {ImageBuffer(x_a.width(), x_a.height(), c, std::move(out)), std::move(composite), 0, {}};
}

/// Integer shift that moves the cloth mask's centroid onto the region's.
inline std::optional<std::pair<int, int>> alignment_shift(const BinaryMask &partner_cloth, const BinaryMask &region) {
  auto from = centroid(partner_cloth);
  auto to = centroid(region);
  if (!from || !to)
    return std::nullopt;
  return std::pair{static_cast<int>(std::lround(to->x - from->x)), static_cast<int>(std::lround(to->y - from->y))};
}

struct ComposeOptions {
  bool align = true;
  std::size_t min_pixels = 16;
  int max_attempts = 8;
};

struct ComposeOutcome {
  std::optional<OccluMixSample> sample;
  int attempts = 0;
  int shift_x = 0;
  int shift_y = 0;
  std::string skip_reason;
};

/// Region selection plus compositing with resampling: redraws the region
/// until C has at least `min_pixels` pixels or attempts run out. With
/// alignment on, the partner image and cloth mask are shifted together so
/// their cloth centroid sits on the region centroid.
inline ComposeOutcome compose_with_retries(const ImageBuffer &x_a, const PartRegionMap &regions,
                                           const ImageBuffer &x_b, const BinaryMask &partner_cloth,
                                           const OcclusionDistribution &dist, const ComposeOptions &opt, Rng &rng) {
  detail::require(regions.size() == x_a.size(), "region map does not match the person image");
  detail::require(opt.max_attempts >= 1, "max_attempts must be positive");
  ComposeOutcome out;
  for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
    out.attempts = attempt;
    RegionSelection sel = select_occlusion_region(regions, dist, rng);
    int sx = 0, sy = 0;
    if (opt.align) {
      if (auto s = alignment_shift(partner_cloth, sel.mask)) {
        sx = s->first;
        sy = s->second;
      }
    }
    const ImageBuffer shifted_b = (sx || sy) ? translate(x_b, sx, sy) : x_b;
    const BinaryMask shifted_cloth = (sx || sy) ? translate(partner_cloth, sx, sy) : partner_cloth;
    OccluMixSample s = compose_occlumix(x_a, shifted_b, sel.mask, shifted_cloth);
    if (s.composite.count() >= opt.min_pixels) {
      s.region_used = sel.region_id;
      out.sample = std::move(s);
      out.shift_x = sx;
      out.shift_y = sy;
      return out;
    }
  }
  out.skip_reason = "composite smaller than " + std::to_string(opt.min_pixels) + " pixels after " +
                    std::to_string(opt.max_attempts) + " attempts";
  return out;
}

} // namespace occlumix
