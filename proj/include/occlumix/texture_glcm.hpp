#pragma once

#include "occlumix/core_types.hpp"
#include "occlumix/random.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace occlumix {

/// Distance-1 horizontal, vertical and both diagonal neighbours.
inline std::vector<Offset> default_glcm_offsets() { return {{0, 1}, {1, 0}, {1, 1}, {1, -1}}; }

struct GlcmParams {
  int levels = 32;
  std::vector<Offset> offsets = default_glcm_offsets();
};

/// Normalized symmetric gray-level co-occurrence matrix.
class GlcmMatrix {
public:
  GlcmMatrix(int levels, std::vector<double> entries, std::uint64_t pair_count)
      : levels_(levels), entries_(std::move(entries)), pair_count_(pair_count) {}

  int levels() const noexcept { return levels_; }
  double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * levels_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }
  /// Number of ordered pairs accumulated (both directions counted).
  std::uint64_t pair_count() const noexcept { return pair_count_; }

private:
  int levels_;
  std::vector<double> entries_;
  std::uint64_t pair_count_;
};

/// Uniform quantization of [0, 1] into `levels` bins; 1.0 lands in the top bin.
inline int quantize_level(double v, int levels) {
  return std::min(levels - 1, static_cast<int>(std::floor(v * levels)));
}

/// Counts (p, p + offset) gray-level pairs where both pixels are in bounds
/// and, if a mask is given, both are inside it. Each pair is counted in both
/// directions, so the result is symmetric.
inline GlcmMatrix compute_glcm(const ImageBuffer &gray, const BinaryMask *mask, int levels,
                               std::span<const Offset> offsets) {
  detail::require(gray.channels() == 1, "GLCM needs a single-channel image");
  detail::require(levels >= 2, "GLCM needs at least 2 gray levels");
  detail::require(!offsets.empty(), "GLCM needs at least one offset");
  if (mask)
    detail::require(mask->size() == gray.size(), "GLCM mask dimensions differ from the image");

  const int w = gray.width();
  const int h = gray.height();
  std::vector<int> q(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      q[static_cast<std::size_t>(y) * w + x] = quantize_level(gray.at(x, y), levels);

  auto inside = [&](int x, int y) { return mask == nullptr || mask->test(x, y); };

  std::vector<std::uint64_t> counts(static_cast<std::size_t>(levels) * levels, 0);
  std::uint64_t total = 0;
  for (const auto &off : offsets) {
    for (int y = 0; y < h; ++y) {
      const int y2 = y + off.dr;
      if (y2 < 0 || y2 >= h)
        continue;
      for (int x = 0; x < w; ++x) {
        const int x2 = x + off.dc;
        if (x2 < 0 || x2 >= w || !inside(x, y) || !inside(x2, y2))
          continue;
        const int a = q[static_cast<std::size_t>(y) * w + x];
        const int b = q[static_cast<std::size_t>(y2) * w + x2];
        ++counts[static_cast<std::size_t>(a) * levels + b];
        ++counts[static_cast<std::size_t>(b) * levels + a];
        total += 2;
      }
    }
  }
  if (total == 0)
    throw DegenerateInputError("GLCM has no co-occurring pixel pairs (mask too small?)");

  std::vector<double> entries(counts.size());
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i)
    entries[i] = static_cast<double>(counts[i]) * inv;
  return GlcmMatrix(levels, std::move(entries), total);
}

inline GlcmMatrix compute_glcm(const ImageBuffer &gray, const BinaryMask *mask, const GlcmParams &params) {
  return compute_glcm(gray, mask, params.levels, params.offsets);
}

/// -sum G ln G in nats, with 0 ln 0 = 0.
inline double glcm_entropy(const GlcmMatrix &g) {
  double ent = 0.0;
  for (double p : g.entries())
    if (p > 0.0)
      ent -= p * std::log(p);
  return std::max(ent, 0.0);
}

inline constexpr double kDefaultEntropyThreshold = 2.5;

enum class TextureLabel { simple = 0, complex = 1 };

inline const char *to_string(TextureLabel l) { return l == TextureLabel::complex ? "complex" : "simple"; }

struct TextureClass {
  double entropy = 0.0;
  TextureLabel label = TextureLabel::simple;
};

/// Complex iff entropy >= threshold.
inline TextureClass classify_texture(double entropy, double threshold = kDefaultEntropyThreshold) {
  detail::require(std::isfinite(threshold), "entropy threshold must be finite");
  return {entropy, entropy >= threshold ? TextureLabel::complex : TextureLabel::simple};
}

/// GLCM entropy of a garment image restricted to its mask (luma grayscale).
inline double cloth_texture_entropy(const ImageBuffer &cloth, const BinaryMask *cloth_mask,
                                    const GlcmParams &params = {}) {
  const ImageBuffer gray = to_grayscale(cloth);
  return glcm_entropy(compute_glcm(gray, cloth_mask, params));
}

struct TexturePools {
  std::vector<std::string> complex;
  std::vector<std::string> simple;
};

struct PartnerDraw {
  std::string id;
  double draw = 0.0;          // uniform value compared against lambda
  bool from_complex = false;  // pool the id actually came from
  bool fell_back = false;     // requested pool was empty
};

/// Draws a mixup partner: complex pool with probability lambda, simple pool
/// otherwise, uniform within the pool. Falls back to the other pool when
/// the requested one is empty.
inline PartnerDraw sample_partner(const TexturePools &pools, double lambda, Rng &rng) {
  detail::require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  if (pools.complex.empty() && pools.simple.empty())
    throw DegenerateInputError("both texture pools are empty");
  PartnerDraw out;
  out.draw = rng.uniform01();
  bool want_complex = out.draw < lambda;
  const auto &wanted = want_complex ? pools.complex : pools.simple;
  if (wanted.empty()) {
    out.fell_back = true;
    want_complex = !want_complex;
  }
  const auto &pool = want_complex ? pools.complex : pools.simple;
  out.from_complex = want_complex;
  out.id = pool[rng.uniform_index(pool.size())];
  return out;
}

inline PartnerDraw sample_partner(const TexturePools &pools, double lambda, std::uint64_t seed) {
  Rng rng(seed);
  return sample_partner(pools, lambda, rng);
}

} // namespace occlumix
