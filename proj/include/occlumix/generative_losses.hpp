#pragma once

#include "occlumix/core_types.hpp"
#include "occlumix/random.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace occlumix {

/// C x H x W real tensor (planar), e.g. one level of a CNN feature pyramid.
class FeatureMap {
public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width, std::vector<double> data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    detail::require(channels >= 1 && height >= 1 && width >= 1, "feature map dimensions must be positive");
    detail::require(data_.size() == static_cast<std::size_t>(channels) * height * width,
                    "feature map data length does not match C x H x W");
    for (double v : data_)
      detail::require(std::isfinite(v), "feature values must be finite");
  }

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::span<const double> data() const noexcept { return data_; }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  bool same_shape(const FeatureMap &o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

  friend bool operator==(const FeatureMap &, const FeatureMap &) = default;

private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

using FeatureStack = std::vector<FeatureMap>;

namespace detail {

inline double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::abs(a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

} // namespace detail

/// Mean absolute difference over every pixel and channel.
inline double l1_loss(const ImageBuffer &generated, const ImageBuffer &reference) {
  if (generated.size() != reference.size() || generated.channels() != reference.channels())
    throw InputError("l1_loss: image shapes differ");
  return detail::mean_abs_diff(generated.data(), reference.data());
}

/// Sum over levels of the per-level mean absolute difference.
inline double perceptual_loss(const FeatureStack &generated, const FeatureStack &reference) {
  if (generated.size() != reference.size())
    throw InputError("perceptual_loss: stacks have " + std::to_string(generated.size()) + " and " +
                     std::to_string(reference.size()) + " levels");
  double total = 0.0;
  for (std::size_t m = 0; m < generated.size(); ++m) {
    if (!generated[m].same_shape(reference[m]))
      throw InputError("perceptual_loss: level " + std::to_string(m) + " shapes differ");
    total += detail::mean_abs_diff(generated[m].data(), reference[m].data());
  }
  return total;
}

struct LossWeights {
  double alpha_l = 1.0;
  double alpha_p = 1.0;

  void validate() const {
    detail::require(std::isfinite(alpha_l) && std::isfinite(alpha_p) && alpha_l >= 0.0 && alpha_p >= 0.0,
                    "loss weights must be finite and non-negative");
    detail::require(alpha_l > 0.0 || alpha_p > 0.0, "loss weights must not both be zero");
  }
};

inline double combined_loss(double l1, double perceptual, const LossWeights &w = {}) {
  w.validate();
  detail::require(std::isfinite(l1) && std::isfinite(perceptual), "loss terms must be finite");
  return w.alpha_l * l1 + w.alpha_p * perceptual;
}

namespace detail {

/// Random kernels of shape out x (in * 3 * 3) with orthonormal rows
/// (Gram-Schmidt over Gaussian draws).
inline std::vector<double> orthonormal_kernels(int out_ch, int in_ch, Rng &rng) {
  const std::size_t fan_in = static_cast<std::size_t>(in_ch) * 9;
  std::vector<double> k(static_cast<std::size_t>(out_ch) * fan_in);
  for (int o = 0; o < out_ch; ++o) {
    double *row = &k[static_cast<std::size_t>(o) * fan_in];
    for (;;) {
      for (std::size_t i = 0; i < fan_in; ++i)
        row[i] = rng.normal();
      for (int p = 0; p < o; ++p) {
        const double *prev = &k[static_cast<std::size_t>(p) * fan_in];
        double dot = 0.0;
        for (std::size_t i = 0; i < fan_in; ++i)
          dot += row[i] * prev[i];
        for (std::size_t i = 0; i < fan_in; ++i)
          row[i] -= dot * prev[i];
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < fan_in; ++i)
        norm += row[i] * row[i];
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (std::size_t i = 0; i < fan_in; ++i)
          row[i] /= norm;
        break;
      }
    }
  }
  return k;
}

/// 3x3 convolution, stride 2, zero padding 1, followed by |.|.
inline FeatureMap conv3x3_s2_abs(const FeatureMap &in, const std::vector<double> &kernels, int out_ch) {
  const int oh = (in.height() + 1) / 2;
  const int ow = (in.width() + 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(out_ch) * oh * ow, 0.0);
  const std::size_t fan_in = static_cast<std::size_t>(in.channels()) * 9;
  for (int o = 0; o < out_ch; ++o) {
    const double *k = &kernels[static_cast<std::size_t>(o) * fan_in];
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int c = 0; c < in.channels(); ++c)
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = 2 * y + ky - 1;
            if (sy < 0 || sy >= in.height())
              continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = 2 * x + kx - 1;
              if (sx < 0 || sx >= in.width())
                continue;
              acc += k[(static_cast<std::size_t>(c) * 3 + ky) * 3 + kx] * in.at(c, sy, sx);
            }
          }
        out[(static_cast<std::size_t>(o) * oh + y) * ow + x] = std::abs(acc);
      }
  }
  return FeatureMap(out_ch, oh, ow, std::move(out));
}

} // namespace detail

/// Channel widths of the built-in bank's three levels.
inline constexpr std::array<int, 3> kBuiltinBankWidths{8, 16, 32};

/// Deterministic stand-in feature extractor for end-to-end testing of the
/// perceptual path: three stride-2 conv levels with seeded orthonormal
/// kernels and an absolute-value nonlinearity.
inline FeatureStack builtin_feature_stack(const ImageBuffer &img, std::uint64_t bank_seed) {
  detail::require(img.channels() == 3, "builtin feature bank expects a 3-channel image");
  detail::require(img.width() >= 1 && img.height() >= 1, "builtin feature bank needs a non-empty image");
  std::vector<double> planar(img.data().size());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c)
        planar[(static_cast<std::size_t>(c) * img.height() + y) * img.width() + x] = img.at(x, y, c);
  FeatureMap level(3, img.height(), img.width(), std::move(planar));

  Rng rng(bank_seed);
  FeatureStack stack;
  int in_ch = 3;
  for (int width : kBuiltinBankWidths) {
    const auto kernels = detail::orthonormal_kernels(width, in_ch, rng);
    level = detail::conv3x3_s2_abs(level, kernels, width);
    stack.push_back(level);
    in_ch = width;
  }
  return stack;
}

/// Global average pool of every level, concatenated. Turns a stack into a
/// fixed-length descriptor for distribution statistics.
inline std::vector<double> pooled_descriptor(const FeatureStack &stack) {
  std::vector<double> out;
  for (const auto &m : stack) {
    const std::size_t plane = static_cast<std::size_t>(m.height()) * m.width();
    for (int c = 0; c < m.channels(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < plane; ++i)
        s += m.data()[c * plane + i];
      out.push_back(s / static_cast<double>(plane));
    }
  }
  return out;
}

} // namespace occlumix
