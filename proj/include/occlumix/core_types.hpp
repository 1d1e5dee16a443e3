#pragma once

#include "occlumix/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace occlumix {

struct Size {
  int width = 0;
  int height = 0;
  friend bool operator==(const Size &, const Size &) = default;
};

inline std::string to_string(Size s) {
  return std::to_string(s.width) + "x" + std::to_string(s.height);
}

/// Pixel offset (row delta, column delta).
struct Offset {
  int dr = 0;
  int dc = 0;
  friend bool operator==(const Offset &, const Offset &) = default;
};

/// Row-major single-channel raster. Immutable after construction; the
/// concrete raster kinds below add their own value-domain checks.
template <typename T> class Grid {
public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    detail::require(width >= 0 && height >= 0, "raster dimensions must be non-negative");
    detail::require(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                    "raster data length does not match " + to_string(size()));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Size size() const noexcept { return {width_, height_}; }
  std::size_t pixel_count() const noexcept { return data_.size(); }
  std::span<const T> data() const noexcept { return data_; }

  const T &at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  friend bool operator==(const Grid &, const Grid &) = default;

protected:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Indicator raster with values in {0, 1}.
class BinaryMask : public Grid<std::uint8_t> {
public:
  BinaryMask() = default;
  BinaryMask(int width, int height)
      : Grid(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)) {}
  BinaryMask(int width, int height, std::vector<std::uint8_t> data) : Grid(width, height, std::move(data)) {
    for (auto v : data_)
      detail::require(v <= 1, "binary mask values must be 0 or 1");
  }

  static BinaryMask filled(int width, int height, bool value) {
    return BinaryMask(width, height,
                      std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value ? 1 : 0));
  }

  BinaryMask rebuilt(int width, int height, std::vector<std::uint8_t> data) const {
    return BinaryMask(width, height, std::move(data));
  }

  bool test(int x, int y) const { return at(x, y) != 0; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1)); }
  bool empty() const noexcept { return count() == 0; }

  friend bool operator==(const BinaryMask &, const BinaryMask &) = default;
};

/// Named parsing classes plus the class groupings the mask pipeline needs.
struct Palette {
  std::map<std::string, int> classes;
  std::vector<int> cloth_ids;
  std::vector<int> body_ids;

  bool contains(int id) const {
    return std::any_of(classes.begin(), classes.end(), [id](const auto &kv) { return kv.second == id; });
  }
  int id_of(const std::string &name) const {
    auto it = classes.find(name);
    if (it == classes.end())
      throw InputError("class '" + name + "' is not in the palette");
    return it->second;
  }
  std::string name_of(int id) const {
    for (const auto &[name, value] : classes)
      if (value == id)
        return name;
    throw InputError("class id " + std::to_string(id) + " is not in the palette");
  }
  std::set<int> ids() const {
    std::set<int> out;
    for (const auto &kv : classes)
      out.insert(kv.second);
    return out;
  }
};

/// Per-pixel human-parsing class ids, checked against a declared palette.
class LabelMap : public Grid<std::uint8_t> {
public:
  LabelMap() = default;
  LabelMap(int width, int height, std::vector<std::uint8_t> data, std::shared_ptr<const Palette> palette)
      : Grid(width, height, std::move(data)), palette_(std::move(palette)) {
    detail::require(palette_ != nullptr, "label map requires a palette");
    const auto known = palette_->ids();
    for (auto v : data_)
      if (!known.contains(v))
        throw InputError("label id " + std::to_string(v) + " is not in the palette");
  }

  const Palette &palette() const { return *palette_; }
  const std::shared_ptr<const Palette> &palette_ptr() const { return palette_; }

  LabelMap rebuilt(int width, int height, std::vector<std::uint8_t> data) const {
    return LabelMap(width, height, std::move(data), palette_);
  }

  friend bool operator==(const LabelMap &a, const LabelMap &b) {
    return static_cast<const Grid &>(a) == static_cast<const Grid &>(b);
  }

private:
  std::shared_ptr<const Palette> palette_;
};

inline constexpr int kDefaultRegionCount = 24;

/// DensePose-style body-part ids, 0 = background, 1..region_count.
class PartRegionMap : public Grid<std::uint8_t> {
public:
  PartRegionMap() = default;
  PartRegionMap(int width, int height, std::vector<std::uint8_t> data, int region_count = kDefaultRegionCount)
      : Grid(width, height, std::move(data)), region_count_(region_count) {
    detail::require(region_count >= 1 && region_count <= 255, "region count must be in 1..255");
    for (auto v : data_)
      if (v > region_count_)
        throw InputError("region id " + std::to_string(v) + " exceeds region count " +
                         std::to_string(region_count_));
  }

  int region_count() const noexcept { return region_count_; }

  PartRegionMap rebuilt(int width, int height, std::vector<std::uint8_t> data) const {
    return PartRegionMap(width, height, std::move(data), region_count_);
  }

  friend bool operator==(const PartRegionMap &, const PartRegionMap &) = default;

private:
  int region_count_ = kDefaultRegionCount;
};

/// Interleaved H x W x C raster with values in [0, 1].
class ImageBuffer {
public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels)
      : ImageBuffer(width, height, channels,
                    std::vector<double>(static_cast<std::size_t>(width) * height * channels, 0.0)) {}
  ImageBuffer(int width, int height, int channels, std::vector<double> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    detail::require(width >= 0 && height >= 0, "image dimensions must be non-negative");
    detail::require(channels >= 1, "image must have at least one channel");
    detail::require(data_.size() == static_cast<std::size_t>(width) * height * channels,
                    "image data length does not match dimensions");
    for (double v : data_)
      detail::require(v >= 0.0 && v <= 1.0, "image values must lie in [0, 1]");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  Size size() const noexcept { return {width_, height_}; }
  std::span<const double> data() const noexcept { return data_; }

  double at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  friend bool operator==(const ImageBuffer &, const ImageBuffer &) = default;

private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

struct Joint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

inline constexpr int kPoseJointCount = 18;

/// 18 keypoints in COCO (OpenPose) order.
struct PoseKeypoints {
  std::array<Joint, kPoseJointCount> joints{};

  /// A joint is drawn only if it has positive confidence and lies inside
  /// the frame; anything else counts as invisible.
  bool visible(int j, Size frame) const {
    const auto &p = joints[static_cast<std::size_t>(j)];
    return p.confidence > 0.0 && p.x >= 0.0 && p.y >= 0.0 && p.x <= frame.width - 1 && p.y <= frame.height - 1;
  }
};

/// Per-pixel displacement (dx, dy) in pixels.
class FlowField {
public:
  FlowField() = default;
  FlowField(int width, int height)
      : FlowField(width, height, std::vector<double>(static_cast<std::size_t>(width) * height * 2, 0.0)) {}
  FlowField(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    detail::require(width >= 0 && height >= 0, "flow dimensions must be non-negative");
    detail::require(data_.size() == static_cast<std::size_t>(width) * height * 2,
                    "flow data length does not match dimensions");
    for (double v : data_)
      detail::require(std::isfinite(v), "flow values must be finite");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Size size() const noexcept { return {width_, height_}; }
  std::span<const double> data() const noexcept { return data_; }

  double dx(int x, int y) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * 2]; }
  double dy(int x, int y) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * 2 + 1]; }
  double component(int x, int y, int c) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * 2 + c]; }

  friend bool operator==(const FlowField &, const FlowField &) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Flow fields ordered coarsest first; each level doubles the previous
/// one's dimensions (up to one pixel of rounding).
class FlowPyramid {
public:
  FlowPyramid() = default;
  explicit FlowPyramid(std::vector<FlowField> scales) : scales_(std::move(scales)) {
    for (std::size_t i = 1; i < scales_.size(); ++i) {
      const auto prev = scales_[i - 1].size();
      const auto cur = scales_[i].size();
      detail::require(std::abs(cur.width - 2 * prev.width) <= 1 && std::abs(cur.height - 2 * prev.height) <= 1,
                      "pyramid scale " + std::to_string(i) + " (" + to_string(cur) +
                          ") is not double the previous scale (" + to_string(prev) + ")");
    }
  }

  std::span<const FlowField> scales() const noexcept { return scales_; }
  std::size_t count() const noexcept { return scales_.size(); }

private:
  std::vector<FlowField> scales_;
};

// ---------------------------------------------------------------------------
// Elementary raster operations
// ---------------------------------------------------------------------------

/// Indicator of pixels whose class id is in `ids`.
inline BinaryMask extract_class_mask(const LabelMap &labels, const std::set<int> &ids) {
  for (int id : ids)
    if (!labels.palette().contains(id))
      throw InputError("class id " + std::to_string(id) + " is not in the palette");
  std::vector<std::uint8_t> out(labels.pixel_count());
  auto src = labels.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = ids.contains(src[i]) ? 1 : 0;
  return BinaryMask(labels.width(), labels.height(), std::move(out));
}

/// Indicator of pixels whose region id is in `ids`.
inline BinaryMask extract_region_mask(const PartRegionMap &regions, const std::set<int> &ids) {
  std::vector<std::uint8_t> out(regions.pixel_count());
  auto src = regions.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = ids.contains(src[i]) ? 1 : 0;
  return BinaryMask(regions.width(), regions.height(), std::move(out));
}

/// Heatmap sigma used when none is given: 3 px at 256 rows, linear in height.
inline double default_pose_sigma(int height) { return 3.0 * height / 256.0; }

/// One Gaussian bump per joint (peak 1 at the joint), zero channel for
/// invisible joints.
inline ImageBuffer rasterize_pose(const PoseKeypoints &pose, int width, int height, double sigma) {
  detail::require(width >= 1 && height >= 1, "pose raster dimensions must be positive");
  detail::require(sigma > 0.0 && std::isfinite(sigma), "pose sigma must be positive");
  std::vector<double> out(static_cast<std::size_t>(width) * height * kPoseJointCount, 0.0);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  for (int j = 0; j < kPoseJointCount; ++j) {
    if (!pose.visible(j, {width, height}))
      continue;
    const auto &p = pose.joints[static_cast<std::size_t>(j)];
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double d2 = (x - p.x) * (x - p.x) + (y - p.y) * (y - p.y);
        out[(static_cast<std::size_t>(y) * width + x) * kPoseJointCount + j] = std::exp(-d2 * inv_two_var);
      }
  }
  return ImageBuffer(width, height, kPoseJointCount, std::move(out));
}

template <typename R>
concept IndexRaster = std::derived_from<R, Grid<typename R::value_type>> &&
                      requires(const R &r, std::vector<typename R::value_type> v) {
                        { r.rebuilt(1, 1, std::move(v)) } -> std::same_as<R>;
                      };

/// Nearest-neighbour resampling: source index = floor(dst * src_dim / dst_dim).
template <IndexRaster R> R resize_nearest(const R &in, int new_width, int new_height) {
  detail::require(new_width >= 1 && new_height >= 1, "resize target dimensions must be positive");
  detail::require(in.width() >= 1 && in.height() >= 1, "cannot resize an empty raster");
  std::vector<typename R::value_type> out(static_cast<std::size_t>(new_width) * new_height);
  for (int y = 0; y < new_height; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * in.height() / new_height);
    for (int x = 0; x < new_width; ++x) {
      const int sx = static_cast<int>(static_cast<long long>(x) * in.width() / new_width);
      out[static_cast<std::size_t>(y) * new_width + x] = in.at(sx, sy);
    }
  }
  return in.rebuilt(new_width, new_height, std::move(out));
}

/// Bilinear resampling with half-pixel centres and clamped borders.
inline ImageBuffer resize_bilinear(const ImageBuffer &in, int new_width, int new_height) {
  detail::require(new_width >= 1 && new_height >= 1, "resize target dimensions must be positive");
  detail::require(in.width() >= 1 && in.height() >= 1, "cannot resize an empty image");
  if (in.width() == new_width && in.height() == new_height)
    return in;
  const int c = in.channels();
  std::vector<double> out(static_cast<std::size_t>(new_width) * new_height * c);
  const double sx = static_cast<double>(in.width()) / new_width;
  const double sy = static_cast<double>(in.height()) / new_height;
  for (int y = 0; y < new_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(in.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < new_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(in.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in.width() - 1);
      const double wx = fx - x0;
      for (int k = 0; k < c; ++k) {
        const double top = in.at(x0, y0, k) * (1.0 - wx) + in.at(x1, y0, k) * wx;
        const double bot = in.at(x0, y1, k) * (1.0 - wx) + in.at(x1, y1, k) * wx;
        out[(static_cast<std::size_t>(y) * new_width + x) * c + k] = std::clamp(top * (1.0 - wy) + bot * wy, 0.0, 1.0);
      }
    }
  }
  return ImageBuffer(new_width, new_height, c, std::move(out));
}

/// Luma 0.299 R + 0.587 G + 0.114 B; single-channel input is returned as is.
inline ImageBuffer to_grayscale(const ImageBuffer &in) {
  if (in.channels() == 1)
    return in;
  detail::require(in.channels() == 3, "grayscale conversion needs 1 or 3 channels");
  std::vector<double> out(static_cast<std::size_t>(in.width()) * in.height());
  auto src = in.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2], 0.0, 1.0);
  return ImageBuffer(in.width(), in.height(), 1, std::move(out));
}

/// Pixels of a single-channel image with value >= threshold.
inline BinaryMask threshold(const ImageBuffer &in, double level = 0.5) {
  detail::require(in.channels() == 1, "thresholding needs a single-channel image");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(in.width()) * in.height());
  auto src = in.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = src[i] >= level ? 1 : 0;
  return BinaryMask(in.width(), in.height(), std::move(out));
}

inline ImageBuffer to_image(const BinaryMask &mask) {
  std::vector<double> out(mask.data().begin(), mask.data().end());
  return ImageBuffer(mask.width(), mask.height(), 1, std::move(out));
}

/// Shift by an integer offset; uncovered pixels become 0.
inline BinaryMask translate(const BinaryMask &mask, int dx, int dy) {
  std::vector<std::uint8_t> out(mask.pixel_count(), 0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      const int sx = x - dx;
      const int sy = y - dy;
      if (mask.contains(sx, sy))
        out[static_cast<std::size_t>(y) * mask.width() + x] = mask.at(sx, sy);
    }
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

/// Shift by an integer offset; uncovered pixels replicate the border.
inline ImageBuffer translate(const ImageBuffer &img, int dx, int dy) {
  const int c = img.channels();
  std::vector<double> out(img.data().size());
  for (int y = 0; y < img.height(); ++y) {
    const int sy = std::clamp(y - dy, 0, img.height() - 1);
    for (int x = 0; x < img.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, img.width() - 1);
      for (int k = 0; k < c; ++k)
        out[(static_cast<std::size_t>(y) * img.width() + x) * c + k] = img.at(sx, sy, k);
    }
  }
  return ImageBuffer(img.width(), img.height(), c, std::move(out));
}

inline BinaryMask flip_horizontal(const BinaryMask &mask) {
  std::vector<std::uint8_t> out(mask.pixel_count());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out[static_cast<std::size_t>(y) * mask.width() + x] = mask.at(mask.width() - 1 - x, y);
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

inline BinaryMask flip_vertical(const BinaryMask &mask) {
  std::vector<std::uint8_t> out(mask.pixel_count());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out[static_cast<std::size_t>(y) * mask.width() + x] = mask.at(x, mask.height() - 1 - y);
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

/// Mean pixel coordinate of the set pixels. Empty masks have no centroid.
inline std::optional<Centroid> centroid(const BinaryMask &mask) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.test(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
  if (n == 0)
    return std::nullopt;
  return Centroid{sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // inclusive
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

inline std::optional<Box> bounding_box(const BinaryMask &mask) {
  std::optional<Box> box;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y))
        continue;
      if (!box) {
        box = Box{x, y, x, y};
      } else {
        box->x0 = std::min(box->x0, x);
        box->y0 = std::min(box->y0, y);
        box->x1 = std::max(box->x1, x);
        box->y1 = std::max(box->y1, y);
      }
    }
  return box;
}

inline ImageBuffer crop(const ImageBuffer &img, const Box &box) {
  const int c = img.channels();
  std::vector<double> out(static_cast<std::size_t>(box.width()) * box.height() * c);
  for (int y = 0; y < box.height(); ++y)
    for (int x = 0; x < box.width(); ++x)
      for (int k = 0; k < c; ++k)
        out[(static_cast<std::size_t>(y) * box.width() + x) * c + k] = img.at(box.x0 + x, box.y0 + y, k);
  return ImageBuffer(box.width(), box.height(), c, std::move(out));
}

} // namespace occlumix
