#pragma once

#include "occlumix/core_types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace occlumix {

/// Backward warp: output(p) = bilinear sample of `source` at p + flow(p),
/// with sample coordinates clamped to the image border.
inline ImageBuffer warp_by_flow(const ImageBuffer &source, const FlowField &flow) {
  if (source.size() != flow.size())
    throw InputError("warp_by_flow: source is " + to_string(source.size()) + " but flow is " +
                     to_string(flow.size()));
  const int w = source.width();
  const int h = source.height();
  const int c = source.channels();
  std::vector<double> out(source.data().size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp(x + flow.dx(x, y), 0.0, static_cast<double>(w - 1));
      const double fy = std::clamp(y + flow.dy(x, y), 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int y0 = static_cast<int>(std::floor(fy));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double wx = fx - x0;
      const double wy = fy - y0;
      for (int k = 0; k < c; ++k) {
        const double v00 = source.at(x0, y0, k), v10 = source.at(x1, y0, k);
        const double v01 = source.at(x0, y1, k), v11 = source.at(x1, y1, k);
        const double v = (v00 * (1.0 - wx) + v10 * wx) * (1.0 - wy) + (v01 * (1.0 - wx) + v11 * wx) * wy;
        // rounding must not leave the hull of the four taps
        const double lo = std::min({v00, v10, v01, v11});
        const double hi = std::max({v00, v10, v01, v11});
        out[(static_cast<std::size_t>(y) * w + x) * c + k] = std::clamp(v, lo, hi);
      }
    }
  return ImageBuffer(w, h, c, std::move(out));
}

/// Warps a mask and re-binarizes at 0.5.
inline BinaryMask warp_mask_by_flow(const BinaryMask &mask, const FlowField &flow) {
  return threshold(warp_by_flow(to_image(mask), flow), 0.5);
}

/// Generalized charbonnier (t^2 + eps^2)^alpha.
struct CharbonnierParams {
  double epsilon = 1e-3;
  double alpha = 0.45;

  void validate() const {
    detail::require(std::isfinite(epsilon) && epsilon >= 0.0, "charbonnier epsilon must be >= 0");
    detail::require(std::isfinite(alpha) && alpha > 0.0, "charbonnier alpha must be > 0");
  }
  double operator()(double t) const { return std::pow(t * t + epsilon * epsilon, alpha); }
};

/// Second-difference stencil directions as (row, column) steps.
inline constexpr std::array<Offset, 4> kSmoothnessStencils{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

struct SmoothnessResult {
  double value = 0.0;
  std::uint64_t terms = 0; // charbonnier evaluations summed
};

/// Sum over scales, points, stencil directions and flow components of
/// Char(f(p - d) + f(p + d) - 2 f(p)). Stencils reaching past the border
/// are skipped. One running sum in scale, row, column, stencil, component
/// order, so the result is bit-stable.
inline SmoothnessResult second_order_smoothness_terms(const FlowPyramid &pyramid, const CharbonnierParams &params) {
  params.validate();
  if (pyramid.count() == 0)
    throw InputError("flow pyramid has no scales");
  for (const auto &f : pyramid.scales())
    if (f.width() < 3 || f.height() < 3)
      throw DegenerateInputError("flow scale " + to_string(f.size()) + " is smaller than 3x3");

  SmoothnessResult r;
  for (const auto &f : pyramid.scales()) {
    const int w = f.width();
    const int h = f.height();
    auto in_bounds = [w, h](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h; };
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (const auto &d : kSmoothnessStencils) {
          const int xm = x - d.dc, ym = y - d.dr;
          const int xp = x + d.dc, yp = y + d.dr;
          if (!in_bounds(xm, ym) || !in_bounds(xp, yp))
            continue;
          for (int comp = 0; comp < 2; ++comp) {
            const double t = f.component(xm, ym, comp) + f.component(xp, yp, comp) - 2.0 * f.component(x, y, comp);
            r.value += params(t);
          }
          r.terms += 2;
        }
  }
  return r;
}

inline double second_order_smoothness(const FlowPyramid &pyramid, const CharbonnierParams &params = {}) {
  return second_order_smoothness_terms(pyramid, params).value;
}

} // namespace occlumix
