#pragma once

// Mask dataflow that builds the inputs and targets of the parsing
// generator / restorer pair. All operations are pointwise over BinaryMask.

#include "occlumix/core_types.hpp"
#include "occlumix/random.hpp"

#include <set>
#include <string_view>

namespace occlumix {

namespace detail {

inline void require_same_size(const BinaryMask &a, const BinaryMask &b, std::string_view op) {
  if (a.size() != b.size())
    throw InputError(std::string(op) + ": mask dimensions differ (" + to_string(a.size()) + " vs " +
                     to_string(b.size()) + ")");
}

template <typename F> BinaryMask pointwise(const BinaryMask &a, const BinaryMask &b, F &&f) {
  std::vector<std::uint8_t> out(a.pixel_count());
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = f(da[i], db[i]) ? 1 : 0;
  return BinaryMask(a.width(), a.height(), std::move(out));
}

} // namespace detail

/// a AND NOT b.
inline BinaryMask mask_subtract(const BinaryMask &a, const BinaryMask &b) {
  detail::require_same_size(a, b, "mask_subtract");
  return detail::pointwise(a, b, [](auto x, auto y) { return x && !y; });
}

/// Saturating union.
inline BinaryMask mask_union(const BinaryMask &a, const BinaryMask &b) {
  detail::require_same_size(a, b, "mask_union");
  return detail::pointwise(a, b, [](auto x, auto y) { return x || y; });
}

inline BinaryMask mask_intersect(const BinaryMask &a, const BinaryMask &b) {
  detail::require_same_size(a, b, "mask_intersect");
  return detail::pointwise(a, b, [](auto x, auto y) { return x && y; });
}

/// Body parts that survive in the try-on image: M_w * (1 - M_c^s).
inline BinaryMask body_parts_in_tryon(const BinaryMask &body, const BinaryMask &tryon_cloth) {
  detail::require_same_size(body, tryon_cloth, "body_parts_in_tryon");
  return mask_subtract(body, tryon_cloth);
}

/// Fabric the new garment leaves uncovered: M_c^s * (1 - M_c).
inline BinaryMask strange_fabric(const BinaryMask &tryon_cloth, const BinaryMask &original_cloth) {
  detail::require_same_size(tryon_cloth, original_cloth, "strange_fabric");
  return mask_subtract(tryon_cloth, original_cloth);
}

/// M_w^s + M_e, saturated to {0, 1}.
inline BinaryMask potential_body_location(const BinaryMask &tryon_body, const BinaryMask &strange) {
  detail::require_same_size(tryon_body, strange, "potential_body_location");
  return mask_union(tryon_body, strange);
}

/// Two-channel degraded layout fed to the restorer.
struct DegradedLayout {
  BinaryMask body;
  BinaryMask cloth;
  friend bool operator==(const DegradedLayout &, const DegradedLayout &) = default;
};

/// Simulates a parsing failure with an irregular hole mask:
/// body = M_w * (1 - M_d), cloth = M_c | M_d.
inline DegradedLayout simulate_parsing_failure(const BinaryMask &body, const BinaryMask &cloth,
                                               const BinaryMask &holes) {
  detail::require_same_size(body, cloth, "simulate_parsing_failure");
  detail::require_same_size(body, holes, "simulate_parsing_failure");
  return {mask_subtract(body, holes), mask_union(cloth, holes)};
}

/// One training example for each half of the parsing network.
struct SpnSample {
  PoseKeypoints pose;
  BinaryMask potential_body; // generator input, paired with the pose
  BinaryMask target_body;    // supervision for both generator and restorer
  DegradedLayout degraded_layout;
};

/// Builds both (pose, potential body) -> body and (degraded layout, pose) ->
/// body pairs from a person's parsing, the try-on cloth mask and an already
/// placed irregular hole mask.
inline SpnSample build_spn_samples(const LabelMap &person_labels, const BinaryMask &tryon_cloth,
                                   const PoseKeypoints &pose, const BinaryMask &holes) {
  const auto &palette = person_labels.palette();
  detail::require(!palette.cloth_ids.empty(), "palette defines no cloth classes");
  detail::require(!palette.body_ids.empty(), "palette defines no body classes");
  const BinaryMask cloth =
      extract_class_mask(person_labels, std::set<int>(palette.cloth_ids.begin(), palette.cloth_ids.end()));
  const BinaryMask body =
      extract_class_mask(person_labels, std::set<int>(palette.body_ids.begin(), palette.body_ids.end()));
  detail::require_same_size(body, tryon_cloth, "build_spn_samples");
  detail::require_same_size(body, holes, "build_spn_samples");

  const BinaryMask tryon_body = body_parts_in_tryon(body, tryon_cloth);
  const BinaryMask strange = strange_fabric(tryon_cloth, cloth);
  return SpnSample{pose, potential_body_location(tryon_body, strange), body,
                   simulate_parsing_failure(body, cloth, holes)};
}

/// Fits an irregular hole mask to the target frame: nearest resize, random
/// horizontal/vertical flips, then a random shift of up to a quarter of each
/// dimension (uncovered pixels become 0).
inline BinaryMask place_irregular_mask(const BinaryMask &holes, Size frame, Rng &rng) {
  detail::require(frame.width >= 1 && frame.height >= 1, "target frame must be non-empty");
  BinaryMask m = resize_nearest(holes, frame.width, frame.height);
  if (rng.coin())
    m = flip_horizontal(m);
  if (rng.coin())
    m = flip_vertical(m);
  const int max_dx = frame.width / 4;
  const int max_dy = frame.height / 4;
  const int dx = static_cast<int>(rng.uniform_int(-max_dx, max_dx));
  const int dy = static_cast<int>(rng.uniform_int(-max_dy, max_dy));
  return translate(m, dx, dy);
}

} // namespace occlumix
