#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace occlumix;

namespace {

std::shared_ptr<const Palette> palette() {
  auto p = std::make_shared<Palette>();
  p->classes = {{"background", 0}, {"hair", 1}, {"face", 2}, {"upper-clothes", 3},
                {"pants", 4},      {"left-arm", 5}, {"right-arm", 6}};
  p->cloth_ids = {3};
  p->body_ids = {1, 2, 4, 5, 6};
  return p;
}

bool subset(const BinaryMask &a, const BinaryMask &b) {
  for (std::size_t i = 0; i < a.pixel_count(); ++i)
    if (a.data()[i] && !b.data()[i])
      return false;
  return true;
}

} // namespace

TEST(BodyPartsInTryon, IdentityAndAnnihilation) {
  const auto ones = BinaryMask::filled(6, 6, true);
  const auto zeros = BinaryMask::filled(6, 6, false);
  EXPECT_EQ(body_parts_in_tryon(ones, zeros), ones);
  std::mt19937_64 g(1);
  const auto m = oracle::random_mask(6, 6, g);
  EXPECT_TRUE(body_parts_in_tryon(m, m).empty());
}

TEST(BodyPartsInTryon, MatchesOracle) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 50; ++t) {
    const auto mw = oracle::random_mask(6, 6, g), mcs = oracle::random_mask(6, 6, g);
    EXPECT_EQ(oracle::as_ints(body_parts_in_tryon(mw, mcs)), oracle::eq2(mw, mcs));
  }
}

TEST(StrangeFabric, Cases) {
  std::mt19937_64 g(3);
  const auto m = oracle::random_mask(5, 7, g);
  EXPECT_TRUE(strange_fabric(m, m).empty());
  EXPECT_EQ(strange_fabric(m, BinaryMask(5, 7)), m);
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::random_mask(5, 7, g), b = oracle::random_mask(5, 7, g);
    EXPECT_EQ(oracle::as_ints(strange_fabric(a, b)), oracle::eq3(a, b));
  }
}

TEST(PotentialBodyLocation, Cases) {
  const BinaryMask a(2, 2, {1, 0, 0, 0}), b(2, 2, {0, 1, 1, 0});
  const auto u = potential_body_location(a, b);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_EQ(u.data()[i], a.data()[i] + b.data()[i]);

  std::mt19937_64 g(4);
  const auto big = oracle::random_mask(6, 6, g);
  const auto small = mask_intersect(big, oracle::random_mask(6, 6, g));
  EXPECT_EQ(potential_body_location(big, small), big);

  for (int t = 0; t < 50; ++t) {
    const auto x = oracle::random_mask(6, 6, g), y = oracle::random_mask(6, 6, g);
    const auto r = potential_body_location(x, y);
    EXPECT_EQ(oracle::as_ints(r), oracle::eq4(x, y));
    EXPECT_TRUE(subset(x, r));
    EXPECT_TRUE(subset(y, r));
  }
}

TEST(SimulateParsingFailure, Cases) {
  std::mt19937_64 g(5);
  const auto mw = oracle::random_mask(8, 8, g), mc = oracle::random_mask(8, 8, g);
  const auto none = simulate_parsing_failure(mw, mc, BinaryMask(8, 8));
  EXPECT_EQ(none.body, mw);
  EXPECT_EQ(none.cloth, mc);
  const auto all = simulate_parsing_failure(mw, mc, BinaryMask::filled(8, 8, true));
  EXPECT_TRUE(all.body.empty());
  EXPECT_EQ(all.cloth.count(), 64u);

  for (int t = 0; t < 50; ++t) {
    const auto w = oracle::random_mask(8, 8, g), c = oracle::random_mask(8, 8, g), d = oracle::random_mask(8, 8, g);
    const auto r = simulate_parsing_failure(w, c, d);
    const auto [body, cloth] = oracle::eq5(w, c, d);
    EXPECT_EQ(oracle::as_ints(r.body), body);
    EXPECT_EQ(oracle::as_ints(r.cloth), cloth);
    EXPECT_TRUE(mask_intersect(r.body, d).empty());
    EXPECT_TRUE(subset(d, r.cloth));
  }
}

TEST(MaskOps, DimensionMismatchIsInputError) {
  const BinaryMask a(3, 3), b(3, 4);
  EXPECT_THROW(body_parts_in_tryon(a, b), InputError);
  EXPECT_THROW(strange_fabric(a, b), InputError);
  EXPECT_THROW(potential_body_location(a, b), InputError);
  EXPECT_THROW(simulate_parsing_failure(a, a, b), InputError);
}

TEST(MaskOps, SubsetProperties) {
  std::mt19937_64 g(6);
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::random_mask(7, 3, g), b = oracle::random_mask(7, 3, g);
    EXPECT_TRUE(subset(body_parts_in_tryon(a, b), a));
    EXPECT_TRUE(subset(strange_fabric(a, b), a));
  }
}

// Flipping one input pixel may only change the output at that pixel.
TEST(MaskOps, ArePointwise) {
  std::mt19937_64 g(7);
  std::uniform_int_distribution<int> pos(0, 35);
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_mask(6, 6, g), b = oracle::random_mask(6, 6, g), d = oracle::random_mask(6, 6, g);
    const int p = pos(g);
    std::vector<std::uint8_t> flipped(a.data().begin(), a.data().end());
    flipped[static_cast<std::size_t>(p)] ^= 1;
    const BinaryMask a2(6, 6, flipped);
    auto check = [&](const BinaryMask &r1, const BinaryMask &r2) {
      for (int i = 0; i < 36; ++i)
        if (i != p) {
          EXPECT_EQ(r1.data()[static_cast<std::size_t>(i)], r2.data()[static_cast<std::size_t>(i)]);
        }
    };
    check(body_parts_in_tryon(a, b), body_parts_in_tryon(a2, b));
    check(strange_fabric(a, b), strange_fabric(a2, b));
    check(potential_body_location(a, b), potential_body_location(a2, b));
    check(simulate_parsing_failure(a, b, d).body, simulate_parsing_failure(a2, b, d).body);
    check(simulate_parsing_failure(b, a, d).cloth, simulate_parsing_failure(b, a2, d).cloth);
  }
}

TEST(BuildSpnSamples, NoGarmentChange) {
  std::mt19937_64 g(8);
  std::uniform_int_distribution<int> cls(0, 6);
  std::vector<std::uint8_t> v(48);
  for (auto &x : v)
    x = static_cast<std::uint8_t>(cls(g));
  const LabelMap labels(8, 6, v, palette());
  const auto mc = extract_class_mask(labels, {3});
  const auto mw = extract_class_mask(labels, {1, 2, 4, 5, 6});
  const auto s = build_spn_samples(labels, mc, {}, BinaryMask(8, 6));
  EXPECT_EQ(s.potential_body, mask_subtract(mw, mc));
  EXPECT_EQ(s.target_body, mw);
}

TEST(BuildSpnSamples, NewGarmentOnBareTorso) {
  // left half arms (5), right half background; garment covers rows 1..3.
  std::vector<std::uint8_t> v(36, 0);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 3; ++x)
      v[static_cast<std::size_t>(y * 6 + x)] = 5;
  const LabelMap labels(6, 6, v, palette());
  std::vector<std::uint8_t> torso(36, 0);
  for (int y = 1; y <= 3; ++y)
    for (int x = 0; x < 6; ++x)
      torso[static_cast<std::size_t>(y * 6 + x)] = 1;
  const BinaryMask mcs(6, 6, torso);
  const auto s = build_spn_samples(labels, mcs, {}, BinaryMask(6, 6));
  // no upper-clothes in the photo: the whole garment band is new torso,
  // arms survive outside it
  std::vector<std::uint8_t> expected(36, 0);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x)
      expected[static_cast<std::size_t>(y * 6 + x)] = (y >= 1 && y <= 3) || x < 3;
  EXPECT_EQ(s.potential_body, BinaryMask(6, 6, expected));
}

TEST(BuildSpnSamples, EqualsCompositionOfElementaryOps) {
  std::mt19937_64 g(9);
  std::uniform_int_distribution<int> cls(0, 6);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint8_t> v(32 * 24);
    for (auto &x : v)
      x = static_cast<std::uint8_t>(cls(g));
    const LabelMap labels(32, 24, v, palette());
    const auto mcs = oracle::random_mask(32, 24, g), md = oracle::random_mask(32, 24, g, 0.2);
    const auto s = build_spn_samples(labels, mcs, {}, md);
    const auto mc = extract_class_mask(labels, {3});
    const auto mw = extract_class_mask(labels, {1, 2, 4, 5, 6});
    EXPECT_EQ(s.potential_body, potential_body_location(body_parts_in_tryon(mw, mcs), strange_fabric(mcs, mc)));
    EXPECT_EQ(s.degraded_layout, simulate_parsing_failure(mw, mc, md));
  }
}

TEST(PlaceIrregularMask, DeterministicAndSized) {
  std::mt19937_64 g(10);
  const auto holes = oracle::random_mask(10, 10, g, 0.3);
  Rng r1(77), r2(77);
  const auto a = place_irregular_mask(holes, {24, 32}, r1);
  const auto b = place_irregular_mask(holes, {24, 32}, r2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), (Size{24, 32}));
}
