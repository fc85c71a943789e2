#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "roisweep/errors.hpp"
#include "roisweep/matching.hpp"
#include "scenes.hpp"

using namespace roisweep;

namespace {

GrayImage random_image(std::mt19937& rng, int w, int h, bool integral = false) {
  std::uniform_real_distribution<float> d(0.f, 255.f);
  GrayImage img(w, h);
  for (auto& v : img.pixels()) v = integral ? std::round(d(rng)) : d(rng);
  return img;
}

int raw_argmin(const CostVolume& v, int x, int y) {
  int best = -1;
  for (int d = 0; d < v.planes; ++d) {
    if (!v.valid_at(x, y, d)) continue;
    if (best < 0 || v.at(x, y, d) < v.at(x, y, best)) best = d;
  }
  return best;
}

}  // namespace

TEST_CASE("census_transform") {
  SUBCASE("constant image gives zero descriptors") {
    const CensusImage c = census_transform(GrayImage(20, 15, 77.f));
    for (int y = 3; y < 12; ++y) {
      for (int x = 4; x < 16; ++x) {
        CHECK(c.valid_at(x, y));
        CHECK(c.at(x, y) == 0);
      }
    }
    CHECK_FALSE(c.valid_at(3, 3));
    CHECK_FALSE(c.valid_at(4, 2));
    CHECK_FALSE(c.valid_at(16, 5));
  }
  SUBCASE("bright center sets all 62 bits") {
    GrayImage img(9, 7, 10.f);
    img(4, 3) = 200.f;
    const CensusImage c = census_transform(img);
    CHECK(c.valid_at(4, 3));
    CHECK(c.at(4, 3) == (std::uint64_t{1} << 62) - 1);
  }
  SUBCASE("single darker neighbor sets its row-major bit") {
    GrayImage img(9, 7, 10.f);
    img(0, 0) = 5.f;   // first neighbor
    img(5, 3) = 5.f;   // right of center: index 3*9 + 5 - 1
    const CensusImage c = census_transform(img);
    CHECK(c.at(4, 3) == ((std::uint64_t{1} << 0) | (std::uint64_t{1} << 31)));
  }
  SUBCASE("random patches match the naive loop") {
    std::mt19937 rng(1);
    for (int i = 0; i < 200; ++i) {
      const GrayImage img = random_image(rng, 9, 7, i % 2 == 0);
      CHECK(census_transform(img).at(4, 3) == oracle::naive_census(img, 4, 3));
    }
    const GrayImage big = random_image(rng, 40, 30, true);
    const CensusImage c = census_transform(big);
    for (int y = 3; y < 27; ++y) {
      for (int x = 4; x < 36; ++x) CHECK(c.at(x, y) == oracle::naive_census(big, x, y));
    }
  }
  SUBCASE("too small") {
    try {
      census_transform(GrayImage(8, 7, 0.f));
      FAIL("expected ImageTooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ImageTooSmall);
    }
    CHECK_THROWS_AS(census_transform(GrayImage(9, 6, 0.f)), Error);
  }
  SUBCASE("monotone intensity maps keep descriptors") {
    std::mt19937 rng(8);
    const GrayImage img = random_image(rng, 30, 20, true);
    GrayImage mapped = img;
    for (auto& v : mapped.pixels()) v = 3.f * v + 7.f;
    const CensusImage a = census_transform(img);
    const CensusImage b = census_transform(mapped);
    CHECK(a.bits == b.bits);
  }
}

TEST_CASE("hamming_cost") {
  const std::uint64_t ones = (std::uint64_t{1} << 62) - 1;
  CHECK(hamming_cost(0, 0) == 0);
  CHECK(hamming_cost(ones, ones) == 0);
  CHECK(hamming_cost(0, ones) == 62);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t a = rng() & ones, b = rng() & ones;
    CHECK(hamming_cost(a, b) == oracle::naive_popcount_xor(a, b));
  }
}

TEST_CASE("warp_image") {
  std::mt19937 rng(4);
  const GrayImage img = random_image(rng, 25, 18);
  SUBCASE("identity") {
    const WarpedImage w = warp_image(img, Mat3::Identity());
    CHECK(w.image == img);
    CHECK(std::all_of(w.valid.pixels().begin(), w.valid.pixels().end(), [](auto v) { return v == 1; }));
  }
  SUBCASE("translation by the width leaves nothing valid") {
    Mat3 h = Mat3::Identity();
    h(0, 2) = img.width();
    const WarpedImage w = warp_image(img, h);
    CHECK(std::all_of(w.valid.pixels().begin(), w.valid.pixels().end(), [](auto v) { return v == 0; }));
  }
  SUBCASE("integer shift is exact") {
    Mat3 h = Mat3::Identity();
    h(0, 2) = 3;
    h(1, 2) = 2;
    const WarpedImage w = warp_image(img, h);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const bool inside = x + 3 < img.width() && y + 2 < img.height();
        CHECK(static_cast<bool>(w.valid(x, y)) == inside);
        if (inside) CHECK(w.image(x, y) == img(x + 3, y + 2));
      }
    }
  }
  SUBCASE("half-pixel shift averages neighbors") {
    Mat3 h = Mat3::Identity();
    h(0, 2) = 0.5;
    const WarpedImage w = warp_image(img, h);
    CHECK(w.image(4, 5) == doctest::Approx(0.5 * (img(4, 5) + img(5, 5))));
    CHECK(w.valid(img.width() - 2, 0) == 1);
    CHECK(w.valid(img.width() - 1, 0) == 0);
  }
  SUBCASE("singular homography throws") {
    Mat3 h = Mat3::Zero();
    h(0, 0) = 1;
    try {
      warp_image(img, h);
      FAIL("expected NumericalDegeneracy");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NumericalDegeneracy);
    }
  }
}

TEST_CASE("build_cost_volume") {
  const auto scene = scenes::two_plane(96, 72, 90.0);
  const ImageBundle bundle = scenes::bundle_of(scene);
  const PlaneStack stack = sample_planes(6.0, 40.0, 16);

  SUBCASE("identical views cost nothing") {
    ImageBundle same = bundle;
    same.before = {bundle.reference, bundle.reference};
    same.after = {bundle.reference, bundle.reference};
    const CostVolume v = build_cost_volume(same, stack);
    for (int y = 3; y < v.height - 3; ++y) {
      for (int x = 4; x < v.width - 4; ++x) {
        for (int d = 0; d < v.planes; ++d) {
          REQUIRE(v.valid_at(x, y, d));
          CHECK(v.at(x, y, d) == 0.f);
        }
      }
    }
    // Border pixels have no Census window at all.
    CHECK_FALSE(v.valid_at(0, 0, 0));
    CHECK(v.at(0, 0, 0) == kMaxCost);
  }

  SUBCASE("valid costs are in range and bounded by each subset") {
    const CostVolume v = build_cost_volume(bundle, stack);
    const CostVolume left = subset_cost_volume(bundle.reference, bundle.before, stack);
    const CostVolume right = subset_cost_volume(bundle.reference, bundle.after, stack);
    for (std::size_t i = 0; i < v.cost.size(); ++i) {
      if (!v.valid[i]) {
        CHECK(v.cost[i] == kMaxCost);
        continue;
      }
      CHECK(v.cost[i] >= 0.f);
      CHECK(v.cost[i] <= kMaxCost);
      if (left.valid[i]) CHECK(v.cost[i] <= left.cost[i]);
      if (right.valid[i]) CHECK(v.cost[i] <= right.cost[i]);
      CHECK(v.valid[i] == (left.valid[i] | right.valid[i]));
    }
  }

  SUBCASE("one side out of view: stored cost is the other subset") {
    ImageBundle moved = bundle;
    for (auto& view : moved.before) view.pose.center.x() -= 1000.0;
    const CostVolume v = build_cost_volume(moved, stack);
    const CostVolume right = subset_cost_volume(bundle.reference, bundle.after, stack);
    CHECK(v == right);
  }

  SUBCASE("one side blacked out: stored cost is the min of the subset means") {
    ImageBundle dark = bundle;
    for (auto& view : dark.before) view.image.fill(0.f);
    const CostVolume v = build_cost_volume(dark, stack);
    const CostVolume left = subset_cost_volume(dark.reference, dark.before, stack);
    const CostVolume right = subset_cost_volume(dark.reference, dark.after, stack);
    for (std::size_t i = 0; i < v.cost.size(); ++i) {
      float expected = kMaxCost;
      if (left.valid[i] && right.valid[i]) {
        expected = std::min(left.cost[i], right.cost[i]);
      } else if (left.valid[i]) {
        expected = left.cost[i];
      } else if (right.valid[i]) {
        expected = right.cost[i];
      }
      CHECK(v.cost[i] == expected);
    }
  }

  SUBCASE("affine intensity changes of single images") {
    ImageBundle changed = bundle;
    for (auto& px : changed.reference.image.pixels()) px = 3.f * px + 7.f;
    for (auto& px : changed.after[1].image.pixels()) px = 4.f * px;
    CHECK(build_cost_volume(changed, stack) == build_cost_volume(bundle, stack));
  }

  SUBCASE("selective block equals full block") {
    const CostVolume full = build_cost_volume(bundle, stack);
    for (const PixelRect r : {PixelRect{10, 8, 50, 40}, PixelRect{0, 0, 96, 72}, PixelRect{60, 30, 96, 72},
                              PixelRect{0, 0, 1, 1}}) {
      CHECK(build_cost_volume(bundle, stack, r) == full.crop(r));
    }
    const std::vector<PixelRect> rects{{10, 8, 50, 40}, {30, 20, 80, 60}};
    const auto many = build_cost_volumes(bundle, stack, rects);
    REQUIRE(many.size() == 2);
    CHECK(many[0] == full.crop(rects[0]));
    CHECK(many[1] == full.crop(rects[1]));
  }

  SUBCASE("thread count does not change the result") {
    CHECK(build_cost_volume(bundle, stack, std::nullopt, 1) == build_cost_volume(bundle, stack, std::nullopt, 3));
  }

  SUBCASE("bad regions") {
    try {
      build_cost_volume(bundle, stack, PixelRect{5, 5, 5, 9});
      FAIL("expected EmptyRoi");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyRoi);
    }
    try {
      build_cost_volume(bundle, stack, PixelRect{50, 5, 97, 9});
      FAIL("expected OutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutOfRange);
    }
  }
}

TEST_CASE("frontoparallel plane: raw minimum at the nearest plane") {
  // The plane sits on a sweep hypothesis, so "nearest" is unambiguous.
  const PlaneStack stack = sample_planes(5.0, 40.0, 32);
  for (int target : {4, 15, 27}) {
    const double depth = stack[target].distance;
    const auto scene = scenes::frontoparallel(120, 90, 110.0, depth, 1.0);
    const CostVolume v = build_cost_volume(scenes::bundle_of(scene), stack);
    int interior = 0, hits = 0;
    for (int y = 3; y < v.height - 3; ++y) {
      for (int x = 4; x < v.width - 4; ++x) {
        ++interior;
        hits += raw_argmin(v, x, y) == target;
      }
    }
    MESSAGE("plane " << target << " at " << depth << " m: fraction " << static_cast<double>(hits) / interior);
    CHECK(hits >= 0.95 * interior);
  }
}

TEST_CASE("frontoparallel plane: every interior pixel has a valid cell") {
  // Pure x translation maps rows exactly; rounding must not cost the top rows.
  const auto scene = scenes::frontoparallel(60, 45, 55.0, 12.0, 1.0);
  const CostVolume v = build_cost_volume(scenes::bundle_of(scene), sample_planes(5.0, 40.0, 8));
  for (int y = 3; y < v.height - 3; ++y) {
    for (int x = 4; x < v.width - 4; ++x) CHECK(raw_argmin(v, x, y) >= 0);
  }
}

TEST_CASE("ImageBundle validation") {
  const auto scene = scenes::two_plane(40, 30, 40.0);
  ImageBundle b = scenes::bundle_of(scene);
  CHECK_NOTHROW(b.validate());
  b.after[0].image = GrayImage(41, 30, 0.f);
  CHECK_THROWS_AS(b.validate(), Error);
}
