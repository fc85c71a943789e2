#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "roisweep/errors.hpp"
#include "roisweep/sgm.hpp"

using namespace roisweep;

namespace {

CostVolume random_volume(std::mt19937& rng, int w, int h, int d, bool all_valid = true) {
  std::uniform_int_distribution<int> c(0, 124);  // half-integer costs in [0, 62]
  std::uniform_int_distribution<int> coin(0, 9);
  CostVolume v(w, h, d);
  for (std::size_t i = 0; i < v.cost.size(); ++i) {
    v.cost[i] = 0.5f * static_cast<float>(c(rng));
    v.valid[i] = 1;
    if (!all_valid && coin(rng) == 0) {
      v.cost[i] = kMaxCost;
      v.valid[i] = 0;
    }
  }
  return v;
}

LineMask random_mask(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> coin(0, 1);
  LineMask m(w, h);
  for (auto& v : m.pixels()) v = static_cast<std::uint8_t>(coin(rng));
  return m;
}

/// Checks one left-to-right scanline against exhaustive enumeration. The
/// recurrence subtracts the running minimum, so L - min_i L equals the
/// exhaustive prefix minima minus their own minimum.
void check_scanline(const CostVolume& v, const LineMask& mask, float p1, float p2, int row) {
  const CostVolume l = path_costs(v, mask, {p1, p2, 8}, {1, 0}, 1);
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(v.width));
  std::vector<bool> m(static_cast<std::size_t>(v.width));
  for (int x = 0; x < v.width; ++x) {
    for (int d = 0; d < v.planes; ++d) cost[static_cast<std::size_t>(x)].push_back(v.at(x, row, d));
    m[static_cast<std::size_t>(x)] = mask.size() != 0 && mask(x, row) != 0;
  }
  const auto best = oracle::exhaustive_prefix_minima(cost, m, p1, p2);
  for (int x = 0; x < v.width; ++x) {
    const auto& e = best[static_cast<std::size_t>(x)];
    const double e_min = *std::min_element(e.begin(), e.end());
    float l_min = l.at(x, row, 0);
    for (int d = 1; d < v.planes; ++d) l_min = std::min(l_min, l.at(x, row, d));
    for (int d = 0; d < v.planes; ++d) {
      CHECK(static_cast<double>(l.at(x, row, d) - l_min) == e[static_cast<std::size_t>(d)] - e_min);
    }
  }
}

int big_jumps(const PlaneIndexMap& m) {
  int n = 0;
  for (int y = 0; y < m.index.height(); ++y) {
    for (int x = 1; x < m.index.width(); ++x) n += std::abs(m.index(x, y) - m.index(x - 1, y)) > 1;
  }
  return n;
}

}  // namespace

TEST_CASE("single-direction scanline matches exhaustive minimization") {
  std::mt19937 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const CostVolume v = random_volume(rng, 8, 1, 4);
    check_scanline(v, LineMask(), 5.f, 50.f, 0);
  }
  SUBCASE("two rows, masks, other penalties") {
    for (int trial = 0; trial < 40; ++trial) {
      const CostVolume v = random_volume(rng, 7, 2, 4);
      const LineMask mask = random_mask(rng, 7, 2);
      check_scanline(v, mask, 3.f, 17.5f, 0);
      check_scanline(v, mask, 3.f, 17.5f, 1);
    }
  }
}

TEST_CASE("all directions agree with the scanline oracle on transposed layouts") {
  // Reversing the scanline and feeding it to the W direction must match E on the reversed data.
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const CostVolume v = random_volume(rng, 8, 1, 4);
    CostVolume rev(8, 1, 4);
    for (int x = 0; x < 8; ++x) {
      for (int d = 0; d < 4; ++d) {
        rev.at(7 - x, 0, d) = v.at(x, 0, d);
        rev.valid[rev.index(7 - x, 0, d)] = 1;
      }
    }
    const CostVolume east = path_costs(v, LineMask(), {5.f, 50.f, 8}, {1, 0});
    const CostVolume west = path_costs(rev, LineMask(), {5.f, 50.f, 8}, {-1, 0});
    for (int x = 0; x < 8; ++x) {
      for (int d = 0; d < 4; ++d) CHECK(east.at(x, 0, d) == west.at(7 - x, 0, d));
    }
    // A column processed top to bottom equals the row processed left to right.
    CostVolume col(1, 8, 4);
    for (int x = 0; x < 8; ++x) {
      for (int d = 0; d < 4; ++d) col.at(0, x, d) = v.at(x, 0, d);
    }
    const CostVolume south = path_costs(col, LineMask(), {5.f, 50.f, 8}, {0, 1});
    for (int x = 0; x < 8; ++x) {
      for (int d = 0; d < 4; ++d) CHECK(east.at(x, 0, d) == south.at(0, x, d));
    }
  }
}

TEST_CASE("zero penalties sum eight copies of the raw volume") {
  std::mt19937 rng(3);
  const CostVolume v = random_volume(rng, 9, 6, 5);
  const CostVolume a = aggregate(v, LineMask(), {0.f, 0.f, 8});
  for (std::size_t i = 0; i < v.cost.size(); ++i) CHECK(a.cost[i] == 8.f * v.cost[i]);
  CHECK(winner_take_all(a).index == winner_take_all(v).index);
}

TEST_CASE("1x1 image has no predecessors") {
  CostVolume v(1, 1, 3);
  v.cost = {4.f, 1.5f, 9.f};
  v.valid = {1, 1, 1};
  const CostVolume a = aggregate(v, LineMask(), {5.f, 50.f, 8});
  CHECK(a.cost == std::vector<float>{32.f, 12.f, 72.f});
  CHECK(winner_take_all(a).index(0, 0) == 1);
}

TEST_CASE("line mask contract") {
  std::mt19937 rng(11);
  const CostVolume v = random_volume(rng, 23, 17, 6, false);
  const LineMask full(23, 17, 1);
  SUBCASE("full mask equals P2 := P1") {
    const CostVolume masked = aggregate(v, full, {5.f, 50.f, 8});
    const CostVolume relaxed = aggregate(v, LineMask(), {5.f, 5.f, 8});
    CHECK(masked == relaxed);
  }
  SUBCASE("empty and zero masks agree") {
    CHECK(aggregate(v, LineMask(23, 17, 0), {5.f, 50.f, 8}) == aggregate(v, LineMask(), {5.f, 50.f, 8}));
  }
  SUBCASE("mixed masks only relax transitions into masked pixels") {
    for (int trial = 0; trial < 30; ++trial) {
      const CostVolume s = random_volume(rng, 8, 1, 4);
      check_scanline(s, random_mask(rng, 8, 1), 5.f, 50.f, 0);
    }
  }
  SUBCASE("wrong mask size") {
    try {
      aggregate(v, LineMask(22, 17, 0), {5.f, 50.f, 8});
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }
}

TEST_CASE("raising P2 does not add large jumps (median over seeds)") {
  std::vector<int> low, high;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937 rng(static_cast<unsigned>(seed));
    const CostVolume v = random_volume(rng, 24, 12, 8);
    low.push_back(big_jumps(winner_take_all(aggregate(v, LineMask(), {5.f, 10.f, 8}))));
    high.push_back(big_jumps(winner_take_all(aggregate(v, LineMask(), {5.f, 80.f, 8}))));
  }
  std::nth_element(low.begin(), low.begin() + 25, low.end());
  std::nth_element(high.begin(), high.begin() + 25, high.end());
  CHECK(high[25] <= low[25]);
}

TEST_CASE("uniform cost shift keeps the winners") {
  std::mt19937 rng(19);
  const CostVolume v = random_volume(rng, 15, 11, 7);
  CostVolume shifted = v;
  for (auto& c : shifted.cost) c += 20.f;
  const SgmParams p{5.f, 50.f, 8};
  CHECK(winner_take_all(aggregate(v, LineMask(), p)).index == winner_take_all(aggregate(shifted, LineMask(), p)).index);
}

TEST_CASE("aggregation is independent of thread count") {
  std::mt19937 rng(23);
  const CostVolume v = random_volume(rng, 31, 19, 9, false);
  const LineMask m = random_mask(rng, 31, 19);
  CHECK(aggregate(v, m, {5.f, 50.f, 8}, 1) == aggregate(v, m, {5.f, 50.f, 8}, 4));
}

TEST_CASE("winner_take_all") {
  std::mt19937 rng(29);
  SUBCASE("matches a naive scan") {
    const CostVolume v = random_volume(rng, 13, 9, 6, false);
    const PlaneIndexMap m = winner_take_all(v);
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 13; ++x) {
        int best = PlaneIndexMap::kInvalid;
        for (int d = 0; d < 6; ++d) {
          if (v.valid_at(x, y, d) && (best < 0 || v.at(x, y, d) < v.at(x, y, best))) best = d;
        }
        CHECK(m.index(x, y) == best);
      }
    }
  }
  SUBCASE("ties go to the smaller index") {
    CostVolume v(1, 1, 4);
    v.cost = {3.f, 1.f, 1.f, 2.f};
    v.valid = {1, 1, 1, 1};
    CHECK(winner_take_all(v).index(0, 0) == 1);
    v.valid[1] = 0;
    CHECK(winner_take_all(v).index(0, 0) == 2);
  }
  SUBCASE("one plane") {
    CostVolume v(4, 3, 1, 7.f);
    std::fill(v.valid.begin(), v.valid.end(), 1);
    const PlaneIndexMap m = winner_take_all(v);
    for (int i : m.index.pixels()) CHECK(i == 0);
  }
  SUBCASE("increasing costs pick index 0") {
    CostVolume v(4, 3, 5);
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 4; ++x) {
        for (int d = 0; d < 5; ++d) {
          v.at(x, y, d) = static_cast<float>(d + x);
          v.valid[v.index(x, y, d)] = 1;
        }
      }
    }
    const PlaneIndexMap m = winner_take_all(v);
    for (int i : m.index.pixels()) CHECK(i == 0);
  }
  SUBCASE("no valid cell") {
    CHECK(winner_take_all(CostVolume(2, 2, 3)).index(1, 1) == PlaneIndexMap::kInvalid);
  }
}

TEST_CASE("extract_depth") {
  const PlaneStack stack = sample_planes(2.0, 50.0, 8);
  const CameraIntrinsics k{100.0, 100.0, 5.0, 4.0, 0.0};
  PlaneIndexMap m{Image<std::int32_t>(10, 8, 0)};
  SUBCASE("index 0 gives the nearest distance") {
    const DepthMap d = extract_depth(m, stack, k);
    for (float v : d.pixels()) CHECK(v == 2.f);
  }
  SUBCASE("mixed indices look up the stack") {
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 10; ++x) m.index(x, y) = (x + y) % 8;
    }
    m.index(3, 3) = PlaneIndexMap::kInvalid;
    const DepthMap d = extract_depth(m, stack, k);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 10; ++x) {
        if (x == 3 && y == 3) {
          CHECK_FALSE(is_valid_depth(d(x, y)));
        } else {
          CHECK(d(x, y) == static_cast<float>(stack[(x + y) % 8].distance));
        }
      }
    }
  }
  SUBCASE("rays parallel to the plane are invalid") {
    PlaneStack tilted = sample_planes(2.0, 50.0, 2, Vec3::UnitX());
    PlaneIndexMap one{Image<std::int32_t>(10, 8, 0)};
    const DepthMap d = extract_depth(one, tilted, k);
    CHECK_FALSE(is_valid_depth(d(5, 2)));  // x == cx: ray has zero x component
    CHECK(is_valid_depth(d(8, 2)));
  }
}

TEST_CASE("median_filter_3x3") {
  SUBCASE("constant map unchanged") {
    const DepthMap d(7, 5, 4.5f);
    CHECK(median_filter_3x3(d) == d);
  }
  SUBCASE("spike removed") {
    DepthMap d(7, 5, 4.5f);
    d(3, 2) = 100.f;
    CHECK(median_filter_3x3(d) == DepthMap(7, 5, 4.5f));
  }
  SUBCASE("all invalid stays invalid") {
    const DepthMap m = median_filter_3x3(DepthMap(4, 4, kInvalidDepth));
    for (float v : m.pixels()) CHECK_FALSE(is_valid_depth(v));
  }
  SUBCASE("invalid pixels are filled from valid neighbors") {
    DepthMap d(3, 3, kInvalidDepth);
    d(0, 0) = 1.f;
    d(2, 2) = 3.f;
    d(1, 0) = 2.f;
    const DepthMap m = median_filter_3x3(d);
    CHECK(m(1, 1) == 2.f);        // {1, 2, 3}
    CHECK(m(0, 0) == 1.f);        // {1, 2}: lower median
    CHECK(m(2, 2) == 3.f);        // {3}
  }
  SUBCASE("truncated border window") {
    DepthMap d(4, 4);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 4; ++x) d(x, y) = static_cast<float>(x + 4 * y);
    }
    // Corner window {0, 1, 4, 5}: lower median 1.
    CHECK(median_filter_3x3(d)(0, 0) == 1.f);
  }
}

TEST_CASE("SgmParams validation") {
  CHECK_NOTHROW(SgmParams{}.validate());
  CHECK_THROWS_AS((SgmParams{0.f, 5.f, 8}.validate()), Error);
  CHECK_THROWS_AS((SgmParams{6.f, 5.f, 8}.validate()), Error);
  CHECK_THROWS_AS((SgmParams{5.f, 50.f, 4}.validate()), Error);
}
