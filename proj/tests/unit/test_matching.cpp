#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "stereoprop/error.hpp"
#include "stereoprop/matching.hpp"
#include "stereoprop/synthetic_scenes.hpp"

using namespace stereoprop;

namespace {

CostVolume column(std::initializer_list<double> scores) {
  CostVolume v(scores.size(), 1, 1);
  std::size_t d = 0;
  for (double s : scores) v(d++, 0, 0) = s;
  return v;
}

SceneBundle textured_scene() {
  return gen_planar_scene({PlaneSpec{0.02, 0.0, 6.0, {}, 21}}, 24, 48, 0.0, 1);
}

}  // namespace

TEST_SUITE("matching") {
  TEST_CASE("constant features correlate to one") {
    const Grid ones(3, 6, 1, 1.0);
    const CostVolume v = build_correlation_volume(ones, ones, 4);
    for (std::size_t d = 0; d < 4; ++d)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 6; ++x) {
          if (d > x) {
            CHECK_FALSE(CostVolume::is_valid(v(d, y, x)));
          } else {
            CHECK(v(d, y, x) == 1.0);
          }
        }
  }

  TEST_CASE("shifted impulse train peaks at its shift") {
    Grid fl(2, 20), fr(2, 20);
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 20; ++x) {
        fl(y, x) = (x % 7 == 1) ? 1.0 : 0.0;
        if (x >= 3) fr(y, x) = fl(y, x - 3);
      }
    const CostVolume v = build_correlation_volume(fl, fr, 6);
    for (std::size_t x = 3; x < 20; ++x) {
      if (fr(0, x) == 0.0) continue;
      std::size_t best = 0;
      for (std::size_t d = 1; d < 6; ++d)
        if (v(d, 0, x) > v(best, 0, x)) best = d;
      CHECK(best == 3);
    }
  }

  TEST_CASE("multi-channel score is the mean channel product") {
    oracle::Random rnd(6);
    const Grid fl = rnd.grid(3, 9, 4, -1, 1), fr = rnd.grid(3, 9, 4, -1, 1);
    const CostVolume v = build_correlation_volume(fl, fr, 5);
    for (std::size_t d = 0; d < 5; ++d)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 9; ++x) {
          const double want = oracle::correlation(fl, fr, d, y, x);
          if (std::isinf(want)) {
            CHECK_FALSE(CostVolume::is_valid(v(d, y, x)));
          } else {
            CHECK(std::abs(v(d, y, x) - want) < 1e-15);
          }
        }
    // Orthogonal channel patterns give a zero score at the unshifted probe.
    Grid a(1, 1, 4, {1, 0, 1, 0}), b(1, 1, 4, {0, 2, 0, 3});
    CHECK(build_correlation_volume(a, b, 1)(0, 0, 0) == 0.0);
    Grid c(1, 1, 4, {1, 2, 3, 4});
    CHECK(build_correlation_volume(c, b, 1)(0, 0, 0) == (4.0 + 12.0) / 4.0);
    CHECK_THROWS_AS(build_correlation_volume(fl, Grid(3, 9, 3), 2), Error);
  }

  TEST_CASE("correlation symmetry on interior pixels") {
    oracle::Random rnd(15);
    const Grid fl = rnd.grid(2, 12, 2, -1, 1), fr = rnd.grid(2, 12, 2, -1, 1);
    const CostVolume v = build_correlation_volume(fl, fr, 4);
    const CostVolume t = build_correlation_volume(fr, fl, 4);
    // <fl(x - d), fr(x)> equals the swapped score read at x - d with -d.
    for (std::size_t d = 0; d < 4; ++d)
      for (std::size_t x = d; x + d < 12; ++x) {
        double s = 0.0;
        for (std::size_t c = 0; c < 2; ++c) s += fr(0, x, c) * fl(0, x - d, c);
        CHECK(v(d, 0, x) == doctest::Approx(s / 2.0).epsilon(1e-15));
        if (d == 0) CHECK(t(0, 0, x) == v(0, 0, x));
      }
  }

  TEST_CASE("soft argmin") {
    CHECK(soft_argmin_disparity(column({0, 0, 0, 0, 0, 0, 0, 1, 0}), 1e-3)(0, 0) ==
          doctest::Approx(7.0).epsilon(1e-12));
    CHECK(soft_argmin_disparity(column({2, 2, 2, 2, 2}))(0, 0) ==
          doctest::Approx(2.0).epsilon(1e-15));
    CHECK(soft_argmin_disparity(column({0, 0, 50, 0, 50, 0}))(0, 0) ==
          doctest::Approx(3.0).epsilon(1e-15));
    // Huge scores must not overflow.
    CHECK(soft_argmin_disparity(column({1e6, 1e6 - 1.0}))(0, 0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));
  }

  TEST_CASE("soft argmin skips sentinels and stays in range") {
    const CostVolume v = build_correlation_volume(Grid(1, 4, 1, 1.0), Grid(1, 4, 1, 1.0), 4);
    const DisparityMap d = soft_argmin_disparity(v);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == doctest::Approx(0.5));
    CHECK(d(0, 3) == doctest::Approx(1.5));
    oracle::Random rnd(2);
    CostVolume r(6, 3, 3);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 3; ++x) r(i, y, x) = rnd.uniform(-30, 30);
    for (double t : {0.01, 1.0, 100.0}) {
      const DisparityMap s = soft_argmin_disparity(r, t);
      for (double x : s.grid().data()) CHECK((x >= 0.0 && x <= 5.0));
    }
    CostVolume dead(2, 1, 1);
    dead(0, 0, 0) = dead(1, 0, 0) = CostVolume::kInvalid;
    try {
      soft_argmin_disparity(dead);
      FAIL("expected AllInvalidColumn");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AllInvalidColumn);
    }
    CHECK_THROWS_AS(soft_argmin_disparity(r, 0.0), Error);
  }

  TEST_CASE("warp with zero disparity is the identity") {
    oracle::Random rnd(4);
    const Grid img = rnd.grid(5, 7, 3, 0, 1);
    const WarpResult w = warp_right_to_left(img, DisparityMap::constant(5, 7, 0));
    CHECK(w.image == img);
    CHECK(w.valid.count() == 35);
  }

  TEST_CASE("warp of a constant image is constant; validity follows the source column") {
    oracle::Random rnd(5);
    const DisparityMap d(rnd.grid(4, 10, 1, 0, 12));
    const WarpResult w = warp_right_to_left(Grid(4, 10, 1, 0.25), d);
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 10; ++x) {
        CHECK(w.image(y, x) == 0.25);
        CHECK(w.valid(y, x) == (double(x) - d(y, x) >= 0.0));
      }
  }

  TEST_CASE("warp samples bilinearly at x - d") {
    oracle::Random rnd(8);
    const Grid img = rnd.grid(4, 9, 1, 0, 1);
    const DisparityMap d(rnd.grid(4, 9, 1, 0, 3));
    const WarpResult w = warp_right_to_left(img, d);
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 9; ++x)
        CHECK(std::abs(w.image(y, x) - oracle::bilinear(img, double(y), double(x) - d(y, x))) <
              1e-15);
  }

  TEST_CASE("warped error") {
    const WarpedError flat = warped_error(Grid(3, 8, 1, 0.4), Grid(3, 8, 1, 0.4),
                                          DisparityMap::constant(3, 8, 2.5));
    for (double v : flat.error.data()) CHECK(v == 0.0);

    const SceneBundle s = textured_scene();
    const WarpedError good = warped_error(s.left, s.right, s.disparity_gt);
    Grid shifted = s.disparity_gt.grid();
    for (double& v : shifted.data()) v += 2.0;
    const WarpedError bad = warped_error(s.left, s.right, DisparityMap(shifted));
    double e_good = 0.0, e_bad = 0.0, worst = 0.0;
    for (std::size_t y = 0; y < 24; ++y)
      for (std::size_t x = 0; x < 48; ++x) {
        CHECK(good.error(y, x) >= 0.0);
        if (!good.valid(y, x)) continue;
        CHECK(good.error(y, x) < 5e-3);
        e_good += good.error(y, x);
        e_bad += bad.error(y, x);
      }
    CHECK(e_bad > e_good);
    for (std::size_t i = 0; i < bad.error.size(); ++i)
      if (bad.valid.grid().data()[i] != 0.0) worst = std::max(worst, bad.error.data()[i]);
    for (std::size_t i = 0; i < bad.error.size(); ++i)
      if (bad.valid.grid().data()[i] == 0.0) CHECK(bad.error.data()[i] == worst);
  }

  TEST_CASE("warped error averages channels") {
    const Grid l(1, 1, 2, {1.0, 0.0}), r(1, 1, 2, {0.0, 0.5});
    CHECK(warped_error(l, r, DisparityMap::constant(1, 1, 0)).error(0, 0) == 0.75);
  }
}
