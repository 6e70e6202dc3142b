#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "stereoprop/error.hpp"
#include "stereoprop/normals.hpp"

using namespace stereoprop;

namespace {

Grid plane(std::size_t h, std::size_t w, double a, double b, double c) {
  Grid g(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) g(y, x) = a * double(x) + b * double(y) + c;
  return g;
}

bool interior(std::size_t y, std::size_t x, const Grid& g) {
  return y > 0 && x > 0 && y + 1 < g.height() && x + 1 < g.width();
}

NormalMap random_normals(oracle::Random& rnd, std::size_t h, std::size_t w) {
  Grid g(h, w, 3);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    const Vec3 n = normalized({rnd.uniform(-1, 1), rnd.uniform(-1, 1), rnd.uniform(0.1, 1)});
    for (std::size_t c = 0; c < 3; ++c) g.data()[3 * i + c] = n[c];
  }
  return NormalMap(g);
}

// Single-pixel normals differing by exactly 0.5 in x: (+-0.25, 0, sqrt(15)/4).
NormalMap single(double nx) { return NormalMap(Grid(1, 1, 3, {nx, 0.0, std::sqrt(15.0) / 4.0})); }

}  // namespace

TEST_SUITE("normals") {
  TEST_CASE("Sobel is exact on linear ramps") {
    const Gradients g = sobel_gradients(plane(6, 7, 1, 0, 0));
    const Gradients h = sobel_gradients(plane(6, 7, 2, 3, 1));
    const Gradients k = sobel_gradients(Grid(5, 5, 1, 4.0));
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x < 7; ++x) {
        if (!interior(y, x, g.gx)) continue;
        CHECK(g.gx(y, x) == 1.0);
        CHECK(g.gy(y, x) == 0.0);
        CHECK(h.gx(y, x) == 2.0);
        CHECK(h.gy(y, x) == 3.0);
      }
    for (double v : k.gx.data()) CHECK(v == 0.0);
    for (double v : k.gy.data()) CHECK(v == 0.0);
  }

  TEST_CASE("Sobel replicates the border") {
    // d = x at column 0: left column clamps onto itself, (4 * 1 - 4 * 0) / 8.
    const Gradients g = sobel_gradients(plane(4, 4, 1, 0, 0));
    CHECK(g.gx(2, 0) == 0.5);
    CHECK(g.gx(2, 3) == 0.5);
    CHECK(g.gy(0, 2) == 0.0);
  }

  TEST_CASE("Sobel needs 3x3") {
    CHECK_THROWS_AS(sobel_gradients(Grid(2, 5)), Error);
    try {
      sobel_gradients(Grid(5, 2));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooSmall);
    }
  }

  TEST_CASE("Sobel gradients scale linearly with the disparity") {
    oracle::Random rnd(4);
    const Grid d = rnd.grid(6, 6, 1, 0, 20);
    const Gradients g = sobel_gradients(d);
    for (double s : {2.0, 0.25, 3.7}) {
      Grid scaled = d;
      for (double& v : scaled.data()) v *= s;
      const Gradients gs = sobel_gradients(scaled);
      for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(gs.gx.data()[i] == doctest::Approx(s * g.gx.data()[i]).epsilon(1e-13));
        CHECK(gs.gy.data()[i] == doctest::Approx(s * g.gy.data()[i]).epsilon(1e-13));
      }
    }
    // Powers of two scale bit-exactly.
    Grid doubled = d;
    for (double& v : doubled.data()) v *= 2.0;
    const Gradients g2 = sobel_gradients(doubled);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(g2.gx.data()[i] == 2.0 * g.gx.data()[i]);
  }

  TEST_CASE("normals of constant and slanted disparity") {
    const NormalMap flat = normal_from_disparity(DisparityMap::constant(5, 5, 3.0));
    for (std::size_t y = 0; y < 5; ++y)
      for (std::size_t x = 0; x < 5; ++x) CHECK(flat(y, x) == Vec3{0, 0, 1});
    const NormalMap slant = normal_from_disparity(DisparityMap(plane(6, 8, 0.1, 0, 5)));
    const double inv = 1.0 / std::sqrt(1.01);
    for (std::size_t y = 1; y < 5; ++y)
      for (std::size_t x = 1; x < 7; ++x) {
        const Vec3 n = slant(y, x);
        CHECK(n[0] == doctest::Approx(-0.1 * inv).epsilon(1e-14));
        CHECK(n[1] == 0.0);
        CHECK(n[2] == doctest::Approx(inv).epsilon(1e-14));
      }
  }

  TEST_CASE("normals are unit and translation invariant") {
    oracle::Random rnd(8);
    for (int t = 0; t < 30; ++t) {
      const Grid d = rnd.grid(rnd.index(3, 9), rnd.index(3, 9), 1, 0, 30);
      Grid shifted = d;
      const double k = rnd.uniform(0, 100);
      for (double& v : shifted.data()) v += k;
      const NormalMap n = normal_from_disparity(DisparityMap(d));
      const NormalMap m = normal_from_disparity(DisparityMap(shifted));
      for (std::size_t i = 0; i < n.grid().size(); ++i) {
        CHECK(std::abs(n.grid().data()[i] - m.grid().data()[i]) < 1e-12);
      }
      for (std::size_t y = 0; y < d.height(); ++y)
        for (std::size_t x = 0; x < d.width(); ++x) {
          const Vec3 v = n(y, x);
          CHECK(std::abs(std::sqrt(dot(v, v)) - 1.0) < 1e-9);
          CHECK(v[2] > 0.0);
        }
    }
  }

  TEST_CASE("sparse normals need a fully valid 3x3 neighborhood") {
    const DisparityMap d(plane(6, 7, 0.2, -0.1, 9));
    const SparseNormals full = sparse_normal_from_disparity(d, Mask::filled(6, 7, true));
    CHECK(full.mask.count() == 4 * 5);
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x < 7; ++x) CHECK(full.mask(y, x) == interior(y, x, d.grid()));
    const Vec3 expect = plane_normal(0.2, -0.1);
    const Vec3 got = full.normals(2, 3);
    for (int c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-14));

    Mask one = Mask::filled(6, 7, false);
    one.set(3, 3, true);
    CHECK(sparse_normal_from_disparity(d, one).mask.count() == 0);

    Mask checker = Mask::filled(6, 7, false);
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x < 7; ++x) checker.set(y, x, (x + y) % 2 == 0);
    const SparseNormals none = sparse_normal_from_disparity(d, checker);
    CHECK(none.mask.count() == 0);
    CHECK(none.normals(2, 2) == Vec3{0, 0, 1});
  }

  TEST_CASE("sparse mask matches brute-force neighborhood enumeration") {
    oracle::Random rnd(12);
    for (int t = 0; t < 20; ++t) {
      const std::size_t h = rnd.index(3, 10), w = rnd.index(3, 10);
      Grid v(h, w);
      for (double& x : v.data()) x = rnd.uniform(0, 1) < 0.85 ? 1.0 : 0.0;
      const SparseNormals s =
          sparse_normal_from_disparity(DisparityMap(rnd.grid(h, w, 1, 0, 50)), Mask(v));
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          bool ok = interior(y, x, v);
          for (long dy = -1; ok && dy <= 1; ++dy)
            for (long dx = -1; dx <= 1; ++dx)
              if (oracle::pixel(v, long(y) + dy, long(x) + dx) == 0.0) ok = false;
          CHECK(s.mask(y, x) == ok);
        }
    }
  }

  TEST_CASE("fusion selects sparse normals on the mask and pseudo ones elsewhere") {
    oracle::Random rnd(21);
    const NormalMap pseudo = random_normals(rnd, 5, 6);
    const NormalMap sparse = random_normals(rnd, 5, 6);
    CHECK(fuse_normal_gt(pseudo, sparse, Mask::filled(5, 6, true)).grid() == sparse.grid());
    CHECK(fuse_normal_gt(pseudo, sparse, Mask::filled(5, 6, false)).grid() == pseudo.grid());
    Mask m = Mask::filled(5, 6, false);
    for (std::size_t y = 0; y < 5; ++y)
      for (std::size_t x = 0; x < 6; ++x) m.set(y, x, rnd.uniform(0, 1) < 0.5);
    const NormalMap fused = fuse_normal_gt(pseudo, sparse, m);
    for (std::size_t y = 0; y < 5; ++y)
      for (std::size_t x = 0; x < 6; ++x)
        CHECK(fused(y, x) == (m(y, x) ? sparse(y, x) : pseudo(y, x)));
  }

  TEST_CASE("EPE index thresholds the pseudo/sparse disagreement") {
    const DisparityMap sparse(plane(4, 5, 0.5, 0, 10));
    Grid shifted = sparse.grid();
    Mask valid = Mask::filled(4, 5, true);
    valid.set(1, 1, false);
    CHECK(epe_index(sparse, sparse, valid).count() == 0);
    for (double& v : shifted.data()) v += 2.0;
    CHECK(epe_index(DisparityMap(shifted), sparse, valid) == valid);
    for (double& v : shifted.data()) v -= 1.5;
    CHECK(epe_index(DisparityMap(shifted), sparse, valid).count() == 0);
  }

  TEST_CASE("weighted normal loss single-pixel cases") {
    const NormalMap gt = single(0.25), pred = single(-0.25);
    const Mask on = Mask::filled(1, 1, true), off = Mask::filled(1, 1, false);
    // SmoothL1(0.5) = 0.125 in one of three channels.
    const double sparse = weighted_normal_loss(gt, pred, on, off);
    const double unreliable = weighted_normal_loss(gt, pred, off, on);
    const double reliable = weighted_normal_loss(gt, pred, off, off);
    CHECK(sparse == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(unreliable == doctest::Approx(0.125 / 3.0).epsilon(1e-14));
    CHECK(reliable == doctest::Approx(0.0625 / 3.0).epsilon(1e-14));
    CHECK(weighted_normal_loss(gt, gt, on, off) == 0.0);
  }

  TEST_CASE("weighted normal loss is non-negative and vanishes only at equality") {
    oracle::Random rnd(30);
    for (int t = 0; t < 20; ++t) {
      const NormalMap a = random_normals(rnd, 4, 4), b = random_normals(rnd, 4, 4);
      Mask m = Mask::filled(4, 4, false), e = Mask::filled(4, 4, false);
      for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
          m.set(y, x, rnd.uniform(0, 1) < 0.3);
          e.set(y, x, rnd.uniform(0, 1) < 0.5);
        }
      CHECK(weighted_normal_loss(a, b, m, e) > 0.0);
      CHECK(weighted_normal_loss(a, a, m, e) == 0.0);
    }
  }

  TEST_CASE("residual normal update") {
    const NormalMap up = NormalMap::constant(2, 2, {0, 0, 1});
    CHECK(residual_normal_update(up, Grid(2, 2, 3)).grid() == up.grid());
    Grid z(2, 2, 3);
    for (std::size_t i = 0; i < 4; ++i) z.data()[3 * i + 2] = 1.0;
    CHECK(residual_normal_update(up, z).grid() == up.grid());
    Grid xdir(2, 2, 3);
    for (std::size_t i = 0; i < 4; ++i) xdir.data()[3 * i] = 1.0;
    const Vec3 n = residual_normal_update(up, xdir)(1, 1);
    CHECK(n[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(n[1] == 0.0);
    CHECK(n[2] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    Grid cancel(2, 2, 3);
    for (std::size_t i = 0; i < 4; ++i) cancel.data()[3 * i + 2] = -1.0;
    try {
      residual_normal_update(up, cancel);
      FAIL("expected DegenerateSum");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateSum);
    }
  }
}
