#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "informed/features.hpp"

using namespace informed;

namespace {

const double kPi = std::numbers::pi;

/// Smallest enclosing-rectangle area over every hull-edge direction, by brute force.
double brute_min_rect_area(const std::vector<Point2>& pts) {
  double best = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const double dx = pts[j].x - pts[i].x, dy = pts[j].y - pts[i].y, len = std::hypot(dx, dy);
      if (len == 0.0) continue;
      const double ux = dx / len, uy = dy / len;
      double a0 = kInf, a1 = -kInf, b0 = kInf, b1 = -kInf;
      for (const auto& p : pts) {
        const double a = p.x * ux + p.y * uy, b = -p.x * uy + p.y * ux;
        a0 = std::min(a0, a);
        a1 = std::max(a1, a);
        b0 = std::min(b0, b);
        b1 = std::max(b1, b);
      }
      best = std::min(best, (a1 - a0) * (b1 - b0));
    }
  return best;
}

}  // namespace

TEST_CASE("hog output length") {
  CHECK(hog_length(200, 200, {9, 20}) == 900);
  CHECK(hog(ImageGrid(200, 200, 1, 0.3), {9, 20}).size() == 900);
  CHECK(hog_length(64, 64, {9, 8}) == 576);
  CHECK_THROWS_AS(hog(ImageGrid(30, 30, 1), {9, 20}), ConfigError);
  CHECK_THROWS_AS(hog(ImageGrid(40, 40, 3), {9, 20}), ConfigError);
}

TEST_CASE("hog of a constant image is all zeros") {
  for (double v : hog(ImageGrid(40, 40, 1, 0.7), {9, 20})) CHECK(v == 0.0);
}

TEST_CASE("hog puts a vertical step edge in the horizontal-gradient bin") {
  ImageGrid img(40, 40, 1, 0.0);
  for (std::size_t y = 0; y < 40; ++y)
    for (std::size_t x = 10; x < 40; ++x) img.at(x, y) = 1.0;
  const HogOptions opt{9, 20};
  const auto f = hog(img, opt);
  // Cells (0,0) and (0,1) contain the edge at x = 10; gradient direction 0 -> bin 0.
  for (std::size_t cell : {0, 2}) {
    const auto* h = f.data() + cell * 9;
    CHECK(std::max_element(h, h + 9) - h == 0);
    CHECK(h[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("hog is invariant to a global brightness shift") {
  Rng rng(3);
  ImageGrid img(40, 40, 1);
  for (auto& v : img.data()) v = rng.uniform();
  ImageGrid shifted = img;
  for (auto& v : shifted.data()) v += 0.25;
  const auto a = hog(img, {9, 20}), b = hog(shifted, {9, 20});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("hog shifts cell blocks with a one-cell translation") {
  // Content confined to the interior of cells so replicated borders never see it.
  Rng rng(4);
  ImageGrid img(80, 40, 1, 0.0), shifted(80, 40, 1, 0.0);
  for (std::size_t y = 3; y < 37; ++y)
    for (std::size_t x = 3; x < 57; ++x) {
      const double v = rng.uniform();
      img.at(x, y) = v;
      shifted.at(x + 20, y) = v;
    }
  const HogOptions opt{9, 20};
  const auto a = hog(img, opt), b = hog(shifted, opt);
  const std::size_t cells_x = 4;
  for (std::size_t cy = 0; cy < 2; ++cy)
    for (std::size_t cx = 0; cx + 1 < cells_x; ++cx)
      for (std::size_t k = 0; k < 9; ++k)
        CHECK(b[((cy * cells_x) + cx + 1) * 9 + k] == doctest::Approx(a[((cy * cells_x) + cx) * 9 + k]).epsilon(1e-12));
}

TEST_CASE("hog serial and parallel agree") {
  Rng rng(5);
  ImageGrid img(64, 64, 1);
  for (auto& v : img.data()) v = rng.uniform();
  CHECK(hog(img, {9, 8}, Exec::serial) == hog(img, {9, 8}, Exec::parallel));
}

TEST_CASE("convex hull and polygon area") {
  std::vector<Point2> pts{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {1, 0}, {0.5, 1.5}};
  const auto hull = convex_hull(pts);
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(4.0));
}

TEST_CASE("minimum-area rectangle of a rotated square is the square") {
  const double a = kPi / 4, s = 3.0;
  std::vector<Point2> sq;
  for (auto [u, v] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}})
    sq.push_back({5 + 0.5 * s * (std::cos(a) * u - std::sin(a) * v), 7 + 0.5 * s * (std::sin(a) * u + std::cos(a) * v)});
  const auto r = min_area_rect(convex_hull(sq));
  CHECK(r.area() == doctest::Approx(s * s));
  CHECK(r.width == doctest::Approx(s));
  CHECK(r.center.x == doctest::Approx(5.0));
  CHECK(r.center.y == doctest::Approx(7.0));
}

TEST_CASE("minimum-area rectangle matches brute force and is bracketed by hull and bbox") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> pts(30);
    for (auto& p : pts) p = {rng.uniform(-3, 3), rng.uniform(-1, 1)};
    const auto hull = convex_hull(pts);
    const auto r = min_area_rect(hull);
    CHECK(r.area() == doctest::Approx(brute_min_rect_area(hull)).epsilon(1e-9));
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    CHECK(r.area() <= (x1 - x0) * (y1 - y0) + 1e-9);
    CHECK(r.area() >= polygon_area(hull) - 1e-9);
  }
}

TEST_CASE("fit_rectangles recovers an unoccluded tile") {
  TilesOptions o;
  o.width = o.height = 100;
  o.blur_sigma = 0.0;
  std::vector<double> theta(24);
  const double xs[6] = {-0.6, 0.0, 0.6, -0.6, 0.0, 0.6}, ys[6] = {-0.55, -0.55, -0.55, 0.55, 0.55, 0.55};
  for (std::size_t t = 0; t < kTileCount; ++t) {
    theta[4 * t] = xs[t];
    theta[4 * t + 1] = ys[t];
    theta[4 * t + 2] = -0.5;
    theta[4 * t + 3] = t == 1 ? 0.3 : 0.0;
  }
  const auto rects = fit_rectangles(paint_tiles(theta, o), tile_palette());
  for (std::size_t t = 0; t < kTileCount; ++t) {
    REQUIRE(rects[t].found);
    const auto [cx, cy] = tile_center_pixels(xs[t], ys[t], o);
    CHECK(std::abs(rects[t].cx - cx) <= 1.0);
    CHECK(std::abs(rects[t].cy - cy) <= 1.0);
    CHECK(std::abs(rects[t].side - tile_side_pixels(-0.5, o)) <= 2.0);
    CHECK(std::abs(rects[t].angle - theta[4 * t + 3]) <= kPi / 180.0);
  }
}

TEST_CASE("fully occluded tile is not found") {
  TilesOptions o;
  o.width = o.height = 100;
  o.blur_sigma = 0.0;
  std::vector<double> theta(24);
  for (std::size_t t = 0; t < kTileCount; ++t) {
    theta[4 * t] = -0.8 + 0.3 * static_cast<double>(t);
    theta[4 * t + 1] = 0.8;
    theta[4 * t + 2] = 0.9;
  }
  theta[0] = theta[4] = 0.0;
  theta[1] = theta[5] = 0.0;
  theta[2] = 0.5;
  theta[6] = -0.2;
  const auto rects = fit_rectangles(paint_tiles(theta, o), tile_palette());
  CHECK_FALSE(rects[0].found);
  CHECK(rects[1].found);
}

TEST_CASE("rect_to_feature") {
  std::array<FittedRect, kTileCount> rects{};
  CHECK(rect_to_feature(rects, 0, 100, 100) == FeatureVector{0.5, 0.5, 0.5, 0.5});
  rects[2] = {50.0, 50.0, 20.0, 0.1, true};
  const auto f = rect_to_feature(rects, 2, 100, 100);
  CHECK(f[0] == 0.5);
  CHECK(f[1] == 0.5);
  CHECK(f[2] == doctest::Approx(0.2));
  rects[3] = rects[2];
  CHECK(rect_to_feature(rects, 3, 100, 100) == f);
  CHECK_THROWS_AS(rect_to_feature(rects, 6, 100, 100), ConfigError);
}

TEST_CASE("extractors report their lengths") {
  const HogExtractor h({64, 64, 1}, {9, 8});
  CHECK(h.id() == "hog");
  CHECK(h.extract(ImageGrid(64, 64, 1, 0.1)).size() == h.length());
  const RectExtractor r({100, 100, 3});
  CHECK(r.id() == "rects");
  CHECK(r.extract(ImageGrid(100, 100, 3)).size() == 24);
}
