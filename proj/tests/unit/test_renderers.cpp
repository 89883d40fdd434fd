#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "informed/diagnostics.hpp"
#include "informed/renderers.hpp"

using namespace informed;

namespace {

const double kPi = std::numbers::pi;

RoomOptions small_room(std::size_t n = 48) {
  RoomOptions o;
  o.width = o.height = n;
  return o;
}

TilesOptions small_tiles(double blur = 0.0) {
  TilesOptions o;
  o.width = o.height = 100;
  o.blur_sigma = blur;
  return o;
}

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

double det(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Pixel-center-in-square test via edge cross products on the explicit corners.
bool inside_square(double px, double py, double cx, double cy, double side, double phi) {
  const double h = 0.5 * side, c = std::cos(phi), s = std::sin(phi);
  const double lx[4] = {-h, h, h, -h}, ly[4] = {-h, -h, h, h};
  double X[4], Y[4];
  for (int k = 0; k < 4; ++k) {
    X[k] = cx + c * lx[k] - s * ly[k];
    Y[k] = cy + s * lx[k] + c * ly[k];
  }
  for (int k = 0; k < 4; ++k) {
    const int n = (k + 1) % 4;
    const double cross = (X[n] - X[k]) * (py - Y[k]) - (Y[n] - Y[k]) * (px - X[k]);
    if (cross < -1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("room renders are deterministic, finite and within [0,1]") {
  const RoomModel model(small_room());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const ParamVector t = model.prior_sample(rng);
    const ImageGrid a = model.render(t), b = model.render(t);
    CHECK(a == b);
    CHECK(a.all_finite());
    for (double v : a.data()) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("room serial and parallel paths agree bit for bit") {
  Rng rng(2);
  const RoomModel model(small_room(64));
  for (int i = 0; i < 10; ++i) {
    const ParamVector t = model.prior_sample(rng);
    CHECK(render_room(t, model.options(), Exec::serial) == render_room(t, model.options(), Exec::parallel));
  }
}

TEST_CASE("room camera outside the open cube is a domain error") {
  CHECK_THROWS_AS(render_room(std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0, 0.0}, small_room()), DomainError);
  CHECK_THROWS_AS(render_room(std::vector<double>{0.0, -1.2, 0.0, 0.0, 0.0, 0.0}, small_room()), DomainError);
}

TEST_CASE("roll of pi/2 facing a wall rotates the pixel grid by 90 degrees") {
  const auto opt = small_room(40);
  const ImageGrid a = render_room(std::vector<double>{0, 0, 0, 0, 0, 0}, opt);
  const ImageGrid b = render_room(std::vector<double>{0, 0, 0, 0, 0, kPi / 2}, opt);
  const std::size_t n = opt.width;
  double cw = 0.0, ccw = 0.0;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      cw = std::max(cw, std::abs(b.at(x, y) - a.at(y, n - 1 - x)));
      ccw = std::max(ccw, std::abs(b.at(x, y) - a.at(n - 1 - y, x)));
    }
  CHECK(std::min(cw, ccw) < 1e-6);
  // The view off-centre is not rotation invariant, so the check is not vacuous.
  const ImageGrid c = render_room(std::vector<double>{0.3, 0.2, -0.1, 0.4, 0.2, 0.0}, opt);
  CHECK_FALSE(c == a);
}

TEST_CASE("cube rotation group") {
  const auto& g = cube_rotations();
  CHECK(g.size() == 24);
  const Mat3 I{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  CHECK(g[0] == I);
  for (const auto& r : g) {
    CHECK(det(r) == doctest::Approx(1.0));
    // Closure: every product lands back in the group.
    for (const auto& s : g) CHECK(std::find(g.begin(), g.end(), mul(r, s)) != g.end());
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(g[i] == g[j]);
}

TEST_CASE("symmetric room poses render identically and form a closed orbit") {
  const auto opt = small_room(32);
  const RoomModel model(opt);
  Rng rng(4);
  const ParamVector theta = model.prior_sample(rng);
  const ImageGrid ref = render_room(theta, opt);
  const ModeSet modes = enumerate_room_modes(theta, opt);
  REQUIRE(modes.size() == 24);
  for (const auto& m : modes.modes) CHECK(render_room(m, opt) == ref);
  // Orbit closure: the modes of any mode are the same 24 poses (up to rounding).
  const ModeSet again = enumerate_room_modes(modes.modes[7], opt);
  for (const auto& m : again.modes) {
    const std::size_t k = nearest_mode(modes, model.space(), m);
    CHECK(wrapped_distance(model.space(), modes.modes[k], m) < 1e-9);
  }
}

TEST_CASE("tile side length halves from z = -1 to z = +1") {
  const auto o = small_tiles();
  CHECK(tile_side_pixels(-1.0, o) / tile_side_pixels(1.0, o) == doctest::Approx(2.0));
  CHECK(tile_side_pixels(-1.0, o) == doctest::Approx(o.tile_scale * o.width));
  for (double z = -1.0; z < 0.9; z += 0.1) CHECK(tile_side_pixels(z, o) > tile_side_pixels(z + 0.1, o));
}

TEST_CASE("nearer tile occludes a coincident farther tile") {
  const auto o = small_tiles();
  std::vector<double> theta(24);
  for (std::size_t t = 0; t < kTileCount; ++t) {
    theta[4 * t] = -0.8 + 0.3 * static_cast<double>(t);
    theta[4 * t + 1] = 0.8;
    theta[4 * t + 2] = 0.9;
  }
  // Tile 1 sits exactly on tile 0 and is nearer, hence also larger.
  theta[0] = theta[4] = 0.0;
  theta[1] = theta[5] = 0.0;
  theta[2] = 0.5;
  theta[6] = -0.2;
  const ImageGrid img = paint_tiles(theta, o);
  const auto& pal = tile_palette();
  const auto [cx, cy] = tile_center_pixels(0.0, 0.0, o);
  const double side1 = tile_side_pixels(-0.2, o);
  std::size_t checked = 0;
  for (std::size_t y = 0; y < o.height; ++y)
    for (std::size_t x = 0; x < o.width; ++x) {
      if (!inside_square(x + 0.5, y + 0.5, cx, cy, side1, 0.0)) continue;
      for (std::size_t c = 0; c < 3; ++c) CHECK(img.at(x, y, c) == pal[1][c]);
      ++checked;
    }
  CHECK(checked > 100);
}

TEST_CASE("equal depths resolve by tile index") {
  const auto o = small_tiles();
  std::vector<double> theta(24, 0.0);
  for (std::size_t t = 2; t < kTileCount; ++t) theta[4 * t + 1] = 0.9;
  const auto order = tile_paint_order(theta);
  CHECK(order.back() == 0);
  const ImageGrid img = paint_tiles(theta, o);
  const auto& pal = tile_palette();
  for (std::size_t c = 0; c < 3; ++c) CHECK(img.at(50, 50, c) == pal[0][c]);
}

TEST_CASE("separated tiles paint exactly their own squares") {
  const auto o = small_tiles();
  std::vector<double> theta;
  const double xs[6] = {-0.6, 0.0, 0.6, -0.6, 0.0, 0.6}, ys[6] = {-0.55, -0.55, -0.55, 0.55, 0.55, 0.55};
  for (std::size_t t = 0; t < kTileCount; ++t) theta.insert(theta.end(), {xs[t], ys[t], 0.6, 0.1 * (t - 2.5)});
  const ImageGrid img = paint_tiles(theta, o);
  const auto& pal = tile_palette();
  std::size_t mismatches = 0;
  for (std::size_t y = 0; y < o.height; ++y)
    for (std::size_t x = 0; x < o.width; ++x) {
      Rgb expect{0.0, 0.0, 0.0};
      for (std::size_t t = 0; t < kTileCount; ++t) {
        const auto [cx, cy] = tile_center_pixels(xs[t], ys[t], o);
        if (inside_square(x + 0.5, y + 0.5, cx, cy, tile_side_pixels(0.6, o), theta[4 * t + 3])) expect = pal[t];
      }
      for (std::size_t c = 0; c < 3; ++c) mismatches += img.at(x, y, c) != expect[c];
    }
  CHECK(mismatches == 0);
}

TEST_CASE("tiles render stays in [0,1] and blur paths agree") {
  const TilesModel model(small_tiles(1.5));
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const ParamVector t = model.prior_sample(rng);
    const ImageGrid a = render_tiles(t, model.options(), Exec::serial);
    CHECK(a == render_tiles(t, model.options(), Exec::parallel));
    for (double v : a.data()) CHECK((v >= 0.0 && v <= 1.0 + 1e-12));
  }
  // Blur of a constant image is the same constant (normalized taps, replicated edges).
  const ImageGrid flat(20, 10, 3, 0.25);
  const ImageGrid blurred = gaussian_blur(flat, 2.0);
  for (double v : blurred.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(gaussian_blur(flat, 0.0) == flat);
}

TEST_CASE("make_observation") {
  RoomOptions opt;  // 200 x 200
  const RoomModel model(opt);
  Rng rng(8);
  const ParamVector t = model.prior_sample(rng);
  const ImageGrid clean = model.render(t);
  Rng r0(1);
  CHECK(make_observation(model, t, r0, 0.0) == clean);
  Rng a(5), b(5);
  const ImageGrid oa = make_observation(model, t, a), ob = make_observation(model, t, b);
  CHECK(oa == ob);
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double r = oa.data()[i] - clean.data()[i];
    s += r;
    ss += r * r;
  }
  const double n = static_cast<double>(clean.size());
  const double sd = std::sqrt(ss / n - (s / n) * (s / n));
  CHECK(std::abs(sd - 0.02) <= 0.0005);
}
