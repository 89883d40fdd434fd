#include <algorithm>
#include <cmath>

#include "informed/features.hpp"

namespace informed {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dot(double ax, double ay, const Point2& p) { return ax * p.x + ay * p.y; }

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Point2> polygon) {
  double a = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& p = polygon[i];
    const auto& q = polygon[(i + 1) % polygon.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(a);
}

RotatedRect min_area_rect(std::span<const Point2> hull) {
  const std::size_t n = hull.size();
  if (n == 0) return {};
  if (n == 1) return {hull[0], 0.0, 0.0, 0.0};
  if (n == 2) {
    const double dx = hull[1].x - hull[0].x, dy = hull[1].y - hull[0].y;
    return {{0.5 * (hull[0].x + hull[1].x), 0.5 * (hull[0].y + hull[1].y)}, std::hypot(dx, dy), 0.0,
            std::atan2(dy, dx)};
  }

  auto next = [n](std::size_t i) { return (i + 1) % n; };
  auto edge_dir = [&](std::size_t i) {
    const double dx = hull[next(i)].x - hull[i].x, dy = hull[next(i)].y - hull[i].y;
    const double len = std::hypot(dx, dy);
    return std::array<double, 2>{dx / len, dy / len};
  };

  // Calipers: j = max along the edge, k = max along the inward normal, l = min along the edge.
  auto [ex0, ey0] = edge_dir(0);
  std::size_t j = 0, k = 0, l = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (dot(ex0, ey0, hull[i]) > dot(ex0, ey0, hull[j])) j = i;
    if (dot(-ey0, ex0, hull[i]) > dot(-ey0, ex0, hull[k])) k = i;
    if (dot(ex0, ey0, hull[i]) < dot(ex0, ey0, hull[l])) l = i;
  }

  RotatedRect best;
  double best_area = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [ex, ey] = edge_dir(i);
    const double nx = -ey, ny = ex;
    for (std::size_t s = 0; s < n && dot(ex, ey, hull[next(j)]) > dot(ex, ey, hull[j]); ++s) j = next(j);
    for (std::size_t s = 0; s < n && dot(nx, ny, hull[next(k)]) > dot(nx, ny, hull[k]); ++s) k = next(k);
    for (std::size_t s = 0; s < n && dot(ex, ey, hull[next(l)]) < dot(ex, ey, hull[l]); ++s) l = next(l);

    const double base_e = dot(ex, ey, hull[i]);
    const double base_n = dot(nx, ny, hull[i]);
    const double lo = dot(ex, ey, hull[l]) - base_e;
    const double hi = dot(ex, ey, hull[j]) - base_e;
    const double height = dot(nx, ny, hull[k]) - base_n;
    const double area = (hi - lo) * height;
    if (area < best_area) {
      best_area = area;
      const double mid_e = 0.5 * (lo + hi);
      const double mid_n = 0.5 * height;
      best.center = {hull[i].x + ex * mid_e + nx * mid_n, hull[i].y + ey * mid_e + ny * mid_n};
      best.width = hi - lo;
      best.height = height;
      best.angle = std::atan2(ey, ex);
    }
  }
  return best;
}

}  // namespace informed
