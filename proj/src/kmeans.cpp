#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "informed/proposal.hpp"

namespace informed {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

std::vector<double> seed_plus_plus(std::span<const double> x, std::size_t n, std::size_t dim, std::size_t k, Rng& rng,
                                   bool parallel) {
  std::vector<double> centers;
  centers.reserve(k * dim);
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, kInf);

  std::size_t pick = rng.index(n);
  for (std::size_t c = 0; c < k; ++c) {
    chosen[pick] = 1;
    centers.insert(centers.end(), x.begin() + static_cast<std::ptrdiff_t>(pick * dim),
                   x.begin() + static_cast<std::ptrdiff_t>((pick + 1) * dim));
    if (c + 1 == k) break;
    const double* cp = centers.data() + c * dim;
    const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel && !omp_in_parallel())
    for (std::ptrdiff_t i = 0; i < nn; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      d2[ui] = std::min(d2[ui], sq_dist(x.data() + ui * dim, cp, dim));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (!chosen[i] && d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a center: take a uniform unchosen point.
      std::size_t r = rng.index(n - (c + 1));
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
  }
  return centers;
}

}  // namespace

std::size_t nearest_centroid(std::span<const double> centroids, std::size_t dim, std::span<const double> feature) {
  if (feature.size() != dim) throw ConfigError("nearest_centroid: feature length mismatch");
  const std::size_t k = centroids.size() / dim;
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t c = 0; c < k; ++c) {
    const double d = sq_dist(feature.data(), centroids.data() + c * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansResult kmeans(std::span<const double> features, std::size_t dim, std::size_t k, Rng& rng,
                    const KMeansOptions& options, Exec exec) {
  if (dim == 0 || features.size() % dim != 0) throw ConfigError("kmeans: feature matrix shape mismatch");
  const std::size_t n = features.size() / dim;
  if (k == 0 || k > n) throw ConfigError("kmeans: need 1 <= k <= n");
  const bool parallel = exec == Exec::parallel;

  KMeansResult res;
  res.dim = dim;
  res.centroids = seed_plus_plus(features, n, dim, k, rng, parallel);
  std::size_t kk = k;

  // Hamerly bounds: upper[i] >= d(x_i, c_a(i)), lower[i] <= d(x_i, any other center).
  std::vector<std::size_t> assign(n, 0);
  std::vector<double> upper(n, kInf), lower(n, 0.0);
  std::vector<double> half_sep(kk, 0.0), moved(kk, 0.0);
  const auto nn = static_cast<std::ptrdiff_t>(n);

  auto full_scan = [&](std::size_t i) {
    const double* xi = features.data() + i * dim;
    double b1 = kInf, b2 = kInf;
    std::size_t a = 0;
    for (std::size_t c = 0; c < kk; ++c) {
      const double d = sq_dist(xi, res.centroids.data() + c * dim, dim);
      if (d < b1) {
        b2 = b1;
        b1 = d;
        a = c;
      } else if (d < b2) {
        b2 = d;
      }
    }
    assign[i] = a;
    upper[i] = std::sqrt(b1);
    lower[i] = std::sqrt(b2);
  };

#pragma omp parallel for schedule(static) if (parallel && !omp_in_parallel())
  for (std::ptrdiff_t i = 0; i < nn; ++i) full_scan(static_cast<std::size_t>(i));

  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // Drop empty clusters, remapping assignments.
    counts.assign(kk, 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
      std::vector<std::size_t> remap(kk, 0);
      std::size_t next = 0;
      for (std::size_t c = 0; c < kk; ++c) {
        if (counts[c] == 0) continue;
        remap[c] = next;
        if (next != c) std::copy_n(res.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim), dim,
                                   res.centroids.begin() + static_cast<std::ptrdiff_t>(next * dim));
        counts[next] = counts[c];
        ++next;
      }
      kk = next;
      res.centroids.resize(kk * dim);
      counts.resize(kk);
      for (auto& a : assign) a = remap[a];
    }

    // Centroid update in fixed point order.
    sums.assign(kk * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = features.data() + i * dim;
      double* s = sums.data() + assign[i] * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += xi[j];
    }
    moved.assign(kk, 0.0);
    double max_move = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      double* cc = res.centroids.data() + c * dim;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      double m2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double v = sums[c * dim + j] * inv;
        const double dv = v - cc[j];
        m2 += dv * dv;
        cc[j] = v;
      }
      moved[c] = std::sqrt(m2);
      max_move = std::max(max_move, moved[c]);
    }

    double distortion = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      distortion += sq_dist(features.data() + i * dim, res.centroids.data() + assign[i] * dim, dim);
    res.distortion.push_back(distortion);
    res.iterations = iter + 1;

    if (max_move == 0.0) {
      res.converged = true;
      break;
    }

    half_sep.assign(kk, kInf);
    for (std::size_t a = 0; a < kk; ++a) {
      for (std::size_t b = a + 1; b < kk; ++b) {
        const double d = std::sqrt(sq_dist(res.centroids.data() + a * dim, res.centroids.data() + b * dim, dim));
        half_sep[a] = std::min(half_sep[a], 0.5 * d);
        half_sep[b] = std::min(half_sep[b], 0.5 * d);
      }
    }

    std::size_t changed = 0;
#pragma omp parallel for schedule(static) reduction(+ : changed) if (parallel && !omp_in_parallel())
    for (std::ptrdiff_t si = 0; si < nn; ++si) {
      const auto i = static_cast<std::size_t>(si);
      upper[i] += moved[assign[i]];
      lower[i] -= max_move;
      const double bound = std::max(half_sep[assign[i]], lower[i]);
      if (upper[i] <= bound) continue;
      upper[i] = std::sqrt(sq_dist(features.data() + i * dim, res.centroids.data() + assign[i] * dim, dim));
      if (upper[i] <= bound) continue;
      const std::size_t before = assign[i];
      full_scan(i);
      if (assign[i] != before) ++changed;
    }
    if (changed == 0) {
      res.converged = true;
      break;
    }
  }

  // Final compaction so every returned cluster is non-empty.
  counts.assign(kk, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
  std::vector<std::size_t> remap(kk, 0);
  std::size_t next = 0;
  std::vector<double> compact;
  compact.reserve(kk * dim);
  for (std::size_t c = 0; c < kk; ++c) {
    if (counts[c] == 0) continue;
    remap[c] = next++;
    compact.insert(compact.end(), res.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim),
                   res.centroids.begin() + static_cast<std::ptrdiff_t>((c + 1) * dim));
  }
  for (auto& a : assign) a = remap[a];
  res.centroids = std::move(compact);
  res.assignment = std::move(assign);
  return res;
}

}  // namespace informed
