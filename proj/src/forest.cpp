#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "informed/proposal.hpp"

namespace informed {

const Kde& RegressionTree::leaf_for(std::span<const double> feature) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& node = nodes[i];
    i = feature[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
  }
  return leaves[nodes[i].leaf];
}

std::size_t RegressionTree::depth() const {
  std::uint64_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

namespace {

struct SplitChoice {
  std::int64_t feature = -1;
  double threshold = 0.0;
  double sse = kInf;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const double> features, std::size_t fdim, std::span<const double> thetas,
              const ParamSpace& space, const ForestOptions& options, const KdeOptions& kde_options)
      : x_(features), fdim_(fdim), y_(thetas), pdim_(space.dims()), space_(space), opt_(options), kde_opt_(kde_options) {
    mtry_ = options.candidate_features != 0
                ? std::min(options.candidate_features, fdim)
                : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(fdim)))));
  }

  RegressionTree build(std::vector<std::size_t> sample, Rng& rng) {
    tree_ = {};
    grow(std::move(sample), 0, rng);
    return std::move(tree_);
  }

 private:
  double sse_of(std::span<const std::size_t> idx) const {
    double total = 0.0;
    for (std::size_t j = 0; j < pdim_; ++j) {
      double s = 0.0, s2 = 0.0;
      for (auto i : idx) {
        const double v = y_[i * pdim_ + j];
        s += v;
        s2 += v * v;
      }
      total += s2 - s * s / static_cast<double>(idx.size());
    }
    return total;
  }

  SplitChoice best_split(std::vector<std::size_t>& idx, Rng& rng) {
    std::vector<std::size_t> candidates(fdim_);
    std::iota(candidates.begin(), candidates.end(), 0);
    for (std::size_t c = 0; c < mtry_; ++c) std::swap(candidates[c], candidates[c + rng.index(fdim_ - c)]);

    const std::size_t n = idx.size();
    SplitChoice best;
    std::vector<double> ls(pdim_), ls2(pdim_), ts(pdim_, 0.0), ts2(pdim_, 0.0);
    for (auto i : idx) {
      for (std::size_t j = 0; j < pdim_; ++j) {
        const double v = y_[i * pdim_ + j];
        ts[j] += v;
        ts2[j] += v * v;
      }
    }
    for (std::size_t c = 0; c < mtry_; ++c) {
      const std::size_t f = candidates[c];
      auto key = [&](std::size_t i) { return x_[i * fdim_ + f]; };
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
      std::fill(ls.begin(), ls.end(), 0.0);
      std::fill(ls2.begin(), ls2.end(), 0.0);
      for (std::size_t p = 1; p < n; ++p) {
        const std::size_t i = idx[p - 1];
        for (std::size_t j = 0; j < pdim_; ++j) {
          const double v = y_[i * pdim_ + j];
          ls[j] += v;
          ls2[j] += v * v;
        }
        if (p < opt_.min_leaf || n - p < opt_.min_leaf) continue;
        const double lo = key(idx[p - 1]), hi = key(idx[p]);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(p), nr = static_cast<double>(n - p);
        double sse = 0.0;
        for (std::size_t j = 0; j < pdim_; ++j) {
          sse += ls2[j] - ls[j] * ls[j] / nl;
          const double rs = ts[j] - ls[j];
          sse += (ts2[j] - ls2[j]) - rs * rs / nr;
        }
        if (sse < best.sse) {
          best.sse = sse;
          best.feature = static_cast<std::int64_t>(f);
          best.threshold = 0.5 * (lo + hi);
        }
      }
    }
    return best;
  }

  std::size_t make_leaf(const std::vector<std::size_t>& idx, std::size_t depth) {
    std::vector<double> pts;
    pts.reserve(idx.size() * pdim_);
    for (auto i : idx) pts.insert(pts.end(), y_.begin() + static_cast<std::ptrdiff_t>(i * pdim_),
                                  y_.begin() + static_cast<std::ptrdiff_t>((i + 1) * pdim_));
    TreeNode node;
    node.leaf = tree_.leaves.size();
    node.count = idx.size();
    node.depth = depth;
    tree_.leaves.push_back(Kde::fit(space_, pts, kde_opt_));
    tree_.nodes.push_back(node);
    return tree_.nodes.size() - 1;
  }

  std::size_t grow(std::vector<std::size_t> idx, std::size_t depth, Rng& rng) {
    if (depth >= opt_.max_depth || idx.size() < 2 * opt_.min_leaf) return make_leaf(idx, depth);
    const double parent = sse_of(idx);
    const SplitChoice split = best_split(idx, rng);
    if (split.feature < 0 || !(split.sse < parent)) return make_leaf(idx, depth);

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      (x_[i * fdim_ + static_cast<std::size_t>(split.feature)] < split.threshold ? left : right).push_back(i);
    }
    const std::size_t self = tree_.nodes.size();
    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.count = idx.size();
    node.depth = depth;
    tree_.nodes.push_back(node);
    idx = {};
    const std::size_t l = grow(std::move(left), depth + 1, rng);
    const std::size_t r = grow(std::move(right), depth + 1, rng);
    tree_.nodes[self].left = l;
    tree_.nodes[self].right = r;
    return self;
  }

  std::span<const double> x_;
  std::size_t fdim_;
  std::span<const double> y_;
  std::size_t pdim_;
  const ParamSpace& space_;
  ForestOptions opt_;
  KdeOptions kde_opt_;
  std::size_t mtry_ = 1;
  RegressionTree tree_;
};

}  // namespace

RegressionForest forest_fit(std::span<const double> features, std::size_t feature_dim, std::span<const double> thetas,
                            const ParamSpace& space, const ForestOptions& options, Rng& rng,
                            const KdeOptions& kde_options, Exec exec) {
  if (feature_dim == 0 || features.size() % feature_dim != 0) throw ConfigError("forest_fit: feature shape mismatch");
  const std::size_t n = features.size() / feature_dim;
  if (thetas.size() != n * space.dims()) throw ConfigError("forest_fit: theta shape mismatch");
  if (options.min_leaf == 0 || n < 2 * options.min_leaf)
    throw ConfigError("forest_fit: need at least 2 * min_leaf training points");
  if (options.trees == 0) throw ConfigError("forest_fit: need at least one tree");

  std::vector<std::uint64_t> seeds(options.trees);
  for (auto& s : seeds) s = rng.next_u64();

  RegressionForest forest;
  forest.feature_dim = feature_dim;
  forest.trees.resize(options.trees);
  const auto nt = static_cast<std::ptrdiff_t>(options.trees);
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel && !omp_in_parallel())
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    Rng tree_rng(seeds[static_cast<std::size_t>(t)]);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = tree_rng.index(n);
    TreeBuilder builder(features, feature_dim, thetas, space, options, kde_options);
    forest.trees[static_cast<std::size_t>(t)] = builder.build(std::move(sample), tree_rng);
  }
  return forest;
}

}  // namespace informed
