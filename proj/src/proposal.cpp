#include <algorithm>
#include <cmath>

#include <omp.h>

#include "informed/proposal.hpp"
#include "informed/renderers.hpp"

namespace informed {

ClusterModel fit_cluster_model(std::span<const double> features, std::size_t feature_dim,
                               std::span<const double> thetas, const ParamSpace& space, std::size_t k, Rng& rng,
                               const KdeOptions& kde_options, const KMeansOptions& kmeans_options, Exec exec) {
  const std::size_t pdim = space.dims();
  const std::size_t n = features.size() / feature_dim;
  if (thetas.size() != n * pdim) throw ConfigError("fit_cluster_model: theta shape mismatch");
  KMeansResult km = kmeans(features, feature_dim, k, rng, kmeans_options, exec);

  std::vector<std::vector<double>> members(km.k());
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = members[km.assignment[i]];
    m.insert(m.end(), thetas.begin() + static_cast<std::ptrdiff_t>(i * pdim),
             thetas.begin() + static_cast<std::ptrdiff_t>((i + 1) * pdim));
  }
  ClusterModel model;
  model.feature_dim = feature_dim;
  model.centroids = std::move(km.centroids);
  model.kdes.reserve(members.size());
  for (const auto& m : members) model.kdes.push_back(Kde::fit(space, m, kde_options));
  return model;
}

GlobalProposal::GlobalProposal(std::vector<const Kde*> components) : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("GlobalProposal: at least one component required");
}

ParamVector GlobalProposal::sample(Rng& rng) const {
  const std::size_t c = components_.size() == 1 ? 0 : rng.index(components_.size());
  return components_[c]->sample(rng);
}

double GlobalProposal::logpdf(std::span<const double> theta) const {
  if (components_.size() == 1) return components_[0]->logpdf(theta);
  std::vector<double> lp(components_.size());
  for (std::size_t c = 0; c < components_.size(); ++c) lp[c] = components_[c]->logpdf(theta);
  const double mx = *std::max_element(lp.begin(), lp.end());
  if (mx == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : lp) acc += std::exp(v - mx);
  return mx + std::log(acc) - std::log(static_cast<double>(lp.size()));
}

GlobalProposal select_global(const ClusterModel& model, std::span<const double> feature) {
  if (feature.size() != model.feature_dim) throw ConfigError("select_global: feature length mismatch");
  return GlobalProposal({&model.kdes[nearest_centroid(model.centroids, model.feature_dim, feature)]});
}

GlobalProposal select_global(const RegressionForest& forest, std::span<const double> feature) {
  if (feature.size() != forest.feature_dim) throw ConfigError("select_global: feature length mismatch");
  std::vector<const Kde*> leaves;
  leaves.reserve(forest.trees.size());
  for (const auto& t : forest.trees) leaves.push_back(&t.leaf_for(feature));
  return GlobalProposal(std::move(leaves));
}

TrainingSet generate_training_set(const GenerativeModel& model, const FeatureExtractor& extractor, std::size_t n,
                                  std::uint64_t seed, Exec exec) {
  if (n == 0) throw ConfigError("generate_training_set: n must be >= 1");
  TrainingSet set;
  set.param_dim = model.space().dims();
  set.feature_dim = extractor.length();
  set.thetas.resize(n * set.param_dim);
  set.features.resize(n * set.feature_dim);
  const auto nn = static_cast<std::ptrdiff_t>(n);
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 64) if (parallel && !omp_in_parallel())
  for (std::ptrdiff_t si = 0; si < nn; ++si) {
    const auto i = static_cast<std::size_t>(si);
    Rng rng(derive_seed(seed, i));
    const ParamVector theta = model.prior_sample(rng);
    const FeatureVector f = extractor.extract(make_observation(model, theta, rng));
    std::copy(theta.begin(), theta.end(), set.thetas.begin() + static_cast<std::ptrdiff_t>(i * set.param_dim));
    std::copy(f.begin(), f.end(), set.features.begin() + static_cast<std::ptrdiff_t>(i * set.feature_dim));
  }
  return set;
}

ProposalModel fit_proposal_model(const TrainingSet& data, const ParamSpace& space, const std::string& extractor_id,
                                 const ProposalTraining& options, std::uint64_t seed, Exec exec) {
  if (data.param_dim != space.dims()) throw ConfigError("fit_proposal_model: parameter dimension mismatch");
  const std::size_t n = data.size();
  ProposalModel model;
  model.extractor_id = extractor_id;
  model.kind = options.kind;
  model.space = space;

  std::vector<std::vector<std::size_t>> blocks;
  if (options.per_block) {
    blocks = space.blocks();
    if (data.feature_dim % blocks.size() != 0)
      throw ConfigError("fit_proposal_model: feature length does not split evenly across blocks");
  } else {
    blocks = {space.blocks().size() == 1 ? space.blocks()[0] : std::vector<std::size_t>{}};
    if (blocks[0].empty()) {
      for (std::size_t i = 0; i < space.dims(); ++i) blocks[0].push_back(i);
    }
  }
  const std::size_t flen = options.per_block ? data.feature_dim / blocks.size() : data.feature_dim;

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockEstimator est;
    est.param_indices = blocks[b];
    est.feature_offset = options.per_block ? b * flen : 0;
    est.feature_length = flen;
    const ParamSpace sub = space.subspace(est.param_indices);

    std::vector<double> f(n * flen), t(n * est.param_indices.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(data.features.begin() + static_cast<std::ptrdiff_t>(i * data.feature_dim + est.feature_offset), flen,
                  f.begin() + static_cast<std::ptrdiff_t>(i * flen));
      for (std::size_t j = 0; j < est.param_indices.size(); ++j)
        t[i * est.param_indices.size() + j] = data.thetas[i * data.param_dim + est.param_indices[j]];
    }
    Rng rng(derive_seed(seed, b));
    if (options.kind == EstimatorKind::kmeans_kde) {
      est.estimator = fit_cluster_model(f, flen, t, sub, options.k, rng, options.kde, options.kmeans, exec);
    } else {
      est.estimator = forest_fit(f, flen, t, sub, options.forest, rng, options.kde, exec);
    }
    model.blocks.push_back(std::move(est));
  }
  return model;
}

InformedProposal select_informed(const ProposalModel& model, std::span<const double> feature) {
  InformedProposal out;
  for (const auto& b : model.blocks) {
    if (b.feature_offset + b.feature_length > feature.size())
      throw ConfigError("select_informed: feature vector too short for the model");
    const auto slice = feature.subspan(b.feature_offset, b.feature_length);
    out.param_indices.push_back(b.param_indices);
    out.proposals.push_back(std::visit([&](const auto& est) { return select_global(est, slice); }, b.estimator));
  }
  return out;
}

}  // namespace informed
