#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "informed/core.hpp"
#include "informed/features.hpp"

namespace informed {

// ---------------------------------------------------------------------------
// Kernel density estimate over a ParamSpace

struct KdeOptions {
  double silverman_scale = 0.5;  // multiplier on Silverman's rule
  double floor_fraction = 1e-3;  // minimum bandwidth as a fraction of the dimension range
  bool operator==(const KdeOptions&) const = default;
};

/// Product-Gaussian KDE; wrapped dimensions use a wrapped Gaussian truncated to the
/// three nearest images.
class Kde {
 public:
  Kde() = default;
  /// `points` is row-major (m x space.dims()).
  Kde(ParamSpace space, std::vector<double> points, std::vector<double> bandwidth);

  static Kde fit(const ParamSpace& space, std::span<const double> points, const KdeOptions& options = {});

  std::size_t size() const { return count_; }
  std::size_t dims() const { return space_.dims(); }
  const ParamSpace& space() const { return space_; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& bandwidth() const { return bandwidth_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dims(), dims()}; }

  ParamVector sample(Rng& rng) const;
  double logpdf(std::span<const double> theta) const;

  bool operator==(const Kde& other) const {
    return space_ == other.space_ && points_ == other.points_ && bandwidth_ == other.bandwidth_;
  }

 private:
  ParamSpace space_;
  std::vector<double> points_;
  std::vector<double> bandwidth_;
  std::size_t count_ = 0;
  double log_norm_ = 0.0;
};

/// Per-dimension bandwidth: max(scale * Silverman, floor_fraction * range).
std::vector<double> kde_bandwidth(const ParamSpace& space, std::span<const double> points, const KdeOptions& options);

// ---------------------------------------------------------------------------
// k-means

struct KMeansOptions {
  std::size_t max_iterations = 100;
};

struct KMeansResult {
  std::size_t dim = 0;
  std::vector<double> centroids;        // k x dim, empty clusters removed
  std::vector<std::size_t> assignment;  // per point, index into centroids
  std::vector<double> distortion;       // sum of squared distances after each iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t k() const { return dim == 0 ? 0 : centroids.size() / dim; }
};

/// Lloyd's algorithm with k-means++ seeding, accelerated with Hamerly's distance bounds
/// (same fixpoint as plain Lloyd). Runs to an assignment fixpoint or max_iterations.
/// Clusters that become empty are dropped. Throws ConfigError when k > n or k == 0.
KMeansResult kmeans(std::span<const double> features, std::size_t dim, std::size_t k, Rng& rng,
                    const KMeansOptions& options = {}, Exec exec = Exec::parallel);

/// Index of the nearest row of `centroids` (k x dim); ties go to the lower index.
std::size_t nearest_centroid(std::span<const double> centroids, std::size_t dim, std::span<const double> feature);

// ---------------------------------------------------------------------------
// Estimators mapping an image feature to a density over parameters

struct ClusterModel {
  std::size_t feature_dim = 0;
  std::vector<double> centroids;  // k x feature_dim
  std::vector<Kde> kdes;          // one per centroid

  std::size_t k() const { return kdes.size(); }
  bool operator==(const ClusterModel&) const = default;
};

/// k-means on the features, one KDE per cluster over the member thetas.
ClusterModel fit_cluster_model(std::span<const double> features, std::size_t feature_dim,
                               std::span<const double> thetas, const ParamSpace& space, std::size_t k, Rng& rng,
                               const KdeOptions& kde_options = {}, const KMeansOptions& kmeans_options = {},
                               Exec exec = Exec::parallel);

struct ForestOptions {
  std::size_t trees = 10;
  std::size_t max_depth = 15;
  std::size_t min_leaf = 40;
  std::size_t candidate_features = 0;  // 0 means floor(sqrt(feature_dim))
};

struct TreeNode {
  std::int64_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // feature < threshold goes left
  std::uint64_t left = 0;
  std::uint64_t right = 0;
  std::uint64_t leaf = 0;     // index into RegressionTree::leaves
  std::uint64_t count = 0;    // training points that reached the node
  std::uint64_t depth = 0;
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<Kde> leaves;

  const Kde& leaf_for(std::span<const double> feature) const;
  std::size_t depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct RegressionForest {
  std::size_t feature_dim = 0;
  std::vector<RegressionTree> trees;
  bool operator==(const RegressionForest&) const = default;
};

/// Bootstrap trees with axis-aligned splits chosen by squared-error reduction on theta
/// among sqrt(d) random candidate features; a KDE in each leaf.
/// Throws ConfigError when n < 2 * min_leaf.
RegressionForest forest_fit(std::span<const double> features, std::size_t feature_dim, std::span<const double> thetas,
                            const ParamSpace& space, const ForestOptions& options, Rng& rng,
                            const KdeOptions& kde_options = {}, Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Test-time global proposal

/// Equal-weight mixture of KDEs borrowed from an immutable trained estimator.
class GlobalProposal {
 public:
  GlobalProposal() = default;
  explicit GlobalProposal(std::vector<const Kde*> components);

  std::size_t size() const { return components_.size(); }
  const Kde& component(std::size_t i) const { return *components_[i]; }
  std::size_t dims() const { return components_.front()->dims(); }

  ParamVector sample(Rng& rng) const;
  double logpdf(std::span<const double> theta) const;

  bool operator==(const GlobalProposal&) const = default;

 private:
  std::vector<const Kde*> components_;
};

GlobalProposal select_global(const ClusterModel& model, std::span<const double> feature);
GlobalProposal select_global(const RegressionForest& forest, std::span<const double> feature);

// ---------------------------------------------------------------------------
// Training data and the full per-problem proposal model

struct TrainingSet {
  std::size_t param_dim = 0;
  std::size_t feature_dim = 0;
  std::vector<double> thetas;    // n x param_dim
  std::vector<double> features;  // n x feature_dim

  std::size_t size() const { return param_dim == 0 ? 0 : thetas.size() / param_dim; }
};

/// theta_i ~ prior, I_i = make_observation(theta_i), feature_i = v(I_i). Sample i uses
/// the stream derive_seed(seed, i), so the result does not depend on scheduling.
TrainingSet generate_training_set(const GenerativeModel& model, const FeatureExtractor& extractor, std::size_t n,
                                  std::uint64_t seed, Exec exec = Exec::parallel);

enum class EstimatorKind : std::uint32_t { kmeans_kde = 0, forest = 1 };

/// Estimator for one block of parameters driven by a slice of the feature vector.
struct BlockEstimator {
  std::vector<std::size_t> param_indices;
  std::size_t feature_offset = 0;
  std::size_t feature_length = 0;
  std::variant<ClusterModel, RegressionForest> estimator;

  bool operator==(const BlockEstimator&) const = default;
};

struct ProposalModel {
  std::string extractor_id;
  EstimatorKind kind = EstimatorKind::kmeans_kde;
  ParamSpace space;
  std::vector<BlockEstimator> blocks;

  bool operator==(const ProposalModel&) const = default;
};

struct ProposalTraining {
  EstimatorKind kind = EstimatorKind::kmeans_kde;
  std::size_t k = 500;
  ForestOptions forest;
  KdeOptions kde;
  KMeansOptions kmeans;
  /// One estimator per ParamSpace block, each fed the matching slice of the feature
  /// (tiles); otherwise one estimator over every dimension (room).
  bool per_block = false;
};

ProposalModel fit_proposal_model(const TrainingSet& data, const ParamSpace& space, const std::string& extractor_id,
                                 const ProposalTraining& options, std::uint64_t seed, Exec exec = Exec::parallel);

/// Per-block global proposals selected for one observed feature vector.
struct InformedProposal {
  std::vector<std::vector<std::size_t>> param_indices;
  std::vector<GlobalProposal> proposals;

  std::size_t size() const { return proposals.size(); }
};

InformedProposal select_informed(const ProposalModel& model, std::span<const double> feature);

// ---------------------------------------------------------------------------
// Model file: little-endian binary container plus JSON sidecar.

void write_proposal_model(const ProposalModel& model, const std::string& path);
ProposalModel read_proposal_model(const std::string& path);
std::vector<std::uint8_t> serialize_proposal_model(const ProposalModel& model);
ProposalModel deserialize_proposal_model(std::span<const std::uint8_t> bytes);

}  // namespace informed
