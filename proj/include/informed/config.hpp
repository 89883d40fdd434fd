#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "informed/features.hpp"
#include "informed/proposal.hpp"
#include "informed/samplers.hpp"

namespace informed {

/// Everything one experiment needs. Defaults are the desk-scale room preset.
struct ExperimentConfig {
  std::string problem = "room";  // room | tiles
  std::size_t width = 64;
  std::size_t height = 64;
  double noise_sigma = 0.02;
  std::size_t hog_cell = 8;   // room features
  double tile_scale = 0.3;    // tiles: S0 as a fraction of the width
  double blur_sigma = 1.5;    // tiles

  // Training
  std::size_t train_n = 20000;
  std::size_t train_k = 500;
  std::uint64_t train_seed = 1;
  std::string estimator = "kmeans-kde";  // kmeans-kde | forest
  std::size_t forest_trees = 10;
  std::size_t forest_depth = 15;
  std::size_t forest_min_leaf = 40;
  double kde_scale = 0.5;
  double kde_floor = 1e-3;
  std::size_t kmeans_max_iter = 100;

  // Sampling
  std::string sampler = "mh";
  std::optional<double> sigma;  // unset: per-problem default for the sampler
  std::optional<double> alpha;  // unset: 0.7 room, 0.8 tiles
  std::vector<double> temperatures{1.0, 3.0, 27.0};
  std::size_t regen_calibration = 200;
  std::size_t iters = 10000;
  std::size_t chains = 4;
  std::uint64_t seed = 7;

  // Test set
  std::size_t testset_count = 5;
  std::uint64_t testset_seed = 11;

  // Diagnostics
  double burn_in_fraction = 0.2;
  std::size_t rmse_stride = 10;
  std::size_t checkpoint_every = 500;
  std::size_t acf_max_lag = 200;

  std::string output = "informed-out";

  /// Sampler settings after resolving per-problem defaults.
  SamplerConfig sampler_config() const;
  ProposalTraining training_options() const;
  std::string model_path() const;
  std::string testset_dir() const;
  std::string run_dir(std::string_view sampler_name, std::size_t testcase) const;
  std::string report_dir() const;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Default random-walk std for a sampler on a problem.
double default_sigma(const std::string& problem, SamplerId sampler);
double default_alpha(const std::string& problem);

/// Applies one key=value assignment. Unknown keys and malformed values throw ConfigError.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses a key=value file; '#' starts a comment, blank lines are ignored, keys may be
/// grouped under [section] headers which are ignored.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Canonical key=value dump, in a fixed key order.
std::map<std::string, std::string> config_entries(const ExperimentConfig& config);

std::unique_ptr<GenerativeModel> make_model(const ExperimentConfig& config);
std::unique_ptr<FeatureExtractor> make_extractor(const ExperimentConfig& config);

}  // namespace informed
