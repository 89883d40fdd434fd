#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace informed {

/// Invalid configuration, mismatched shapes, bad arguments to an API.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate numerics (stuck chains, underflowing densities, symmetry mismatch).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Selects the serial reference path or the OpenMP path of a data-parallel kernel.
/// Both paths produce bit-identical results.
enum class Exec { serial, parallel };

// ---------------------------------------------------------------------------
// Randomness

/// splitmix64 finalizer; derives independent stream seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seedable generator threaded explicitly through every stochastic operation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Parameter spaces

using ParamVector = std::vector<double>;

struct DimSpec {
  double lower = 0.0;
  double upper = 1.0;
  bool wrapped = false;

  double period() const { return upper - lower; }
  bool operator==(const DimSpec&) const = default;
};

/// Box-shaped latent space with wrap-around angle dimensions and a block partition.
class ParamSpace {
 public:
  ParamSpace() = default;
  /// An empty block list means a single block holding every dimension.
  explicit ParamSpace(std::vector<DimSpec> dims, std::vector<std::vector<std::size_t>> blocks = {});

  std::size_t dims() const { return dims_.size(); }
  const DimSpec& dim(std::size_t i) const { return dims_[i]; }
  std::span<const DimSpec> dim_specs() const { return dims_; }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }

  /// Space restricted to the given dimensions (a single block).
  ParamSpace subspace(std::span<const std::size_t> indices) const;

  double canonical(std::size_t i, double v) const;
  void canonicalize(ParamVector& theta) const;

  /// Open box on plain dims; wrapped dims are always in support once canonical.
  bool in_support(std::span<const double> theta) const;
  double log_volume() const;
  /// Uniform (wrapped-uniform on angles) log density; -inf outside support.
  double prior_logpdf(std::span<const double> theta) const;
  ParamVector sample_uniform(Rng& rng) const;

  bool operator==(const ParamSpace&) const = default;

 private:
  std::vector<DimSpec> dims_;
  std::vector<std::vector<std::size_t>> blocks_;
};

/// Signed minimal difference a - b on one dimension, in (-period/2, period/2] when wrapped.
double wrap_delta(const DimSpec& dim, double a, double b);
std::vector<double> wrap_delta(const ParamSpace& space, std::span<const double> a, std::span<const double> b);

/// Circular mean for wrapped dims (arithmetic mean otherwise), canonicalized.
double dim_mean(const DimSpec& dim, std::span<const double> values);

// ---------------------------------------------------------------------------
// Images

struct ImageShape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;

  std::size_t size() const { return width * height * channels; }
  bool operator==(const ImageShape&) const = default;
};

/// Row-major, channel-interleaved real image.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(std::size_t width, std::size_t height, std::size_t channels, double fill = 0.0);
  explicit ImageGrid(ImageShape shape, double fill = 0.0)
      : ImageGrid(shape.width, shape.height, shape.channels, fill) {}

  std::size_t width() const { return shape_.width; }
  std::size_t height() const { return shape_.height; }
  std::size_t channels() const { return shape_.channels; }
  const ImageShape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;
  bool operator==(const ImageGrid&) const = default;

 private:
  ImageShape shape_;
  std::vector<double> data_;
};

/// Root-mean-square pixel difference.
double rms_distance(const ImageGrid& a, const ImageGrid& b);

// ---------------------------------------------------------------------------
// Generative models

/// Deterministic renderer G(theta) with a uniform prior over its parameter space and
/// i.i.d. Gaussian pixel noise. Implementations must be re-entrant.
class GenerativeModel {
 public:
  explicit GenerativeModel(double noise_sigma) : noise_sigma_(noise_sigma) {}
  virtual ~GenerativeModel() = default;

  virtual std::string_view problem_id() const = 0;
  virtual const ParamSpace& space() const = 0;
  virtual ImageShape image_shape() const = 0;
  virtual ImageGrid render(std::span<const double> theta) const = 0;

  double noise_sigma() const { return noise_sigma_; }
  double prior_logpdf(std::span<const double> theta) const { return space().prior_logpdf(theta); }
  ParamVector prior_sample(Rng& rng) const { return space().sample_uniform(rng); }

 private:
  double noise_sigma_;
};

/// Gaussian log-likelihood of obs given a rendered image. The normalizer is dropped
/// unless requested.
double log_likelihood(const ImageGrid& rendered, const ImageGrid& obs, double sigma,
                      bool include_normalizer = false);

/// log p(obs | theta) + log p(theta), normalizer dropped. Returns -inf (without
/// rendering) outside prior support; throws ConfigError on shape mismatch.
double log_posterior(const GenerativeModel& model, std::span<const double> theta, const ImageGrid& obs);

/// Callable posterior bound to one observation.
class Posterior {
 public:
  Posterior(const GenerativeModel& model, ImageGrid obs);

  double operator()(std::span<const double> theta) const { return log_posterior(*model_, theta, obs_); }
  const GenerativeModel& model() const { return *model_; }
  const ImageGrid& observation() const { return obs_; }

 private:
  const GenerativeModel* model_;
  ImageGrid obs_;
};

}  // namespace informed
