#include "informed/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace informed {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ParamSpace::ParamSpace(std::vector<DimSpec> dims, std::vector<std::vector<std::size_t>> blocks)
    : dims_(std::move(dims)), blocks_(std::move(blocks)) {
  if (dims_.empty()) throw ConfigError("ParamSpace: at least one dimension required");
  for (const auto& d : dims_) {
    if (!(d.lower < d.upper)) throw ConfigError("ParamSpace: lower must be < upper");
  }
  if (blocks_.empty()) {
    blocks_.emplace_back(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) blocks_[0][i] = i;
  }
  std::vector<int> seen(dims_.size(), 0);
  for (const auto& b : blocks_) {
    if (b.empty()) throw ConfigError("ParamSpace: empty block");
    for (auto i : b) {
      if (i >= dims_.size()) throw ConfigError("ParamSpace: block index out of range");
      ++seen[i];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; }))
    throw ConfigError("ParamSpace: blocks must partition the dimensions");
}

ParamSpace ParamSpace::subspace(std::span<const std::size_t> indices) const {
  std::vector<DimSpec> sub;
  sub.reserve(indices.size());
  for (auto i : indices) sub.push_back(dims_.at(i));
  return ParamSpace(std::move(sub));
}

double ParamSpace::canonical(std::size_t i, double v) const {
  const auto& d = dims_[i];
  if (!d.wrapped) return v;
  const double p = d.period();
  double r = std::fmod(v - d.lower, p);
  if (r < 0.0) r += p;
  double out = d.lower + r;
  if (out >= d.upper) out = d.lower;
  return out;
}

void ParamSpace::canonicalize(ParamVector& theta) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) theta[i] = canonical(i, theta[i]);
}

bool ParamSpace::in_support(std::span<const double> theta) const {
  if (theta.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const double v = theta[i];
    if (!std::isfinite(v)) return false;
    if (dims_[i].wrapped) continue;
    if (!(dims_[i].lower < v && v < dims_[i].upper)) return false;
  }
  return true;
}

double ParamSpace::log_volume() const {
  double s = 0.0;
  for (const auto& d : dims_) s += std::log(d.period());
  return s;
}

double ParamSpace::prior_logpdf(std::span<const double> theta) const {
  return in_support(theta) ? -log_volume() : kNegInf;
}

ParamVector ParamSpace::sample_uniform(Rng& rng) const {
  ParamVector theta(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    double v = rng.uniform(d.lower, d.upper);
    // Open support on plain dims: the lower edge has probability ~2^-53, redraw.
    while (!d.wrapped && v == d.lower) v = rng.uniform(d.lower, d.upper);
    theta[i] = v;
  }
  return theta;
}

double wrap_delta(const DimSpec& dim, double a, double b) {
  const double d = a - b;
  if (!dim.wrapped) return d;
  const double p = dim.period();
  double r = std::remainder(d, p);
  if (r <= -0.5 * p) r += p;
  return r;
}

std::vector<double> wrap_delta(const ParamSpace& space, std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(space.dims());
  for (std::size_t i = 0; i < space.dims(); ++i) out[i] = wrap_delta(space.dim(i), a[i], b[i]);
  return out;
}

double dim_mean(const DimSpec& dim, std::span<const double> values) {
  if (values.empty()) return 0.5 * (dim.lower + dim.upper);
  if (!dim.wrapped) {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  const double scale = 2.0 * std::numbers::pi / dim.period();
  double c = 0.0, s = 0.0;
  for (double v : values) {
    const double a = (v - dim.lower) * scale;
    c += std::cos(a);
    s += std::sin(a);
  }
  double ang = std::atan2(s, c);
  if (ang < 0.0) ang += 2.0 * std::numbers::pi;
  double m = dim.lower + ang / scale;
  if (m >= dim.upper) m = dim.lower;
  return m;
}

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::size_t channels, double fill)
    : shape_{width, height, channels}, data_(width * height * channels, fill) {
  if (channels != 1 && channels != 3) throw ConfigError("ImageGrid: channels must be 1 or 3");
}

bool ImageGrid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double rms_distance(const ImageGrid& a, const ImageGrid& b) {
  if (a.shape() != b.shape()) throw ConfigError("rms_distance: shape mismatch");
  if (a.size() == 0) return 0.0;
  double s = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double r = da[i] - db[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(da.size()));
}

double log_likelihood(const ImageGrid& rendered, const ImageGrid& obs, double sigma, bool include_normalizer) {
  if (rendered.shape() != obs.shape()) throw ConfigError("log_likelihood: observation shape mismatch");
  if (!(sigma > 0.0)) throw ConfigError("log_likelihood: sigma must be positive");
  const auto r = rendered.data();
  const auto o = obs.data();
  double ss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = o[i] - r[i];
    ss += d * d;
  }
  double ll = -ss / (2.0 * sigma * sigma);
  if (include_normalizer)
    ll += static_cast<double>(r.size()) * std::log(1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi)));
  return ll;
}

double log_posterior(const GenerativeModel& model, std::span<const double> theta, const ImageGrid& obs) {
  if (obs.shape() != model.image_shape()) throw ConfigError("log_posterior: observation shape mismatch");
  if (theta.size() != model.space().dims()) throw ConfigError("log_posterior: parameter dimension mismatch");
  const double lp = model.prior_logpdf(theta);
  if (lp == kNegInf) return kNegInf;
  return log_likelihood(model.render(theta), obs, model.noise_sigma()) + lp;
}

Posterior::Posterior(const GenerativeModel& model, ImageGrid obs) : model_(&model), obs_(std::move(obs)) {
  if (obs_.shape() != model.image_shape()) throw ConfigError("Posterior: observation shape mismatch");
}

}  // namespace informed
