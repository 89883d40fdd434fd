#include <algorithm>
#include <cmath>
#include <numbers>

#include "informed/proposal.hpp"

namespace informed {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double log_sum_exp3(double a, double b, double c) {
  const double m = std::max({a, b, c});
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

}  // namespace

std::vector<double> kde_bandwidth(const ParamSpace& space, std::span<const double> points, const KdeOptions& options) {
  const std::size_t d = space.dims();
  const std::size_t m = points.size() / d;
  std::vector<double> bw(d);
  const double factor =
      std::pow(4.0 / ((static_cast<double>(d) + 2.0) * static_cast<double>(m)), 1.0 / (static_cast<double>(d) + 4.0));
  std::vector<double> column(m);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& dim = space.dim(j);
    for (std::size_t i = 0; i < m; ++i) column[i] = points[i * d + j];
    double sd = 0.0;
    if (m > 1) {
      const double mean = dim_mean(dim, column);
      double ss = 0.0;
      for (double v : column) {
        const double dv = wrap_delta(dim, v, mean);
        ss += dv * dv;
      }
      sd = std::sqrt(ss / static_cast<double>(m - 1));
    }
    bw[j] = std::max(options.silverman_scale * sd * factor, options.floor_fraction * dim.period());
  }
  return bw;
}

Kde::Kde(ParamSpace space, std::vector<double> points, std::vector<double> bandwidth)
    : space_(std::move(space)), points_(std::move(points)), bandwidth_(std::move(bandwidth)) {
  const std::size_t d = space_.dims();
  if (points_.empty() || points_.size() % d != 0) throw ConfigError("Kde: need at least one point of matching dimension");
  if (bandwidth_.size() != d) throw ConfigError("Kde: bandwidth dimension mismatch");
  for (double h : bandwidth_) {
    if (!(h > 0.0)) throw ConfigError("Kde: bandwidths must be positive");
  }
  count_ = points_.size() / d;
  log_norm_ = 0.0;
  for (double h : bandwidth_) log_norm_ -= std::log(h) + kHalfLog2Pi;
}

Kde Kde::fit(const ParamSpace& space, std::span<const double> points, const KdeOptions& options) {
  auto bw = kde_bandwidth(space, points, options);
  return Kde(space, std::vector<double>(points.begin(), points.end()), std::move(bw));
}

ParamVector Kde::sample(Rng& rng) const {
  const std::size_t i = rng.index(count_);
  ParamVector out(point(i).begin(), point(i).end());
  for (std::size_t j = 0; j < dims(); ++j) out[j] += bandwidth_[j] * rng.normal();
  space_.canonicalize(out);
  return out;
}

double Kde::logpdf(std::span<const double> theta) const {
  const std::size_t d = dims();
  std::vector<double> terms(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    const double* p = points_.data() + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& dim = space_.dim(j);
      const double h = bandwidth_[j];
      const double delta = wrap_delta(dim, theta[j], p[j]);
      if (dim.wrapped) {
        const double per = dim.period();
        const double z0 = delta / h, zm = (delta - per) / h, zp = (delta + per) / h;
        s += log_sum_exp3(-0.5 * z0 * z0, -0.5 * zm * zm, -0.5 * zp * zp);
      } else {
        const double z = delta / h;
        s += -0.5 * z * z;
      }
    }
    terms[i] = s;
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  if (mx == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - mx);
  return log_norm_ + mx + std::log(acc) - std::log(static_cast<double>(count_));
}

}  // namespace informed
