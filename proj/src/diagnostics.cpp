#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "informed/diagnostics.hpp"

namespace informed {

double acceptance_rate(const Trace& trace, std::size_t first, std::size_t last) {
  if (first < 1 || last <= first || last > trace.size())
    throw ConfigError("acceptance_rate: window must be a non-empty range within iterations 1.." +
                      std::to_string(trace.size() == 0 ? 0 : trace.size() - 1));
  std::size_t acc = 0;
  for (std::size_t t = first; t < last; ++t) acc += trace.accepted[t];
  return static_cast<double>(acc) / static_cast<double>(last - first);
}

double acceptance_rate(const ChainSet& chains, std::size_t upto) {
  if (chains.chains.empty()) throw ConfigError("acceptance_rate: no chains");
  std::size_t acc = 0, total = 0;
  for (const auto& c : chains.chains) {
    if (upto < 1 || upto >= c.size()) throw ConfigError("acceptance_rate: iteration out of range");
    for (std::size_t t = 1; t <= upto; ++t) acc += c.accepted[t];
    total += upto;
  }
  return static_cast<double>(acc) / static_cast<double>(total);
}

double psrf(std::span<const std::vector<double>> chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw ConfigError("psrf: need at least 2 chains");
  const std::size_t n = chains[0].size();
  if (n < 2) throw ConfigError("psrf: chains need at least 2 samples");
  for (const auto& c : chains) {
    if (c.size() != n) throw ConfigError("psrf: chains must have equal length");
  }
  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double v : chains[j]) s += v;
    means[j] = s / static_cast<double>(n);
    double ss = 0.0;
    for (double v : chains[j]) ss += (v - means[j]) * (v - means[j]);
    w += ss / static_cast<double>(n - 1);
  }
  w /= static_cast<double>(m);
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= static_cast<double>(m);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  if (!(w > 0.0)) return kInf;
  const double nn = static_cast<double>(n);
  return std::sqrt(((nn - 1.0) / nn * w + b / nn) / w);
}

double psrf(const ChainSet& chains, const ParamSpace& space, std::size_t dim, std::size_t length) {
  if (chains.chains.size() < 2) throw ConfigError("psrf: need at least 2 chains");
  if (dim >= space.dims()) throw ConfigError("psrf: dimension out of range");
  const std::size_t len = length == 0 ? chains.length() : length;
  for (const auto& c : chains.chains) {
    if (c.size() < len || c.dim != space.dims()) throw ConfigError("psrf: chains are shorter than requested");
  }
  if (len < 10) throw ConfigError("psrf: chains need at least 10 samples");
  const std::size_t first = len / 2;
  const DimSpec& d = space.dim(dim);

  std::vector<std::vector<double>> values(chains.chains.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const Trace& t = chains.chains[j];
    values[j].reserve(len - first);
    for (std::size_t i = first; i < len; ++i) values[j].push_back(t.thetas[i * t.dim + dim]);
  }
  if (d.wrapped) {
    std::vector<double> pooled;
    for (const auto& v : values) pooled.insert(pooled.end(), v.begin(), v.end());
    const double centre = dim_mean(d, pooled);
    for (auto& v : values) {
      for (auto& x : v) x = centre + wrap_delta(d, x, centre);
    }
  }
  return psrf(values);
}

double psrf_max(const ChainSet& chains, const ParamSpace& space, std::size_t length) {
  double best = 0.0;
  for (std::size_t d = 0; d < space.dims(); ++d) best = std::max(best, psrf(chains, space, d, length));
  return best;
}

std::size_t default_burn_in(std::size_t length) { return length / 5; }

std::vector<CurvePoint> rmse_curve(const ChainSet& chains, const GenerativeModel& model,
                                   std::span<const double> theta_star, std::size_t burn_in, std::size_t stride,
                                   std::size_t every) {
  if (stride == 0 || every == 0) throw ConfigError("rmse_curve: stride and checkpoint spacing must be positive");
  const ImageGrid truth = model.render(theta_star);
  const std::size_t len = chains.length();
  std::vector<double> sum(truth.size(), 0.0);
  std::size_t count = 0;
  std::vector<ParamVector> last_theta(chains.chains.size());
  std::vector<ImageGrid> last_image(chains.chains.size());
  std::vector<CurvePoint> curve;

  for (std::size_t t = 0; t < len; ++t) {
    if (t >= burn_in && t % stride == 0) {
      for (std::size_t c = 0; c < chains.chains.size(); ++c) {
        const auto s = chains.chains[c].sample(t);
        if (last_image[c].size() == 0 || !std::equal(s.begin(), s.end(), last_theta[c].begin())) {
          last_theta[c].assign(s.begin(), s.end());
          last_image[c] = model.render(s);
        }
        const auto px = last_image[c].data();
        for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += px[p];
        ++count;
      }
    }
    const bool checkpoint = (t > 0 && t % every == 0) || t + 1 == len;
    if (checkpoint && count > 0) {
      const auto ref = truth.data();
      double ss = 0.0;
      for (std::size_t p = 0; p < sum.size(); ++p) {
        const double e = sum[p] / static_cast<double>(count) - ref[p];
        ss += e * e;
      }
      curve.push_back({t, std::sqrt(ss / static_cast<double>(sum.size()))});
    }
  }
  return curve;
}

Autocorrelation autocorrelation(std::span<const double> values, const DimSpec& dim, std::size_t max_lag) {
  const std::size_t n = values.size();
  if (n <= max_lag) throw ConfigError("autocorrelation: trace must be longer than max_lag");
  const double centre = dim_mean(dim, values);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = wrap_delta(dim, values[i], centre);
  // Re-centre the deviations so a plain-mean ACF results on non-wrapped dims.
  double mu = 0.0;
  for (double v : dev) mu += v;
  mu /= static_cast<double>(n);
  for (double& v : dev) v -= mu;

  Autocorrelation out;
  out.values.assign(max_lag + 1, 0.0);
  double c0 = 0.0;
  for (double v : dev) c0 += v * v;
  if (!(c0 > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.values[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += dev[i] * dev[i + lag];
    out.values[lag] = c / c0;
  }
  return out;
}

Autocorrelation autocorrelation(const Trace& trace, const ParamSpace& space, std::size_t dim, std::size_t max_lag,
                                std::size_t first) {
  if (dim >= space.dims() || first > trace.size()) throw ConfigError("autocorrelation: bad dimension or window");
  std::vector<double> v;
  v.reserve(trace.size() - first);
  for (std::size_t i = first; i < trace.size(); ++i) v.push_back(trace.thetas[i * trace.dim + dim]);
  return autocorrelation(v, space.dim(dim), max_lag);
}

double wrapped_distance(const ParamSpace& space, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < space.dims(); ++i) {
    const double d = wrap_delta(space.dim(i), a[i], b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

ModeSet enumerate_room_modes(std::span<const double> theta_star, const RoomOptions& options) {
  const RoomModel model(options);
  if (theta_star.size() != 6 || !model.space().in_support(theta_star))
    throw ConfigError("enumerate_room_modes: theta_star is not a valid room pose");
  const ImageGrid reference = render_room(theta_star, options);
  ModeSet set;
  set.euler_branch = std::cos(theta_star[4]) < 0.0 ? -1 : 1;
  for (const Mat3& q : cube_rotations()) {
    ParamVector mode = rotate_room_pose(theta_star, q);
    const ImageGrid img = render_room(mode, options);
    const auto a = img.data(), b = reference.data();
    for (std::size_t p = 0; p < a.size(); ++p) {
      if (!(std::abs(a[p] - b[p]) <= 1e-9))
        throw NumericalError("enumerate_room_modes: symmetric pose renders differently from theta_star");
    }
    set.modes.push_back(std::move(mode));
  }
  return set;
}

namespace {

/// Moves a room pose onto the Euler branch of the mode set; both branches encode the
/// same camera rotation.
ParamVector fold_branch(const ModeSet& modes, const ParamSpace& space, std::span<const double> theta) {
  ParamVector v(theta.begin(), theta.end());
  if (modes.euler_branch == 0 || v.size() != 6) return v;
  const int branch = std::cos(v[4]) < 0.0 ? -1 : 1;
  if (branch != modes.euler_branch) {
    v[3] += std::numbers::pi;
    v[4] = std::numbers::pi - v[4];
    v[5] += std::numbers::pi;
    space.canonicalize(v);
  }
  return v;
}

}  // namespace

std::size_t nearest_mode(const ModeSet& modes, const ParamSpace& space, std::span<const double> theta) {
  if (modes.modes.empty()) throw ConfigError("nearest_mode: empty mode set");
  const ParamVector v = fold_branch(modes, space, theta);
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t k = 0; k < modes.modes.size(); ++k) {
    const double d = wrapped_distance(space, v, modes.modes[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> modes_visited(const ChainSet& chains, const ModeSet& modes, const ParamSpace& space) {
  if (modes.modes.empty()) throw ConfigError("modes_visited: empty mode set");
  const std::size_t len = chains.length();
  constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first(modes.size(), kNever);
  for (const auto& c : chains.chains) {
    std::size_t last_mode = kNever;
    for (std::size_t t = 0; t < c.size(); ++t) {
      // A rejected step repeats the previous state and cannot reveal a new cell.
      if (t > 0 && !c.accepted[t] && last_mode != kNever) continue;
      last_mode = nearest_mode(modes, space, c.sample(t));
      first[last_mode] = std::min(first[last_mode], t);
    }
  }
  std::vector<std::size_t> visited(len, 0);
  for (std::size_t f : first) {
    if (f < len) ++visited[f];
  }
  for (std::size_t t = 1; t < len; ++t) visited[t] += visited[t - 1];
  return visited;
}

}  // namespace informed
