#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "informed/core.hpp"
#include "informed/renderers.hpp"
#include "informed/samplers.hpp"

namespace informed {

/// Fraction of accepted steps among iterations [first, last) of a trace. Iteration 0
/// (the initial state) is not a step, so first >= 1. Throws ConfigError on an empty or
/// out-of-range window.
double acceptance_rate(const Trace& trace, std::size_t first, std::size_t last);
/// Acceptance over iterations 1..upto, pooled over chains.
double acceptance_rate(const ChainSet& chains, std::size_t upto);

/// Gelman-Rubin statistic for equal-length scalar chains (already unwrapped):
/// sqrt(((n-1)/n W + B/n) / W). Zero within-chain variance gives +inf.
double psrf(std::span<const std::vector<double>> chains);

/// PSRF of one dimension over the second half of samples [0, length) of every chain.
/// Wrapped dims are unwrapped around the pooled circular mean. length defaults to the
/// full trace. Throws ConfigError with fewer than 2 chains or length < 10.
double psrf(const ChainSet& chains, const ParamSpace& space, std::size_t dim, std::size_t length = 0);
/// Maximum over dimensions of psrf().
double psrf_max(const ChainSet& chains, const ParamSpace& space, std::size_t length = 0);

struct CurvePoint {
  std::size_t iter = 0;
  double value = 0.0;
};

/// RMSE between the running posterior-mean image and G(theta_star). Samples with
/// index >= burn_in and index % stride == 0 are pooled over chains; one point per
/// multiple of `every` (and the final iteration). Consecutive repeats of a state are
/// rendered once.
std::vector<CurvePoint> rmse_curve(const ChainSet& chains, const GenerativeModel& model,
                                   std::span<const double> theta_star, std::size_t burn_in, std::size_t stride,
                                   std::size_t every);
/// 20% of the chain length.
std::size_t default_burn_in(std::size_t length);

struct Autocorrelation {
  std::vector<double> values;  // values[0] == 1 unless degenerate
  bool degenerate = false;     // zero variance; every lag reported as 0
};

/// Biased normalized ACF of one dimension using wrap-aware deviations from the
/// (circular) mean. Requires trace length > max_lag.
Autocorrelation autocorrelation(std::span<const double> values, const DimSpec& dim, std::size_t max_lag);
Autocorrelation autocorrelation(const Trace& trace, const ParamSpace& space, std::size_t dim, std::size_t max_lag,
                                std::size_t first = 0);

/// Wrap-aware Euclidean distance.
double wrapped_distance(const ParamSpace& space, std::span<const double> a, std::span<const double> b);

struct ModeSet {
  std::vector<ParamVector> modes;
  /// Room poses: +1 or -1 is the sign of cos(pitch) shared by every mode; samples on
  /// the other Euler branch are folded onto it before the nearest-mode search. 0 = off.
  int euler_branch = 0;
  std::size_t size() const { return modes.size(); }
};

/// The 24 poses related to theta_star by the cube's rotation group, identity first.
/// Throws NumericalError unless every pose renders within 1e-9 of G(theta_star).
ModeSet enumerate_room_modes(std::span<const double> theta_star, const RoomOptions& options = {});

/// Index of the nearest mode (wrap-aware); ties go to the lower index.
std::size_t nearest_mode(const ModeSet& modes, const ParamSpace& space, std::span<const double> theta);

/// visited[t] = number of modes whose Voronoi cell holds at least one pooled sample
/// with index <= t, for t in [0, length). Non-decreasing.
std::vector<std::size_t> modes_visited(const ChainSet& chains, const ModeSet& modes, const ParamSpace& space);

}  // namespace informed
