#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "informed/core.hpp"
#include "informed/proposal.hpp"

namespace informed {

// ---------------------------------------------------------------------------
// Generic Metropolis-Hastings machinery. Kernels are duck-typed over the state type:
//
//   Proposed<State> propose(const State& cur, Rng&) const;     // value + log q-ratio
//   State draw(const State& cur, Rng&) const;                  // raw draw
//   double log_density(const State& from, const State& to) const;
//
// log_q is log T(prop -> cur) - log T(cur -> prop); symmetric kernels report exactly 0.

template <class State>
struct Proposed {
  State value;
  double log_q = 0.0;
  bool global = false;
};

struct StepOutcome {
  bool accepted = false;
  bool global = false;
  bool degenerate = false;
  double proposal_logp = kNegInf;
};

/// Accept/reject an already drawn proposal targeting pi^inv_temperature. Exactly one
/// target evaluation and one uniform draw per call. A NaN or +inf proposal ratio, or a
/// NaN target value, is rejected and flagged degenerate.
template <class State, class Target>
StepOutcome mh_decide(Proposed<State>& prop, State& cur, double& cur_logp, const Target& target, Rng& rng,
                      double inv_temperature = 1.0) {
  StepOutcome out;
  out.global = prop.global;
  const double lp = target(prop.value);
  out.proposal_logp = lp;
  const double log_u = std::log(rng.uniform());
  if (std::isnan(prop.log_q) || prop.log_q == kInf || std::isnan(lp)) {
    out.degenerate = true;
    return out;
  }
  if (lp == kNegInf) return out;
  const double log_a = inv_temperature * (lp - cur_logp) + prop.log_q;
  if (log_u < log_a) {
    cur = std::move(prop.value);
    cur_logp = lp;
    out.accepted = true;
  }
  return out;
}

/// One MH transition: propose, then mh_decide.
template <class State, class Target, class Kernel>
StepOutcome mh_step(State& cur, double& cur_logp, const Target& target, const Kernel& kernel, Rng& rng,
                    double inv_temperature = 1.0) {
  Proposed<State> prop = kernel.propose(cur, rng);
  return mh_decide(prop, cur, cur_logp, target, rng, inv_temperature);
}

/// T = alpha * T_L + (1 - alpha) * T_G. alpha == 1 delegates to the local kernel
/// untouched (no component draw), alpha == 0 to the global kernel.
template <class Local, class Global>
class MixtureKernel {
 public:
  MixtureKernel(Local local, Global global, double alpha)
      : local_(std::move(local)), global_(std::move(global)), alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("MixtureKernel: alpha must lie in [0, 1]");
    log_alpha_ = std::log(alpha);
    log_beta_ = std::log1p(-alpha);
  }

  double alpha() const { return alpha_; }
  const Local& local() const { return local_; }
  const Global& global() const { return global_; }
  Global& global() { return global_; }

  template <class State>
  double log_density(const State& from, const State& to) const {
    if (alpha_ == 1.0) return local_.log_density(from, to);
    if (alpha_ == 0.0) return global_.log_density(from, to);
    const double a = log_alpha_ + local_.log_density(from, to);
    const double b = log_beta_ + global_.log_density(from, to);
    const double m = std::max(a, b);
    if (m == kNegInf) return kNegInf;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  template <class State>
  Proposed<State> propose(const State& cur, Rng& rng) const {
    if (alpha_ == 1.0) return local_.propose(cur, rng);
    if (alpha_ == 0.0) return global_.propose(cur, rng);
    const bool use_local = rng.uniform() < alpha_;
    Proposed<State> p;
    p.value = use_local ? local_.draw(cur, rng) : global_.draw(cur, rng);
    p.global = !use_local;
    p.log_q = log_density(p.value, cur) - log_density(cur, p.value);
    return p;
  }

 private:
  Local local_;
  Global global_;
  double alpha_;
  double log_alpha_ = 0.0;
  double log_beta_ = 0.0;
};

/// Parallel tempering sweep: one MH step per temperature, then one swap between a
/// uniformly chosen unordered pair. Returns true when a swap was accepted.
template <class State, class Target, class Kernel>
bool pt_sweep(std::vector<State>& states, std::vector<double>& logps, std::span<const double> temperatures,
              const Target& target, const Kernel& kernel, Rng& rng, std::vector<StepOutcome>* outcomes = nullptr) {
  const std::size_t n = states.size();
  if (outcomes) outcomes->resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const StepOutcome o = mh_step(states[t], logps[t], target, kernel, rng, 1.0 / temperatures[t]);
    if (outcomes) (*outcomes)[t] = o;
  }
  if (n < 2) return false;
  std::size_t i = rng.index(n), j = rng.index(n - 1);
  if (j >= i) ++j;
  if (i > j) std::swap(i, j);
  const double log_r = (1.0 / temperatures[i] - 1.0 / temperatures[j]) * (logps[j] - logps[i]);
  const double log_u = std::log(rng.uniform());
  if (std::isnan(log_r) || !(log_u < log_r)) return false;
  std::swap(states[i], states[j]);
  std::swap(logps[i], logps[j]);
  return true;
}

/// Regeneration probability for an accepted independence move x -> y with importance
/// weights w = pi / T_G and constant c. Throws DomainError for nonpositive inputs.
double regeneration_probability(double w_x, double w_y, double c);
/// Same, with every argument given as a logarithm. Returns log r in [-inf, 0].
double log_regeneration_probability(double log_w_x, double log_w_y, double log_c);

/// Calibrates c as the median importance weight over the first `calibration`
/// independence proposals, then keeps it frozen.
class RegenerationControl {
 public:
  explicit RegenerationControl(std::size_t calibration = 200) : calibration_(calibration) {}

  bool calibrated() const { return calibrated_; }
  double log_c() const { return log_c_; }
  /// Records log w of an independence proposal while calibrating.
  void observe(double log_w);
  /// Fixes c directly (skips calibration).
  void set_log_c(double log_c) {
    log_c_ = log_c;
    calibrated_ = true;
  }

 private:
  std::size_t calibration_;
  std::vector<double> samples_;
  double log_c_ = 0.0;
  bool calibrated_ = false;
};

/// One REG-MH step on a mixture kernel whose global part has a state-independent
/// density. After an accepted independence move, regeneration fires with
/// log_regeneration_probability; `regenerate(state, logp, rng)` then replaces the
/// current state (and may adapt the kernel). Returns true on regeneration.
template <class State, class Target, class Local, class Global, class Regenerate>
bool regmh_step(State& cur, double& cur_logp, const Target& target, const MixtureKernel<Local, Global>& kernel,
                RegenerationControl& control, Rng& rng, Regenerate&& regenerate, StepOutcome* outcome = nullptr) {
  const State before = cur;
  const double before_logp = cur_logp;
  Proposed<State> prop = kernel.propose(cur, rng);
  const double log_g_prop = prop.global ? kernel.global().log_density(before, prop.value) : 0.0;
  const StepOutcome o = mh_decide(prop, cur, cur_logp, target, rng);
  if (outcome) *outcome = o;
  if (!o.global || o.degenerate) return false;
  if (!control.calibrated()) {
    const double log_w = o.proposal_logp - log_g_prop;
    if (std::isfinite(log_w)) control.observe(log_w);
    return false;
  }
  if (!o.accepted) return false;
  const double log_wx = before_logp - kernel.global().log_density(cur, before);
  const double log_wy = cur_logp - log_g_prop;
  const double log_r = log_regeneration_probability(log_wx, log_wy, control.log_c());
  const double log_u = std::log(rng.uniform());
  if (!(log_u < log_r)) return false;
  regenerate(cur, cur_logp, rng);
  return true;
}

// ---------------------------------------------------------------------------
// Continuous kernels over a ParamSpace

/// Symmetric Gaussian random walk on a subset of dimensions. Plain dims are not
/// clamped (out-of-bounds proposals get zero prior mass); wrapped dims are
/// re-canonicalized and use the wrapped-Gaussian density.
class GaussianWalk {
 public:
  GaussianWalk(const ParamSpace& space, double sigma, std::vector<std::size_t> scope = {});
  GaussianWalk(const ParamSpace& space, std::vector<double> sigma, std::vector<std::size_t> scope = {});

  const std::vector<std::size_t>& scope() const { return scope_; }

  ParamVector draw(const ParamVector& cur, Rng& rng) const;
  Proposed<ParamVector> propose(const ParamVector& cur, Rng& rng) const { return {draw(cur, rng), 0.0, false}; }
  double log_density(const ParamVector& from, const ParamVector& to) const;

 private:
  void validate() const;

  const ParamSpace* space_;
  std::vector<double> sigma_;  // per scope entry
  std::vector<std::size_t> scope_;
};

/// State-independent proposal on a subset of dimensions (a block, or every dim),
/// backed by one GlobalProposal per block; the full-state version is the product.
class IndependentProposal {
 public:
  IndependentProposal(std::vector<std::vector<std::size_t>> blocks, std::vector<GlobalProposal> parts);
  /// Single block covering `indices`.
  IndependentProposal(std::vector<std::size_t> indices, GlobalProposal part);

  ParamVector draw(const ParamVector& cur, Rng& rng) const;
  Proposed<ParamVector> propose(const ParamVector& cur, Rng& rng) const;
  double log_density(const ParamVector& from, const ParamVector& to) const;

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<GlobalProposal> parts_;
};

/// Global part of REG-MH: starts as the prior, replaced by a KDE refit at regenerations.
class AdaptiveGlobal {
 public:
  AdaptiveGlobal(const ParamSpace& space, KdeOptions options = {}) : space_(&space), options_(options) {}

  bool adapted() const { return kde_.has_value(); }
  const Kde* kde() const { return kde_ ? &*kde_ : nullptr; }
  void refit(std::span<const double> points);

  ParamVector draw(const ParamVector& cur, Rng& rng) const;
  Proposed<ParamVector> propose(const ParamVector& cur, Rng& rng) const;
  double log_density(const ParamVector& from, const ParamVector& to) const;

 private:
  const ParamSpace* space_;
  KdeOptions options_;
  std::optional<Kde> kde_;
};

// ---------------------------------------------------------------------------
// Sampler variants and chain drivers

enum class SamplerId { mh, mhwg, bmhwg, pt, regmh, inf_mh, inf_indmh, inf_bmhwg };

std::string_view sampler_name(SamplerId id);
/// Accepts "mh", "inf-mh", "INF-MH", "inf_mh", ... Throws ConfigError otherwise.
SamplerId parse_sampler(std::string_view name);
bool sampler_needs_model(SamplerId id);

struct SamplerConfig {
  SamplerId id = SamplerId::mh;
  double sigma = 0.3;  // local random-walk std, every dimension
  double alpha = 0.7;  // local weight of the mixture
  std::vector<double> temperatures{1.0, 3.0, 27.0};
  std::size_t regen_calibration = 200;
  KdeOptions regen_kde;
};

struct ChainStats {
  std::uint64_t steps = 0;
  std::uint64_t accepted = 0;
  std::uint64_t evaluations = 0;  // calls of the posterior (renders)
  std::uint64_t degenerate = 0;
  std::uint64_t global_proposals = 0;
  std::uint64_t regenerations = 0;
  std::uint64_t swaps = 0;

  bool operator==(const ChainStats&) const = default;
};

/// Samples 0..n_iter; entry 0 is the initial state. One iteration is one kernel
/// application: a full-state step, one dimension (MHWG), one block (BMHWG), or one
/// cold-chain step (PT).
struct Trace {
  std::size_t dim = 0;
  std::vector<double> thetas;          // (n_iter + 1) x dim
  std::vector<double> logp;            // cached log posterior of each sample
  std::vector<std::uint8_t> accepted;  // accepted[0] == 0
  std::vector<std::size_t> tour_starts;
  ChainStats stats;

  std::size_t size() const { return logp.size(); }
  std::span<const double> sample(std::size_t i) const { return {thetas.data() + i * dim, dim}; }
  void push(std::span<const double> theta, double lp, bool acc);
  bool operator==(const Trace&) const = default;
};

struct ChainSet {
  std::vector<Trace> chains;

  std::size_t dim() const { return chains.empty() ? 0 : chains.front().dim; }
  std::size_t length() const { return chains.empty() ? 0 : chains.front().size(); }
  bool operator==(const ChainSet&) const = default;
};

/// Runs one chain from a prior-sampled start using `seed` for every draw.
/// `informed` is required for the INF-* samplers.
Trace run_chain(const Posterior& posterior, const SamplerConfig& config, const InformedProposal* informed,
                std::size_t n_iter, std::uint64_t seed);

/// n_chains independent chains; chain c uses derive_seed(master_seed, c).
ChainSet run_experiment(const Posterior& posterior, const SamplerConfig& config, const InformedProposal* informed,
                        std::size_t n_iter, std::size_t n_chains, std::uint64_t master_seed,
                        Exec exec = Exec::parallel);

}  // namespace informed
