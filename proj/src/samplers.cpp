#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <numbers>

#include <omp.h>

#include "informed/samplers.hpp"

namespace informed {

double regeneration_probability(double w_x, double w_y, double c) {
  if (!(w_x > 0.0) || !(w_y > 0.0) || !(c > 0.0))
    throw DomainError("regeneration_probability: weights and c must be positive");
  double r = 1.0;
  if (w_x > c && w_y > c) {
    r = std::max(c / w_x, c / w_y);
  } else if (w_x < c && w_y < c) {
    r = std::max(w_x / c, w_y / c);
  }
  return std::clamp(r, 0.0, 1.0);
}

double log_regeneration_probability(double log_w_x, double log_w_y, double log_c) {
  if (std::isnan(log_w_x) || std::isnan(log_w_y) || std::isnan(log_c)) return kNegInf;
  double r = 0.0;
  if (log_w_x > log_c && log_w_y > log_c) {
    r = log_c - std::min(log_w_x, log_w_y);
  } else if (log_w_x < log_c && log_w_y < log_c) {
    r = std::max(log_w_x, log_w_y) - log_c;
  }
  return std::min(r, 0.0);
}

void RegenerationControl::observe(double log_w) {
  if (calibrated_) return;
  samples_.push_back(log_w);
  if (samples_.size() < calibration_) return;
  // Lower median, so c is one of the observed weights.
  const auto mid = samples_.begin() + static_cast<std::ptrdiff_t>((samples_.size() - 1) / 2);
  std::nth_element(samples_.begin(), mid, samples_.end());
  log_c_ = *mid;
  calibrated_ = true;
  samples_.clear();
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

std::vector<std::size_t> all_dims(const ParamSpace& space) {
  std::vector<std::size_t> v(space.dims());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

}  // namespace

GaussianWalk::GaussianWalk(const ParamSpace& space, double sigma, std::vector<std::size_t> scope)
    : space_(&space), scope_(scope.empty() ? all_dims(space) : std::move(scope)) {
  sigma_.assign(scope_.size(), sigma);
  validate();
}

GaussianWalk::GaussianWalk(const ParamSpace& space, std::vector<double> sigma, std::vector<std::size_t> scope)
    : space_(&space), sigma_(std::move(sigma)), scope_(scope.empty() ? all_dims(space) : std::move(scope)) {
  validate();
}

void GaussianWalk::validate() const {
  if (sigma_.size() != scope_.size()) throw ConfigError("GaussianWalk: one sigma per dimension in scope");
  for (double s : sigma_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("GaussianWalk: sigma must be positive");
  }
  for (auto i : scope_) {
    if (i >= space_->dims()) throw ConfigError("GaussianWalk: scope index out of range");
  }
}

ParamVector GaussianWalk::draw(const ParamVector& cur, Rng& rng) const {
  ParamVector out = cur;
  for (std::size_t k = 0; k < scope_.size(); ++k) {
    const std::size_t i = scope_[k];
    out[i] = space_->canonical(i, cur[i] + sigma_[k] * rng.normal());
  }
  return out;
}

double GaussianWalk::log_density(const ParamVector& from, const ParamVector& to) const {
  double s = 0.0;
  for (std::size_t k = 0; k < scope_.size(); ++k) {
    const std::size_t i = scope_[k];
    const DimSpec& d = space_->dim(i);
    const double h = sigma_[k];
    const double delta = wrap_delta(d, to[i], from[i]);
    if (!d.wrapped) {
      const double z = delta / h;
      s += -0.5 * z * z - std::log(h) - kHalfLog2Pi;
      continue;
    }
    // Wrapped Gaussian: enough images that the omitted tail is below double precision.
    const double per = d.period();
    const int images = 1 + static_cast<int>(std::ceil(9.0 * h / per));
    double m = kNegInf;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(2 * images + 1));
    for (int j = -images; j <= images; ++j) {
      const double z = (delta + j * per) / h;
      terms.push_back(-0.5 * z * z);
      m = std::max(m, terms.back());
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - m);
    s += m + std::log(acc) - std::log(h) - kHalfLog2Pi;
  }
  return s;
}

IndependentProposal::IndependentProposal(std::vector<std::vector<std::size_t>> blocks,
                                         std::vector<GlobalProposal> parts)
    : blocks_(std::move(blocks)), parts_(std::move(parts)) {
  if (blocks_.size() != parts_.size() || blocks_.empty())
    throw ConfigError("IndependentProposal: one proposal per block required");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (parts_[b].size() == 0 || parts_[b].dims() != blocks_[b].size())
      throw ConfigError("IndependentProposal: proposal dimension does not match its block");
  }
}

IndependentProposal::IndependentProposal(std::vector<std::size_t> indices, GlobalProposal part)
    : IndependentProposal(std::vector<std::vector<std::size_t>>{std::move(indices)},
                          std::vector<GlobalProposal>{std::move(part)}) {}

ParamVector IndependentProposal::draw(const ParamVector& cur, Rng& rng) const {
  ParamVector out = cur;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const ParamVector v = parts_[b].sample(rng);
    for (std::size_t j = 0; j < v.size(); ++j) out[blocks_[b][j]] = v[j];
  }
  return out;
}

double IndependentProposal::log_density(const ParamVector&, const ParamVector& to) const {
  double s = 0.0;
  std::vector<double> sub;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    sub.resize(blocks_[b].size());
    for (std::size_t j = 0; j < sub.size(); ++j) sub[j] = to[blocks_[b][j]];
    s += parts_[b].logpdf(sub);
  }
  return s;
}

Proposed<ParamVector> IndependentProposal::propose(const ParamVector& cur, Rng& rng) const {
  Proposed<ParamVector> p{draw(cur, rng), 0.0, true};
  p.log_q = log_density(p.value, cur) - log_density(cur, p.value);
  return p;
}

void AdaptiveGlobal::refit(std::span<const double> points) { kde_ = Kde::fit(*space_, points, options_); }

ParamVector AdaptiveGlobal::draw(const ParamVector&, Rng& rng) const {
  return kde_ ? kde_->sample(rng) : space_->sample_uniform(rng);
}

double AdaptiveGlobal::log_density(const ParamVector&, const ParamVector& to) const {
  return kde_ ? kde_->logpdf(to) : space_->prior_logpdf(to);
}

Proposed<ParamVector> AdaptiveGlobal::propose(const ParamVector& cur, Rng& rng) const {
  Proposed<ParamVector> p{draw(cur, rng), 0.0, true};
  p.log_q = log_density(p.value, cur) - log_density(cur, p.value);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

struct SamplerName {
  SamplerId id;
  std::string_view name;
};

constexpr SamplerName kSamplerNames[] = {
    {SamplerId::mh, "mh"},         {SamplerId::mhwg, "mhwg"},       {SamplerId::bmhwg, "bmhwg"},
    {SamplerId::pt, "pt"},         {SamplerId::regmh, "reg-mh"},    {SamplerId::inf_mh, "inf-mh"},
    {SamplerId::inf_indmh, "inf-indmh"}, {SamplerId::inf_bmhwg, "inf-bmhwg"},
};

}  // namespace

std::string_view sampler_name(SamplerId id) {
  for (const auto& s : kSamplerNames) {
    if (s.id == id) return s.name;
  }
  return "unknown";
}

SamplerId parse_sampler(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '_' || c == '-') continue;
    key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (const auto& s : kSamplerNames) {
    std::string cand;
    for (char c : s.name) {
      if (c != '-') cand += c;
    }
    if (cand == key) return s.id;
  }
  throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

bool sampler_needs_model(SamplerId id) {
  return id == SamplerId::inf_mh || id == SamplerId::inf_indmh || id == SamplerId::inf_bmhwg;
}

void Trace::push(std::span<const double> theta, double lp, bool acc) {
  thetas.insert(thetas.end(), theta.begin(), theta.end());
  logp.push_back(lp);
  accepted.push_back(acc ? 1 : 0);
}

namespace {

void tally(ChainStats& s, const StepOutcome& o) {
  ++s.steps;
  ++s.evaluations;
  if (o.accepted) ++s.accepted;
  if (o.degenerate) ++s.degenerate;
  if (o.global) ++s.global_proposals;
}

IndependentProposal full_state_global(const InformedProposal& informed, const ParamSpace& space) {
  std::vector<char> covered(space.dims(), 0);
  for (const auto& b : informed.param_indices) {
    for (auto i : b) {
      if (i >= space.dims() || covered[i]) throw ConfigError("informed proposal blocks do not partition the space");
      covered[i] = 1;
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end())
    throw ConfigError("informed proposal does not cover every dimension");
  return IndependentProposal(informed.param_indices, informed.proposals);
}

}  // namespace

Trace run_chain(const Posterior& posterior, const SamplerConfig& config, const InformedProposal* informed,
                std::size_t n_iter, std::uint64_t seed) {
  const GenerativeModel& model = posterior.model();
  const ParamSpace& space = model.space();
  const std::size_t dim = space.dims();
  if (sampler_needs_model(config.id) && informed == nullptr)
    throw ConfigError(std::string(sampler_name(config.id)) + " requires a trained proposal model");

  Rng rng(seed);
  Trace trace;
  trace.dim = dim;
  trace.thetas.reserve((n_iter + 1) * dim);
  trace.logp.reserve(n_iter + 1);
  trace.accepted.reserve(n_iter + 1);

  ParamVector cur = model.prior_sample(rng);
  double lp = posterior(cur);
  ++trace.stats.evaluations;
  trace.push(cur, lp, false);

  auto record = [&](const StepOutcome& o) {
    tally(trace.stats, o);
    trace.push(cur, lp, o.accepted);
  };

  switch (config.id) {
    case SamplerId::mh: {
      const GaussianWalk kernel(space, config.sigma);
      for (std::size_t t = 0; t < n_iter; ++t) record(mh_step(cur, lp, posterior, kernel, rng));
      break;
    }
    case SamplerId::mhwg: {
      std::vector<GaussianWalk> kernels;
      for (std::size_t i = 0; i < dim; ++i) kernels.emplace_back(space, config.sigma, std::vector<std::size_t>{i});
      for (std::size_t t = 0; t < n_iter; ++t) record(mh_step(cur, lp, posterior, kernels[t % dim], rng));
      break;
    }
    case SamplerId::bmhwg: {
      std::vector<GaussianWalk> kernels;
      for (const auto& b : space.blocks()) kernels.emplace_back(space, config.sigma, b);
      for (std::size_t t = 0; t < n_iter; ++t)
        record(mh_step(cur, lp, posterior, kernels[t % kernels.size()], rng));
      break;
    }
    case SamplerId::inf_mh:
    case SamplerId::inf_indmh: {
      const double alpha = config.id == SamplerId::inf_indmh ? 0.0 : config.alpha;
      const MixtureKernel kernel(GaussianWalk(space, config.sigma), full_state_global(*informed, space), alpha);
      for (std::size_t t = 0; t < n_iter; ++t) record(mh_step(cur, lp, posterior, kernel, rng));
      break;
    }
    case SamplerId::inf_bmhwg: {
      const auto& blocks = space.blocks();
      if (informed->size() != blocks.size())
        throw ConfigError("inf-bmhwg requires one trained proposal per parameter block");
      std::vector<MixtureKernel<GaussianWalk, IndependentProposal>> kernels;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (informed->param_indices[b] != blocks[b])
          throw ConfigError("inf-bmhwg: proposal blocks do not match the parameter blocks");
        kernels.emplace_back(GaussianWalk(space, config.sigma, blocks[b]),
                             IndependentProposal(blocks[b], informed->proposals[b]), config.alpha);
      }
      for (std::size_t t = 0; t < n_iter; ++t)
        record(mh_step(cur, lp, posterior, kernels[t % kernels.size()], rng));
      break;
    }
    case SamplerId::pt: {
      const auto& temps = config.temperatures;
      if (temps.empty() || temps[0] != 1.0) throw ConfigError("pt: the first temperature must be 1");
      for (double T : temps) {
        if (!(T >= 1.0)) throw ConfigError("pt: temperatures must be >= 1");
      }
      std::vector<ParamVector> states{cur};
      std::vector<double> logps{lp};
      for (std::size_t i = 1; i < temps.size(); ++i) {
        states.push_back(model.prior_sample(rng));
        logps.push_back(posterior(states.back()));
        ++trace.stats.evaluations;
      }
      const GaussianWalk kernel(space, config.sigma);
      std::vector<StepOutcome> outcomes;
      for (std::size_t t = 0; t < n_iter; ++t) {
        const bool swapped = pt_sweep(states, logps, temps, posterior, kernel, rng, &outcomes);
        if (swapped) ++trace.stats.swaps;
        trace.stats.evaluations += temps.size() - 1;
        for (std::size_t i = 1; i < outcomes.size(); ++i) trace.stats.degenerate += outcomes[i].degenerate;
        cur = states[0];
        lp = logps[0];
        record(outcomes[0]);
      }
      break;
    }
    case SamplerId::regmh: {
      MixtureKernel kernel(GaussianWalk(space, config.sigma), AdaptiveGlobal(space, config.regen_kde), config.alpha);
      RegenerationControl control(config.regen_calibration);
      auto regenerate = [&](ParamVector& state, double& state_lp, Rng& r) {
        trace.tour_starts.push_back(trace.size());
        // Every sample so far, including the accepted state that triggered regeneration.
        std::vector<double> pts(trace.thetas);
        pts.insert(pts.end(), state.begin(), state.end());
        kernel.global().refit(pts);
        const Kde& kde = *kernel.global().kde();
        constexpr int kMaxDraws = 100000;
        int draws = 0;
        do {
          state = kde.sample(r);
          if (++draws > kMaxDraws) throw NumericalError("reg-mh: refitted proposal has no mass inside the support");
        } while (!space.in_support(state));
        state_lp = posterior(state);
        ++trace.stats.evaluations;
      };
      for (std::size_t t = 0; t < n_iter; ++t) {
        StepOutcome o;
        if (regmh_step(cur, lp, posterior, kernel, control, rng, regenerate, &o)) ++trace.stats.regenerations;
        record(o);
      }
      break;
    }
  }
  return trace;
}

ChainSet run_experiment(const Posterior& posterior, const SamplerConfig& config, const InformedProposal* informed,
                        std::size_t n_iter, std::size_t n_chains, std::uint64_t master_seed, Exec exec) {
  if (n_chains == 0) throw ConfigError("run_experiment: need at least one chain");
  ChainSet set;
  set.chains.resize(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  const auto nc = static_cast<std::ptrdiff_t>(n_chains);
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (parallel && !omp_in_parallel())
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    try {
      set.chains[uc] = run_chain(posterior, config, informed, n_iter, derive_seed(master_seed, uc));
    } catch (...) {
      errors[uc] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return set;
}

}  // namespace informed
