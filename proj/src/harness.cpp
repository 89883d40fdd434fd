#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "informed/harness.hpp"
#include "informed/io.hpp"

namespace informed {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return 1;
}

// ---------------------------------------------------------------------------
// train

TrainSummary cmd_train(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const auto model = make_model(config);
  const auto extractor = make_extractor(config);
  log << "generating " << config.train_n << " training pairs (" << model->problem_id() << ", " << extractor->id()
      << " features, " << extractor->length() << " dims)\n";
  const TrainingSet data = generate_training_set(*model, *extractor, config.train_n, config.train_seed);
  log << "fitting " << config.estimator << "\n";
  const ProposalModel proposal = fit_proposal_model(data, model->space(), extractor->id(), config.training_options(),
                                                    derive_seed(config.train_seed, 0x7472616e));
  ensure_directory(config.output);
  TrainSummary summary;
  summary.model_path = config.model_path();
  write_proposal_model(proposal, summary.model_path);
  summary.model_hash = git_blob_hash(read_file_bytes(summary.model_path));

  for (std::size_t b = 0; b < proposal.blocks.size(); ++b) {
    std::vector<std::size_t> sizes;
    if (const auto* c = std::get_if<ClusterModel>(&proposal.blocks[b].estimator)) {
      for (const auto& k : c->kdes) sizes.push_back(k.size());
    } else {
      for (const auto& t : std::get<RegressionForest>(proposal.blocks[b].estimator).trees)
        for (const auto& k : t.leaves) sizes.push_back(k.size());
    }
    summary.cluster_sizes.insert(summary.cluster_sizes.end(), sizes.begin(), sizes.end());
    std::sort(sizes.begin(), sizes.end());
    // Occupancy summary: count, min, quartiles, max.
    auto q = [&](double f) { return sizes[static_cast<std::size_t>(f * static_cast<double>(sizes.size() - 1))]; };
    log << "block " << b << ": " << sizes.size() << (config.estimator == "forest" ? " leaves" : " clusters")
        << ", occupancy min " << sizes.front() << " q1 " << q(0.25) << " median " << q(0.5) << " q3 " << q(0.75)
        << " max " << sizes.back() << "\n";
  }
  log << "wrote " << summary.model_path << " (" << summary.model_hash << ")\n";
  return summary;
}

// ---------------------------------------------------------------------------
// test set

namespace {

std::string case_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "obs_%03zu.bin", i);
  return buf;
}

}  // namespace

std::vector<TestCase> cmd_make_testset(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const auto model = make_model(config);
  const std::string dir = config.testset_dir();
  ensure_directory(dir);
  json manifest;
  manifest["problem"] = config.problem;
  manifest["width"] = config.width;
  manifest["height"] = config.height;
  manifest["noise_sigma"] = config.noise_sigma;
  manifest["seed"] = config.testset_seed;
  manifest["cases"] = json::array();
  std::vector<TestCase> cases;
  for (std::size_t i = 0; i < config.testset_count; ++i) {
    Rng rng(derive_seed(config.testset_seed, i));
    TestCase tc;
    tc.index = i;
    tc.theta = model->prior_sample(rng);
    tc.observation = dir + "/" + case_file(i);
    write_observation(tc.observation, make_observation(*model, tc.theta, rng));
    manifest["cases"].push_back({{"index", i}, {"observation", case_file(i)}, {"theta", tc.theta}});
    cases.push_back(std::move(tc));
  }
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << cases.size() << " test cases to " << dir << "\n";
  return cases;
}

std::vector<TestCase> load_testset(const ExperimentConfig& config) {
  const std::string dir = config.testset_dir();
  const auto bytes = read_file_bytes(dir + "/manifest.json");
  json manifest;
  try {
    manifest = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw IoError("test set manifest: " + std::string(e.what()));
  }
  if (manifest.value("problem", "") != config.problem)
    throw ConfigError("test set was made for problem '" + manifest.value("problem", "") + "'");
  std::vector<TestCase> cases;
  for (const auto& c : manifest.at("cases")) {
    TestCase tc;
    tc.index = c.at("index").get<std::size_t>();
    tc.observation = dir + "/" + c.at("observation").get<std::string>();
    tc.theta = c.at("theta").get<std::vector<double>>();
    cases.push_back(std::move(tc));
  }
  return cases;
}

// ---------------------------------------------------------------------------
// sample

ChainSet sample_testcase(const ExperimentConfig& config, const TestCase& testcase, const ProposalModel* proposal) {
  const auto model = make_model(config);
  const SamplerConfig sc = config.sampler_config();
  ImageGrid obs = read_observation(testcase.observation);
  if (obs.shape() != model->image_shape()) throw ConfigError("observation size does not match the configuration");
  std::optional<InformedProposal> informed;
  if (sampler_needs_model(sc.id)) {
    if (proposal == nullptr) throw ConfigError(std::string(sampler_name(sc.id)) + " needs a trained model file");
    const auto extractor = make_extractor(config);
    if (proposal->extractor_id != extractor->id() || proposal->space != model->space())
      throw ConfigError("model file was trained for a different problem or feature extractor");
    informed = select_informed(*proposal, extractor->extract(obs));
  }
  const Posterior posterior(*model, std::move(obs));
  return run_experiment(posterior, sc, informed ? &*informed : nullptr, config.iters, config.chains,
                        derive_seed(config.seed, testcase.index));
}

void cmd_sample(const ExperimentConfig& config, std::optional<std::size_t> testcase, std::ostream& log) {
  config.validate();
  const SamplerConfig sc = config.sampler_config();
  const auto cases = load_testset(config);
  std::optional<ProposalModel> proposal;
  std::string model_hash;
  if (sampler_needs_model(sc.id)) {
    if (!fs::exists(config.model_path()))
      throw ConfigError("sampler " + std::string(sampler_name(sc.id)) + " needs " + config.model_path() +
                        " (run 'train' first)");
    const auto bytes = read_file_bytes(config.model_path());
    model_hash = git_blob_hash(bytes);
    proposal = deserialize_proposal_model(bytes);
  }
  bool ran = false;
  for (const auto& tc : cases) {
    if (testcase && *testcase != tc.index) continue;
    ran = true;
    const ChainSet chains = sample_testcase(config, tc, proposal ? &*proposal : nullptr);
    const std::string dir = config.run_dir(sampler_name(sc.id), tc.index);
    ensure_directory(dir);
    write_trace_csv(dir + "/trace.csv", chains);

    json m;
    for (const auto& [k, v] : config_entries(config)) m["config"][k] = v;
    m["sampler"] = sampler_name(sc.id);
    m["testcase"] = tc.index;
    const std::uint64_t master = derive_seed(config.seed, tc.index);
    m["master_seed"] = master;
    m["chain_seeds"] = json::array();
    for (std::size_t c = 0; c < chains.chains.size(); ++c) m["chain_seeds"].push_back(derive_seed(master, c));
    m["model_hash"] = model_hash.empty() ? json(nullptr) : json(model_hash);
    m["chains"] = json::array();
    for (const auto& t : chains.chains) {
      m["chains"].push_back({{"steps", t.stats.steps},
                             {"accepted", t.stats.accepted},
                             {"evaluations", t.stats.evaluations},
                             {"degenerate", t.stats.degenerate},
                             {"global_proposals", t.stats.global_proposals},
                             {"regenerations", t.stats.regenerations},
                             {"swaps", t.stats.swaps}});
    }
    write_text_file(dir + "/manifest.json", m.dump(2) + "\n");
    std::uint64_t degenerate = 0, accepted = 0, steps = 0;
    for (const auto& t : chains.chains) {
      degenerate += t.stats.degenerate;
      accepted += t.stats.accepted;
      steps += t.stats.steps;
    }
    log << sampler_name(sc.id) << " case " << tc.index << ": acceptance "
        << (steps ? static_cast<double>(accepted) / static_cast<double>(steps) : 0.0) << "\n";
    if (degenerate) log << "warning: " << degenerate << " proposals had non-finite densities and were rejected\n";
  }
  if (!ran) throw ConfigError("no such test case");
}

// ---------------------------------------------------------------------------
// diagnose

namespace {

std::vector<std::size_t> checkpoints(std::size_t length, std::size_t every) {
  std::vector<std::size_t> out;
  if (length < 2) return out;
  for (std::size_t t = every; t < length; t += every) out.push_back(t);
  if (out.empty() || out.back() != length - 1) out.push_back(length - 1);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<ReportRow> diagnose_testcase(const ExperimentConfig& config, const std::string& sampler,
                                         const TestCase& testcase, const ChainSet& chains) {
  const auto model = make_model(config);
  const ParamSpace& space = model->space();
  if (chains.dim() != space.dims()) throw ConfigError("trace dimension does not match the problem");
  const std::size_t len = chains.length();
  const std::string tc = std::to_string(testcase.index);
  std::vector<ReportRow> rows;
  const auto cps = checkpoints(len, config.checkpoint_every);

  for (std::size_t t : cps) rows.push_back({sampler, tc, "acceptance", t, acceptance_rate(chains, t)});
  if (chains.chains.size() >= 2) {
    for (std::size_t t : cps) {
      if (t + 1 >= 10) rows.push_back({sampler, tc, "psrf", t, psrf_max(chains, space, t + 1)});
    }
  }
  const auto burn = static_cast<std::size_t>(config.burn_in_fraction * static_cast<double>(len));
  for (const auto& p : rmse_curve(chains, *model, testcase.theta, burn, config.rmse_stride, config.checkpoint_every))
    rows.push_back({sampler, tc, "rmse", p.iter, p.value});
  if (config.problem == "room") {
    RoomOptions o;
    o.width = config.width;
    o.height = config.height;
    o.noise_sigma = config.noise_sigma;
    const ModeSet modes = enumerate_room_modes(testcase.theta, o);
    const auto visited = modes_visited(chains, modes, space);
    for (std::size_t t : cps) rows.push_back({sampler, tc, "modes", t, static_cast<double>(visited[t])});
  }
  if (len > burn + config.acf_max_lag + 1) {
    std::vector<std::vector<double>> per_lag(config.acf_max_lag + 1);
    for (const auto& c : chains.chains) {
      for (std::size_t d = 0; d < space.dims(); ++d) {
        const Autocorrelation a = autocorrelation(c, space, d, config.acf_max_lag, burn);
        // A stuck chain is perfectly correlated.
        for (std::size_t l = 0; l <= config.acf_max_lag; ++l) per_lag[l].push_back(a.degenerate ? 1.0 : a.values[l]);
      }
    }
    for (std::size_t l = 0; l <= config.acf_max_lag; ++l) rows.push_back({sampler, tc, "acf", l, median(per_lag[l])});
  }
  return rows;
}

void add_median_rows(std::vector<ReportRow>& rows) {
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (r.testcase != "median") groups[{r.sampler, r.metric, r.iter}].push_back(r.value);
  }
  for (auto& [key, values] : groups) {
    rows.push_back({std::get<0>(key), "median", std::get<1>(key), std::get<2>(key), median(values)});
  }
}

std::optional<double> Report::final_median(const std::string& sampler, const std::string& metric) const {
  std::optional<double> v;
  std::size_t best = 0;
  for (const auto& r : rows) {
    if (r.sampler == sampler && r.metric == metric && r.testcase == "median" && (!v || r.iter >= best)) {
      best = r.iter;
      v = r.value;
    }
  }
  return v;
}

std::string format_report_csv(const Report& report) {
  std::string out = "sampler,testcase,metric,iter,value\n";
  for (const auto& r : report.rows) {
    out += r.sampler + "," + r.testcase + "," + r.metric + "," + std::to_string(r.iter) + "," + format_real(r.value) +
           "\n";
  }
  return out;
}

std::string format_summary(const Report& report) {
  std::vector<std::string> samplers;
  for (const auto& r : report.rows) {
    if (std::find(samplers.begin(), samplers.end(), r.sampler) == samplers.end()) samplers.push_back(r.sampler);
  }
  const char* metrics[] = {"acceptance", "psrf", "rmse", "modes"};
  std::ostringstream out;
  out << "median over test cases at the final iteration\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %12s %12s %12s %12s\n", "sampler", "acceptance", "psrf", "rmse", "modes");
  out << line;
  for (const auto& s : samplers) {
    std::snprintf(line, sizeof line, "%-12s", s.c_str());
    out << line;
    for (const char* m : metrics) {
      const auto v = report.final_median(s, m);
      if (v) {
        std::snprintf(line, sizeof line, " %12.4g", *v);
      } else {
        std::snprintf(line, sizeof line, " %12s", "-");
      }
      out << line;
    }
    out << "\n";
  }
  return out.str();
}

Report cmd_diagnose(const ExperimentConfig& config, const std::vector<std::string>& samplers, std::ostream& log) {
  const auto cases = load_testset(config);
  std::vector<std::string> names = samplers;
  const std::string runs = config.output + "/runs";
  if (names.empty()) {
    if (!fs::is_directory(runs)) throw IoError("no runs found under " + runs);
    for (const auto& e : fs::directory_iterator(runs)) {
      if (e.is_directory()) names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
  }
  Report report;
  for (const auto& name : names) {
    const std::string canonical(sampler_name(parse_sampler(name)));
    std::size_t found = 0;
    for (const auto& tc : cases) {
      const std::string path = config.run_dir(canonical, tc.index) + "/trace.csv";
      if (!fs::exists(path)) continue;
      ++found;
      const ChainSet chains = read_trace_csv(path);
      const auto rows = diagnose_testcase(config, canonical, tc, chains);
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
    if (found == 0) throw IoError("no traces for sampler " + canonical);
    log << canonical << ": " << found << " test cases\n";
  }
  add_median_rows(report.rows);
  ensure_directory(config.report_dir());
  write_text_file(config.report_dir() + "/report.csv", format_report_csv(report));
  const std::string summary = format_summary(report);
  write_text_file(config.report_dir() + "/summary.txt", summary);
  log << summary;
  return report;
}

// ---------------------------------------------------------------------------
// render

void cmd_render(const ExperimentConfig& config, const ParamVector& theta, const std::string& path) {
  const auto model = make_model(config);
  if (theta.size() != model->space().dims())
    throw ConfigError("theta needs " + std::to_string(model->space().dims()) + " values for " + config.problem);
  ParamVector t = theta;
  model->space().canonicalize(t);
  if (!model->space().in_support(t)) throw ConfigError("theta lies outside the prior support");
  write_preview(path, model->render(t));
}

}  // namespace informed
