#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "informed/harness.hpp"

using namespace informed;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> sampler;
  std::optional<double> alpha;
  std::optional<double> sigma;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> chains;
  std::optional<std::string> out;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool out_is_dir = true) {
  cmd->add_option("--config", f.config_path, "key=value experiment file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--sampler", f.sampler, "mh, mhwg, bmhwg, pt, reg-mh, inf-mh, inf-indmh, inf-bmhwg");
  cmd->add_option("--alpha", f.alpha, "local weight of the mixture kernel");
  cmd->add_option("--sigma", f.sigma, "local random-walk standard deviation");
  cmd->add_option("--iters", f.iters, "iterations per chain");
  cmd->add_option("--chains", f.chains, "chains per test case");
  cmd->add_option("--out", f.out, out_is_dir ? "output directory" : "output file");
  cmd->add_option("--set", f.settings, "extra key=value override (repeatable)");
}

/// Defaults < config file < INFORMED_OUTPUT_ROOT < flags.
ExperimentConfig resolve(const CommonFlags& f, bool out_is_dir = true) {
  ExperimentConfig c;
  if (!f.config_path.empty()) c = load_config(f.config_path, c);
  if (const char* root = std::getenv("INFORMED_OUTPUT_ROOT"); root && *root) c.output = root;
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) c.seed = *f.seed;
  if (f.sampler) c.sampler = *f.sampler;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.iters) c.iters = *f.iters;
  if (f.chains) c.chains = *f.chains;
  if (f.out && out_is_dir) c.output = *f.out;
  return c;
}

ParamVector parse_theta(const std::string& text) {
  ParamVector v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(" ", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw ConfigError("bad theta value '" + item + "'");
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"informed: MCMC with learned global proposals for inverse graphics"};
  app.require_subcommand(1);

  CommonFlags train_f, test_f, sample_f, diag_f, render_f;
  auto* train = app.add_subcommand("train", "learn the global proposal and write model.bin");
  add_common(train, train_f);
  auto* make_testset = app.add_subcommand("make-testset", "draw theta* and noisy observations");
  add_common(make_testset, test_f);
  auto* sample = app.add_subcommand("sample", "run chains on the test set and write traces");
  add_common(sample, sample_f);
  std::optional<std::size_t> testcase;
  sample->add_option("--testcase", testcase, "run a single test case");
  auto* diagnose = app.add_subcommand("diagnose", "compute metrics over stored traces");
  add_common(diagnose, diag_f);
  std::vector<std::string> diag_samplers;
  diagnose->add_option("--samplers", diag_samplers, "samplers to include (default: all runs)");
  auto* render = app.add_subcommand("render", "write an 8-bit preview of G(theta)");
  add_common(render, render_f, false);
  std::string problem, theta_text;
  render->add_option("--problem", problem, "room or tiles");
  render->add_option("--theta", theta_text, "comma-separated parameters")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      cmd_train(resolve(train_f), std::cout);
    } else if (*make_testset) {
      cmd_make_testset(resolve(test_f), std::cout);
    } else if (*sample) {
      cmd_sample(resolve(sample_f), testcase, std::cout);
    } else if (*diagnose) {
      ExperimentConfig c = resolve(diag_f);
      if (diag_f.sampler) diag_samplers.push_back(*diag_f.sampler);
      cmd_diagnose(c, diag_samplers, std::cout);
    } else if (*render) {
      ExperimentConfig c = resolve(render_f, false);
      if (!problem.empty()) c.problem = problem;
      if (!render_f.out) throw ConfigError("render needs --out <file>");
      cmd_render(c, parse_theta(theta_text), *render_f.out);
      std::cout << "wrote " << *render_f.out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
