#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "informed/config.hpp"
#include "informed/io.hpp"
#include "informed/renderers.hpp"

namespace informed {

// Each step is the sweep winner under one rule: best PSRF at the final iteration, ties
// broken by acceptance. The inf_bmhwg and inf_mh steps were swept on the desk presets.
double default_sigma(const std::string& problem, SamplerId sampler) {
  if (problem == "tiles") {
    switch (sampler) {
      case SamplerId::bmhwg:
        return 0.7;
      case SamplerId::inf_bmhwg:
        return 0.03;
      case SamplerId::mhwg:
        return 0.9;
      default:
        return 1.1;
    }
  }
  if (sampler == SamplerId::inf_mh) return 0.1;
  return 0.3;
}

double default_alpha(const std::string& problem) { return problem == "tiles" ? 0.8 : 0.7; }

SamplerConfig ExperimentConfig::sampler_config() const {
  SamplerConfig s;
  s.id = parse_sampler(sampler);
  s.sigma = sigma.value_or(default_sigma(problem, s.id));
  s.alpha = alpha.value_or(default_alpha(problem));
  s.temperatures = temperatures;
  s.regen_calibration = regen_calibration;
  s.regen_kde = {kde_scale, kde_floor};
  return s;
}

ProposalTraining ExperimentConfig::training_options() const {
  ProposalTraining t;
  t.kind = estimator == "forest" ? EstimatorKind::forest : EstimatorKind::kmeans_kde;
  t.k = train_k;
  t.forest = {forest_trees, forest_depth, forest_min_leaf, 0};
  t.kde = {kde_scale, kde_floor};
  t.kmeans.max_iterations = kmeans_max_iter;
  t.per_block = problem == "tiles";
  return t;
}

std::string ExperimentConfig::model_path() const { return output + "/model.bin"; }
std::string ExperimentConfig::testset_dir() const { return output + "/testset"; }

std::string ExperimentConfig::run_dir(std::string_view sampler_name, std::size_t testcase) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%03zu", testcase);
  return output + "/runs/" + std::string(sampler_name) + "/" + buf;
}

std::string ExperimentConfig::report_dir() const { return output + "/report"; }

void ExperimentConfig::validate() const {
  if (problem != "room" && problem != "tiles") throw ConfigError("problem must be 'room' or 'tiles'");
  if (width == 0 || height == 0) throw ConfigError("image size must be positive");
  if (!(noise_sigma > 0.0)) throw ConfigError("noise_sigma must be positive");
  if (problem == "room" && (hog_cell == 0 || width % hog_cell != 0 || height % hog_cell != 0))
    throw ConfigError("hog_cell must divide the image width and height");
  if (estimator != "kmeans-kde" && estimator != "forest") throw ConfigError("estimator must be 'kmeans-kde' or 'forest'");
  if (train_n == 0) throw ConfigError("train_n must be >= 1");
  if (estimator == "kmeans-kde" && (train_k == 0 || train_k > train_n))
    throw ConfigError("train_k must satisfy 1 <= k <= train_n");
  if (estimator == "forest" && train_n < 2 * forest_min_leaf)
    throw ConfigError("forest training needs train_n >= 2 * forest_min_leaf");
  const SamplerConfig s = sampler_config();
  if (!(s.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(s.alpha >= 0.0 && s.alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (chains == 0) throw ConfigError("chains must be >= 1");
  if (rmse_stride == 0 || checkpoint_every == 0) throw ConfigError("rmse_stride and checkpoint_every must be >= 1");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw ConfigError("burn_in_fraction must lie in [0, 1)");
  if (s.id == SamplerId::inf_bmhwg && problem != "tiles")
    throw ConfigError("inf-bmhwg needs a block-structured problem (tiles)");
  if (s.id == SamplerId::pt && (temperatures.empty() || temperatures.front() != 1.0))
    throw ConfigError("temperatures must start at 1");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size())
    throw ConfigError("bad value for '" + key + "': '" + value + "'");
  return v;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
  return v;
}

std::vector<double> parse_list(const std::string& key, std::string v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](char c) { return c == '[' || c == ']' || c == ' '; }), v.end());
  std::vector<double> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(parse_number<double>(key, item));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
  return s;
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = unquote(trim(raw_value));
  auto sz = [&] { return parse_number<std::size_t>(key, value); };
  auto u64 = [&] { return parse_number<std::uint64_t>(key, value); };
  auto real = [&] { return parse_number<double>(key, value); };

  if (key == "problem") c.problem = value;
  else if (key == "width") c.width = sz();
  else if (key == "height") c.height = sz();
  else if (key == "noise_sigma") c.noise_sigma = real();
  else if (key == "hog_cell") c.hog_cell = sz();
  else if (key == "tile_scale") c.tile_scale = real();
  else if (key == "blur_sigma") c.blur_sigma = real();
  else if (key == "train_n") c.train_n = sz();
  else if (key == "train_k") c.train_k = sz();
  else if (key == "train_seed") c.train_seed = u64();
  else if (key == "estimator") c.estimator = value;
  else if (key == "forest_trees") c.forest_trees = sz();
  else if (key == "forest_depth") c.forest_depth = sz();
  else if (key == "forest_min_leaf") c.forest_min_leaf = sz();
  else if (key == "kde_scale") c.kde_scale = real();
  else if (key == "kde_floor") c.kde_floor = real();
  else if (key == "kmeans_max_iter") c.kmeans_max_iter = sz();
  else if (key == "sampler") c.sampler = value;
  else if (key == "sigma") c.sigma = value == "default" ? std::nullopt : std::optional<double>(real());
  else if (key == "alpha") c.alpha = value == "default" ? std::nullopt : std::optional<double>(real());
  else if (key == "temperatures") c.temperatures = parse_list(key, value);
  else if (key == "regen_calibration") c.regen_calibration = sz();
  else if (key == "iters") c.iters = sz();
  else if (key == "chains") c.chains = sz();
  else if (key == "seed") c.seed = u64();
  else if (key == "testset_count") c.testset_count = sz();
  else if (key == "testset_seed") c.testset_seed = u64();
  else if (key == "burn_in_fraction") c.burn_in_fraction = real();
  else if (key == "rmse_stride") c.rmse_stride = sz();
  else if (key == "checkpoint_every") c.checkpoint_every = sz();
  else if (key == "acf_max_lag") c.acf_max_lag = sz();
  else if (key == "output") c.output = value;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(base, t.substr(0, eq), t.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
  const SamplerConfig s = c.sampler_config();
  return {
      {"problem", c.problem},
      {"width", std::to_string(c.width)},
      {"height", std::to_string(c.height)},
      {"noise_sigma", format_real(c.noise_sigma)},
      {"hog_cell", std::to_string(c.hog_cell)},
      {"tile_scale", format_real(c.tile_scale)},
      {"blur_sigma", format_real(c.blur_sigma)},
      {"train_n", std::to_string(c.train_n)},
      {"train_k", std::to_string(c.train_k)},
      {"train_seed", std::to_string(c.train_seed)},
      {"estimator", c.estimator},
      {"forest_trees", std::to_string(c.forest_trees)},
      {"forest_depth", std::to_string(c.forest_depth)},
      {"forest_min_leaf", std::to_string(c.forest_min_leaf)},
      {"kde_scale", format_real(c.kde_scale)},
      {"kde_floor", format_real(c.kde_floor)},
      {"kmeans_max_iter", std::to_string(c.kmeans_max_iter)},
      {"sampler", std::string(sampler_name(s.id))},
      {"sigma", format_real(s.sigma)},
      {"alpha", format_real(s.alpha)},
      {"temperatures", join(c.temperatures)},
      {"regen_calibration", std::to_string(c.regen_calibration)},
      {"iters", std::to_string(c.iters)},
      {"chains", std::to_string(c.chains)},
      {"seed", std::to_string(c.seed)},
      {"testset_count", std::to_string(c.testset_count)},
      {"testset_seed", std::to_string(c.testset_seed)},
      {"burn_in_fraction", format_real(c.burn_in_fraction)},
      {"rmse_stride", std::to_string(c.rmse_stride)},
      {"checkpoint_every", std::to_string(c.checkpoint_every)},
      {"acf_max_lag", std::to_string(c.acf_max_lag)},
  };
}

std::unique_ptr<GenerativeModel> make_model(const ExperimentConfig& c) {
  if (c.problem == "room") {
    RoomOptions o;
    o.width = c.width;
    o.height = c.height;
    o.noise_sigma = c.noise_sigma;
    return std::make_unique<RoomModel>(o);
  }
  if (c.problem == "tiles") {
    TilesOptions o;
    o.width = c.width;
    o.height = c.height;
    o.noise_sigma = c.noise_sigma;
    o.tile_scale = c.tile_scale;
    o.blur_sigma = c.blur_sigma;
    return std::make_unique<TilesModel>(o);
  }
  throw ConfigError("unknown problem '" + c.problem + "'");
}

std::unique_ptr<FeatureExtractor> make_extractor(const ExperimentConfig& c) {
  if (c.problem == "room") {
    HogOptions h;
    h.cell = c.hog_cell;
    return std::make_unique<HogExtractor>(ImageShape{c.width, c.height, 1}, h);
  }
  if (c.problem == "tiles") return std::make_unique<RectExtractor>(ImageShape{c.width, c.height, 3});
  throw ConfigError("unknown problem '" + c.problem + "'");
}

}  // namespace informed
