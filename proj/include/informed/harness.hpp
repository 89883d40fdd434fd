#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "informed/config.hpp"
#include "informed/diagnostics.hpp"

namespace informed {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitNumerical = 4 };

/// Maps the library's exception types onto exit codes (1 for anything else).
int exit_code_for(const std::exception& e);

struct TrainSummary {
  std::string model_path;
  std::string model_hash;                 // git blob id of the model file
  std::vector<std::size_t> cluster_sizes; // all blocks, in order (leaf sizes for forests)
};

/// Generates the training set, fits the estimator, writes model.bin and its sidecar.
TrainSummary cmd_train(const ExperimentConfig& config, std::ostream& log);

struct TestCase {
  std::size_t index = 0;
  std::string observation;  // path
  ParamVector theta;
};

/// theta* ~ prior and a noisy observation per case; case i uses derive_seed(testset_seed, i).
std::vector<TestCase> cmd_make_testset(const ExperimentConfig& config, std::ostream& log);
std::vector<TestCase> load_testset(const ExperimentConfig& config);

/// Runs the configured sampler on one test case (or every case) and writes
/// trace.csv and manifest.json per case. Case i uses master seed derive_seed(seed, i).
void cmd_sample(const ExperimentConfig& config, std::optional<std::size_t> testcase, std::ostream& log);

/// In-memory chains for one test case, as cmd_sample would write them.
ChainSet sample_testcase(const ExperimentConfig& config, const TestCase& testcase,
                         const ProposalModel* proposal);

struct ReportRow {
  std::string sampler;
  std::string testcase;  // case index, or "median"
  std::string metric;    // acceptance | psrf | rmse | modes | acf
  std::size_t iter = 0;  // iteration (lag for acf)
  double value = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;

  /// Value of the median row for (sampler, metric) at the largest iteration.
  std::optional<double> final_median(const std::string& sampler, const std::string& metric) const;
};

/// Metrics for the chains of one test case.
std::vector<ReportRow> diagnose_testcase(const ExperimentConfig& config, const std::string& sampler,
                                         const TestCase& testcase, const ChainSet& chains);

/// Reads every run under <output>/runs (or the listed samplers), writes
/// report/report.csv and report/summary.txt.
Report cmd_diagnose(const ExperimentConfig& config, const std::vector<std::string>& samplers, std::ostream& log);

/// Appends the "median" rows over test cases to `rows`.
void add_median_rows(std::vector<ReportRow>& rows);
std::string format_report_csv(const Report& report);
std::string format_summary(const Report& report);

/// Renders theta and writes an 8-bit preview (PGM/PPM). Throws ConfigError for a
/// theta outside the prior support.
void cmd_render(const ExperimentConfig& config, const ParamVector& theta, const std::string& path);

}  // namespace informed
