#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mablab/algorithms.hpp"
#include "mablab/core_model.hpp"

namespace mablab {

// File could not be read or written. The message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible persisted data.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

// Plain text with one gaussian mean per line (blank lines and '#' comments
// skipped), or a JSON array of {"kind": "gaussian"|"bernoulli", "mean"|"p",
// "variance"} objects.
std::vector<ArmDistribution> load_means_file(const std::filesystem::path& path);
std::vector<ArmDistribution> parse_means(const std::string& text);

struct ExperimentConfig {
  std::string preset{"table1"};  // "table1", "bestarm", or empty with means_file
  std::filesystem::path means_file;
  std::vector<AlgorithmId> algorithms{AlgorithmId::LucbPlusPlus};
  std::size_t n{10};
  std::size_t k{5};
  double gap{0.5};  // bestarm preset
  double delta{0.1};
  std::size_t trials{50};
  std::uint64_t master_seed{0};
  std::uint64_t max_pulls{10'000'000};
  bool permute_each_trial{false};
  ConfidenceSchedule sched{};
  std::size_t threads{0};  // 0: hardware concurrency

  // table1: k = 5 (or the given k), 0.75 for the first k arms, 0.25 after.
  // bestarm: k = 1, arm 0 at 1.0, the rest at 1.0 - gap.
  Instance instance() const;
  RunOptions run_options() const;
  void validate() const;
};

// trials x algorithms records, grouped by algorithm in config order, then by
// trial. Trial i of algorithm A reads Transcript(seed, trial = i, tag = A).
// With permute_each_trial, pulls and outputs are reported per original arm.
std::vector<RunRecord> run_trials(const ExperimentConfig& cfg);

struct AlgoSummary {
  std::string algo;
  std::size_t n{0};
  std::size_t trials{0};
  double mean_T{0.0};
  double median_T{0.0};
  double std_error{0.0};
  double correct_rate{0.0};
  double truncated_rate{0.0};
  double ratio{0.0};  // mean_T / mean_T(lucbpp); NaN without a lucbpp row
};

struct SummaryTable {
  std::size_t n{0};
  std::vector<AlgoSummary> rows;  // first-appearance order of algorithms

  const AlgoSummary& row(std::string_view algo) const;
};

SummaryTable summarize(const std::vector<RunRecord>& records);

std::vector<SummaryTable> table1_report(const std::vector<std::size_t>& sizes, std::size_t trials,
                                        std::uint64_t seed, const ExperimentConfig& base = {});

// CSV columns: algo,n,mean_T,stderr,ratio,correct_rate,truncated_rate.
void write_csv(std::ostream& out, const std::vector<SummaryTable>& tables);

struct BoundCheck {
  std::string name;
  double empirical{0.0};
  double bound{0.0};
  double required_ratio{1.0};  // flag when empirical < required_ratio * bound
  bool below{false};
};

struct AlgoBoundComparison {
  std::string algo;
  double mean_T{0.0};
  double std_error{0.0};
  std::vector<double> mean_pulls;  // by distribution identity
  std::vector<BoundCheck> checks;
};

struct BoundComparisonReport {
  std::size_t n{0};
  std::size_t k{0};
  double delta{0.0};
  std::vector<AlgoBoundComparison> algos;
  std::vector<std::string> skipped;  // bounds not applicable to this instance
  bool any_below{false};
};

// Needs cfg.permute_each_trial. Compares empirical pulls with the
// permutation, combined, gaussian-MAB and top-k bounds evaluated at `delta`.
// Constant-absorbed bounds use required_ratio 0.1.
BoundComparisonReport bound_comparison_report(const ExperimentConfig& cfg, double delta);

void persist(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> load(const std::filesystem::path& path);
void write_records(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records(std::istream& in);

}  // namespace mablab
