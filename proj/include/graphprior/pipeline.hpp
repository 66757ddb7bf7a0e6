#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "graphprior/ergm.hpp"

namespace graphprior {

inline constexpr std::array<const char*, 4> kCoverStories = {"class", "work", "park", "city"};
bool is_cover_story(const std::string& story);

// One logged participant response.
struct ResponseRecord {
  std::string session_id;
  std::int64_t chain_id = 0;
  std::string cover_story;
  int round_index = 0;
  PartialGraph pg;
  Graph response;
  double elapsed_seconds = 0.0;
  int nodes_moved = 0;
  int valid_rounds_in_session = 0;

  int nodes() const noexcept { return pg.nodes(); }
  int n_obs() const noexcept { return pg.obscured_count(); }
  int shown() const noexcept { return pg.shown_count(); }
  // Fraction of obscured relations the response turned into edges.
  double f_add() const;
};

enum ExclusionRule : unsigned {
  kTooFast = 1u << 0,
  kLowInteraction = 1u << 1,
  kChangedTooLittle = 1u << 2,
  kNotEnoughPractice = 1u << 3,
};

const char* rule_name(ExclusionRule rule);
inline constexpr std::array<ExclusionRule, 4> kAllRules = {kTooFast, kLowInteraction, kChangedTooLittle,
                                                           kNotEnoughPractice};

// Rules 1-3 for a single record (bitmask of ExclusionRule).
unsigned record_rules(const ResponseRecord& r);

struct ExclusionReport {
  std::vector<unsigned> verdicts;  // per input record, bitmask; 0 = kept
  std::size_t total = 0;
  std::size_t excluded = 0;
  std::array<std::size_t, 4> rule_counts{};  // records triggering each rule

  static std::vector<std::string> rule_names(unsigned mask);
};

struct ExclusionResult {
  std::vector<ResponseRecord> valid;
  ExclusionReport report;
};

// Rule 4 counts the rounds of a session surviving rules 1-3; a session with
// fewer than 4 loses all of them.
ExclusionResult apply_exclusions(const std::vector<ResponseRecord>& records);

// All records for (story, n), in input order.
ResponseDataset aggregate(const std::vector<ResponseRecord>& records, const std::string& story, int n);

// Mean per-round conditional log-likelihood (nats).
double average_loglik(const ErgmModel& model, const ResponseDataset& data);

struct CrossValConfig {
  int splits = 64;
  double train_frac = 0.8;
  std::uint64_t seed = 1;
  bool by_chain = false;
  int jobs = 1;
  FitConfig fit;
};

struct CrossValResult {
  std::vector<int> orders;
  std::vector<double> mean_avgll;  // held-out, per order
  std::vector<double> sd_avgll;
  std::vector<int> used;           // splits contributing per order
  std::vector<int> failures;
  int selected = 0;
  std::vector<std::string> warnings;
};

// Train/test split of a dataset (records, or whole chains when by_chain).
std::pair<ResponseDataset, ResponseDataset> split_dataset(const ResponseDataset& data, double train_frac,
                                                          bool by_chain, Rng& rng);

CrossValResult cross_validate(const ResponseDataset& data, const std::vector<int>& orders,
                              const CrossValConfig& cfg = {});

struct GeneralizationConfig {
  int reps = 64;
  double train_frac = 0.8;
  std::uint64_t seed = 1;
  int jobs = 1;
  FitConfig fit;
};

// values(test story, training story) averaged over the reps that succeeded.
struct GeneralizationMatrix {
  int n = 0;
  int order = 0;
  std::vector<std::string> stories;
  Eigen::MatrixXd values;
  int reps = 0;
  int failed_reps = 0;
};

GeneralizationMatrix generalization_matrix(const std::vector<ResponseDataset>& per_story,
                                           const std::vector<std::string>& stories, int order,
                                           const GeneralizationConfig& cfg = {});

enum class BandStatistic { EdgeDensity, ScaledCherry, ScaledTriangle };
const char* statistic_name(BandStatistic s);

struct Band {
  BandStatistic statistic;
  double mean = 0.0;
  double sd = 0.0;
};

struct ErrorBands {
  std::vector<Band> bands;
  int reps = 0;
  int failures = 0;
};

// Statistic computed from an exact prior table.
double prior_statistic(const PriorTable& prior, BandStatistic s);

// Parametric bootstrap: each rep answers every shown graph with an exact
// posterior draw from `fitted`, refits at the same order and evaluates the
// statistics on the refit prior.
ErrorBands error_bands(const ErgmModel& fitted, const std::vector<PartialGraph>& shown,
                       const std::vector<BandStatistic>& statistics, int reps = 64, std::uint64_t seed = 1,
                       int jobs = 1);

}  // namespace graphprior
