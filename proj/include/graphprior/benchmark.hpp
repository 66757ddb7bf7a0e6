#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphprior/mcmcp.hpp"

namespace graphprior {

// One grid point: chains of `chain_length` rounds until `records` responses
// exist (the last chain is truncated if needed).
struct BenchPoint {
  int chain_length = 0;
  int records = 0;
};

struct BenchScenario {
  std::string name;
  InitPolicy init = InitPolicy::SpreadDensity;
  int burn_in = 0;
  std::vector<BenchPoint> points;
};

struct BenchConfig {
  ErgmModel truth;
  int n_obs = 5;
  int fit_order = 2;
  int reps = 64;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct BenchRow {
  std::string scenario;
  int chain_length = 0;
  int num_records = 0;
  std::string estimator;  // "fit" or "frequency"
  double kl_mean = 0.0;
  double kl_sd = 0.0;
  int reps = 0;
};

// n = 5 bimodal edge-count prior with second-order structure; mixing time
// about 14 rounds at five obscured relations.
ErgmModel default_bench_truth();

// a: fixed 2048 records over chain lengths; b: fixed chain length 16 over
// record counts; c: prior-initialised chains, 600 records.
std::vector<BenchScenario> default_bench_scenarios();

// KL(estimate || truth) for the fitted ERGM and the frequency estimator.
std::vector<BenchRow> run_fit_vs_sample(const BenchConfig& cfg, const std::vector<BenchScenario>& scenarios);

const BenchRow& find_row(const std::vector<BenchRow>& rows, const std::string& scenario,
                         const BenchPoint& point, const std::string& estimator);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace graphprior
