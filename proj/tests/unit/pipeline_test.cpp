#include <gtest/gtest.h>

#include <cmath>

#include "graphprior/error.hpp"
#include "graphprior/mcmcp.hpp"
#include "graphprior/pipeline.hpp"

using namespace graphprior;

namespace {

// n-node record with every shown relation absent and the first `n_obs`
// slots obscured; `added` of the obscured slots become edges.
ResponseRecord make_record(int n, int n_obs, double elapsed, int moved, int added = 1,
                           std::string session = "s", int round = 1) {
  ResponseRecord r;
  r.session_id = std::move(session);
  r.chain_id = 1;
  r.cover_story = "class";
  r.round_index = round;
  r.pg = PartialGraph(n, EdgeBits{}, EdgeBits::low_mask(n_obs));
  r.response = Graph(n, EdgeBits::low_mask(std::min(added, n_obs)));
  r.elapsed_seconds = elapsed;
  r.nodes_moved = moved;
  return r;
}

struct RuleCase {
  int n, n_obs;
  double elapsed;
  int moved, added;
  unsigned expected;
};

ResponseDataset simulate(const PriorTable& prior, int n_obs, int chains, int rounds, std::uint64_t seed) {
  ChainConfig cfg{prior.nodes(), n_obs, rounds, chains, seed, 1};
  return simulate_chains(prior, cfg, ChainInit{InitPolicy::SampleFromPrior, {}});
}

}  // namespace

TEST(Exclusions, RuleTable) {
  const std::vector<RuleCase> cases = {
      {5, 3, 14.0, 5, 1, kTooFast},              // s=7, 2 s per relation
      {5, 3, 21.0, 5, 1, 0},                     // exactly 3 s per relation
      {5, 3, 20.99, 5, 1, kTooFast},
      {8, 10, 60.0, 1, 2, 0},                    // threshold ceil(8/4)-1 = 1
      {8, 10, 60.0, 0, 2, kLowInteraction},
      {8, 10, 60.0, 1, 1, kChangedTooLittle},    // 0.1 * 8 < 1
      {12, 10, 200.0, 1, 1, kLowInteraction},    // threshold 2
      {4, 1, 20.0, 0, 1, 0},                     // threshold 0
      {5, 6, 12.0, 5, 0, kChangedTooLittle},     // 0 * 5 < 1
      {5, 5, 15.0, 5, 0, 0},                     // n_obs not above 5
      {10, 10, 200.0, 5, 1, 0},                  // f_add * n = 1
      {15, 20, 255.0, 5, 1, kChangedTooLittle},  // 0.05 * 15 = 0.75
      {15, 20, 10.0, 0, 0, kTooFast | kLowInteraction | kChangedTooLittle},
  };
  for (const auto& c : cases) {
    auto r = make_record(c.n, c.n_obs, c.elapsed, c.moved, c.added);
    EXPECT_EQ(record_rules(r), c.expected) << "n=" << c.n << " n_obs=" << c.n_obs << " elapsed=" << c.elapsed;
  }
}

TEST(Exclusions, FAdd) {
  auto r = make_record(6, 8, 100.0, 3, 2);
  EXPECT_DOUBLE_EQ(r.f_add(), 0.25);
  EXPECT_EQ(make_record(6, 0, 100.0, 3, 0).f_add(), 0.0);
}

TEST(Exclusions, NotEnoughPracticeDropsSession) {
  std::vector<ResponseRecord> records;
  for (int k = 1; k <= 5; ++k) records.push_back(make_record(5, 3, k <= 3 ? 30.0 : 1.0, 5, 1, "a", k));
  for (int k = 1; k <= 4; ++k) records.push_back(make_record(5, 3, 30.0, 5, 1, "b", k));
  const auto res = apply_exclusions(records);
  EXPECT_EQ(res.valid.size(), 4u);
  for (const auto& r : res.valid) EXPECT_EQ(r.session_id, "b");
  EXPECT_EQ(res.report.total, 9u);
  EXPECT_EQ(res.report.excluded, 5u);
  EXPECT_EQ(res.report.rule_counts[0], 2u);
  EXPECT_EQ(res.report.rule_counts[3], 5u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(res.report.verdicts[i], static_cast<unsigned>(kNotEnoughPractice));
  EXPECT_EQ(res.report.verdicts[3], static_cast<unsigned>(kTooFast | kNotEnoughPractice));
  EXPECT_EQ(ExclusionReport::rule_names(res.report.verdicts[3]),
            (std::vector<std::string>{"too_fast", "not_enough_practice"}));
}

TEST(Exclusions, IdempotentAndOrderIndependent) {
  std::vector<ResponseRecord> records;
  for (int k = 1; k <= 8; ++k) records.push_back(make_record(6, 4 + k % 4, 10.0 + 5 * k, k % 3, k % 2, "x", k));
  for (int k = 1; k <= 6; ++k) records.push_back(make_record(7, 2 + k, 60.0, 2, 1, "y", k));
  const auto once = apply_exclusions(records);
  const auto twice = apply_exclusions(once.valid);
  EXPECT_EQ(twice.report.excluded, 0u);
  EXPECT_EQ(twice.valid.size(), once.valid.size());
  std::vector<ResponseRecord> reversed(records.rbegin(), records.rend());
  const auto rev = apply_exclusions(reversed);
  EXPECT_EQ(rev.report.excluded, once.report.excluded);
  for (std::size_t i = 0; i < records.size(); ++i)
    EXPECT_EQ(rev.report.verdicts[records.size() - 1 - i], once.report.verdicts[i]);
}

TEST(Aggregate, FiltersByStoryAndNodes) {
  std::vector<ResponseRecord> records;
  for (int chain = 0; chain < 2; ++chain)
    for (int k = 1; k <= 5; ++k) {
      auto r = make_record(5, 1 + k, 30.0, 5, 1, "s", k);
      r.chain_id = chain;
      records.push_back(r);
    }
  auto other = make_record(5, 3, 30.0, 5);
  other.cover_story = "park";
  records.push_back(other);
  records.push_back(make_record(6, 3, 30.0, 5));
  const auto d = aggregate(records, "class", 5);
  EXPECT_EQ(d.size(), 10u);
  EXPECT_EQ(d.n, 5);
  EXPECT_EQ(d.records[7].chain, 1);
  EXPECT_EQ(d.records[7].round, 3);
  EXPECT_EQ(aggregate(records, "park", 5).size(), 1u);
  EXPECT_TRUE(aggregate(records, "city", 5).empty());
}

TEST(AverageLoglik, ZeroModelIsMinusObscuredLog2) {
  const auto data = simulate(PriorTable::erdos_renyi(5, 0.3), 4, 5, 6, 3);
  EXPECT_NEAR(average_loglik(ErgmModel::zero(5, 3), data), -data.mean_obscured() * std::log(2.0), 1e-12);
}

TEST(CrossValidate, ZeroTruthOrdersTie) {
  const auto data = simulate(PriorTable::uniform_labeled(5), 5, 40, 10, 4);
  CrossValConfig cfg;
  cfg.splits = 8;
  const auto cv = cross_validate(data, {1, 2, 3}, cfg);
  ASSERT_EQ(cv.mean_avgll.size(), 3u);
  for (double v : cv.mean_avgll) EXPECT_NEAR(v, -5 * std::log(2.0), 0.05);
  EXPECT_NEAR(cv.mean_avgll[0], cv.mean_avgll[2], 0.02);
  EXPECT_EQ(cv.used[0], 8);
  EXPECT_TRUE(cv.selected >= 1 && cv.selected <= 3);
}

TEST(CrossValidate, TooFewRecords) {
  const auto data = simulate(PriorTable::uniform_labeled(4), 3, 1, 9, 4);
  EXPECT_THROW(cross_validate(data, {1}), ArgumentError);
}

TEST(CrossValidate, DeterministicGivenSeed) {
  const auto data = simulate(PriorTable::erdos_renyi(4, 0.4), 3, 20, 5, 5);
  CrossValConfig cfg;
  cfg.splits = 4;
  const auto a = cross_validate(data, {1, 2}, cfg);
  cfg.jobs = 3;
  const auto b = cross_validate(data, {1, 2}, cfg);
  EXPECT_EQ(a.mean_avgll, b.mean_avgll);
}

TEST(Split, ByChainKeepsChainsTogether) {
  const auto data = simulate(PriorTable::uniform_labeled(4), 3, 10, 4, 6);
  Rng rng(1);
  const auto [train, test] = split_dataset(data, 0.8, true, rng);
  EXPECT_EQ(train.size() + test.size(), data.size());
  EXPECT_EQ(test.size() % 4, 0u);
  for (const auto& t : test.records)
    for (const auto& r : train.records) EXPECT_NE(t.chain, r.chain);
}

TEST(GeneralizationMatrix, FullyShownIsExactlyOne) {
  std::vector<ResponseDataset> per_story;
  for (int s = 0; s < 4; ++s) {
    auto d = simulate(PriorTable::erdos_renyi(4, 0.5), 0, 5, 4, 10 + s);
    per_story.push_back(d);
  }
  GeneralizationConfig cfg;
  cfg.reps = 3;
  const auto gm = generalization_matrix(per_story, {"class", "work", "park", "city"}, 2, cfg);
  EXPECT_EQ(gm.failed_reps, 0);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) EXPECT_EQ(gm.values(i, j), 1.0);
}

TEST(GeneralizationMatrix, SharedPriorNearOne) {
  std::vector<ResponseDataset> per_story;
  const auto prior = prior_table(ErgmModel::with_beta(4, 1, std::vector<double>{-0.5}));
  for (int s = 0; s < 4; ++s) per_story.push_back(simulate(prior, 3, 100, 10, 20 + s));
  GeneralizationConfig cfg;
  cfg.reps = 8;
  const auto gm = generalization_matrix(per_story, {"class", "work", "park", "city"}, 2, cfg);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_TRUE(std::isfinite(gm.values(i, j)));
      EXPECT_NEAR(gm.values(i, j), 1.0, 0.02);
    }
}

TEST(PriorStatistic, ErdosRenyi) {
  const auto p = PriorTable::erdos_renyi(6, 0.3);
  EXPECT_NEAR(prior_statistic(p, BandStatistic::EdgeDensity), 0.3, 1e-12);
  EXPECT_NEAR(prior_statistic(p, BandStatistic::ScaledCherry), 0.0, 1e-10);
  EXPECT_NEAR(prior_statistic(p, BandStatistic::ScaledTriangle), 0.0, 1e-10);
}

TEST(ErrorBands, FullyShownHasZeroSpread) {
  const auto model = ErgmModel::with_beta(4, 2, std::vector<double>{0.5, -1.0, 1.0});
  std::vector<PartialGraph> shown;
  for (int i = 0; i < 10; ++i) shown.push_back(PartialGraph(4, EdgeBits::low_mask(i % 6), EdgeBits{}));
  const auto bands = error_bands(model, shown, {BandStatistic::EdgeDensity, BandStatistic::ScaledCherry}, 5, 3);
  ASSERT_EQ(bands.bands.size(), 2u);
  EXPECT_EQ(bands.failures, 0);
  for (const auto& b : bands.bands) EXPECT_EQ(b.sd, 0.0);
}

TEST(ErrorBands, DeterministicGivenSeed) {
  const auto model = ErgmModel::with_beta(5, 2, std::vector<double>{-1.0, 2.0, 0.5});
  const auto data = simulate(prior_table(model), 5, 20, 5, 8);
  std::vector<PartialGraph> shown;
  for (const auto& r : data.records) shown.push_back(r.shown);
  const std::vector<BandStatistic> stats = {BandStatistic::EdgeDensity, BandStatistic::ScaledTriangle};
  const auto a = error_bands(model, shown, stats, 6, 9, 1);
  const auto b = error_bands(model, shown, stats, 6, 9, 3);
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    EXPECT_EQ(a.bands[i].mean, b.bands[i].mean);
    EXPECT_EQ(a.bands[i].sd, b.bands[i].sd);
    EXPECT_GT(a.bands[i].sd, 0.0);
  }
}
