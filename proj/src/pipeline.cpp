#include "graphprior/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "graphprior/cumulants.hpp"
#include "graphprior/error.hpp"
#include "parallel.hpp"

namespace graphprior {

bool is_cover_story(const std::string& story) {
  return std::any_of(kCoverStories.begin(), kCoverStories.end(), [&](const char* s) { return story == s; });
}

double ResponseRecord::f_add() const {
  const int k = n_obs();
  if (k == 0) return 0.0;
  return static_cast<double>((response.bits() & pg.obscured()).count()) / k;
}

const char* rule_name(ExclusionRule rule) {
  switch (rule) {
    case kTooFast: return "too_fast";
    case kLowInteraction: return "low_interaction";
    case kChangedTooLittle: return "changed_too_little";
    case kNotEnoughPractice: return "not_enough_practice";
  }
  return "unknown";
}

std::vector<std::string> ExclusionReport::rule_names(unsigned mask) {
  std::vector<std::string> out;
  for (auto r : kAllRules)
    if (mask & r) out.emplace_back(rule_name(r));
  return out;
}

unsigned record_rules(const ResponseRecord& r) {
  unsigned mask = 0;
  const int n = r.nodes();
  if (r.elapsed_seconds < 3.0 * r.shown()) mask |= kTooFast;
  const int min_moved = (n + 3) / 4 - 1;
  if (r.nodes_moved < min_moved) mask |= kLowInteraction;
  if (r.n_obs() > 5 && r.f_add() * n < 1.0) mask |= kChangedTooLittle;
  return mask;
}

ExclusionResult apply_exclusions(const std::vector<ResponseRecord>& records) {
  ExclusionResult out;
  auto& rep = out.report;
  rep.total = records.size();
  rep.verdicts.resize(records.size());
  std::map<std::string, int> surviving;
  for (std::size_t i = 0; i < records.size(); ++i) {
    rep.verdicts[i] = record_rules(records[i]);
    if (rep.verdicts[i] == 0) ++surviving[records[i].session_id];
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (surviving[records[i].session_id] < 4) rep.verdicts[i] |= kNotEnoughPractice;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const unsigned v = rep.verdicts[i];
    for (std::size_t k = 0; k < kAllRules.size(); ++k)
      if (v & kAllRules[k]) ++rep.rule_counts[k];
    if (v) {
      ++rep.excluded;
    } else {
      out.valid.push_back(records[i]);
    }
  }
  return out;
}

ResponseDataset aggregate(const std::vector<ResponseRecord>& records, const std::string& story, int n) {
  ResponseDataset data;
  data.n = n;
  for (const auto& r : records) {
    if (r.cover_story != story || r.nodes() != n) continue;
    data.records.push_back(Response{r.pg, r.response, static_cast<int>(r.chain_id), r.round_index});
  }
  return data;
}

double average_loglik(const ErgmModel& model, const ResponseDataset& data) {
  if (data.empty()) throw DataError("average log-likelihood of an empty dataset");
  return loglikelihood(model, data) / static_cast<double>(data.size());
}

std::pair<ResponseDataset, ResponseDataset> split_dataset(const ResponseDataset& data, double train_frac,
                                                          bool by_chain, Rng& rng) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ArgumentError("train fraction must be in (0, 1)");
  ResponseDataset train, test;
  train.n = test.n = data.n;
  if (by_chain) {
    std::vector<int> chains;
    for (const auto& r : data.records) chains.push_back(r.chain);
    std::sort(chains.begin(), chains.end());
    chains.erase(std::unique(chains.begin(), chains.end()), chains.end());
    std::shuffle(chains.begin(), chains.end(), rng);
    const auto cut = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(chains.size())));
    std::vector<int> in_train(chains.begin(), chains.begin() + static_cast<std::ptrdiff_t>(cut));
    std::sort(in_train.begin(), in_train.end());
    for (const auto& r : data.records)
      (std::binary_search(in_train.begin(), in_train.end(), r.chain) ? train : test).records.push_back(r);
  } else {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto cut = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(idx.size())));
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
    std::sort(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) (i < cut ? train : test).records.push_back(data.records[idx[i]]);
  }
  return {std::move(train), std::move(test)};
}

namespace {

bool usable(const FitResult& f) { return f.converged; }

void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
  mean = sd = 0.0;
  if (xs.empty()) {
    mean = sd = std::nan("");
    return;
  }
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
}

}  // namespace

CrossValResult cross_validate(const ResponseDataset& data, const std::vector<int>& orders,
                              const CrossValConfig& cfg) {
  if (data.size() < 10) throw ArgumentError("cross-validation needs at least 10 records");
  if (orders.empty()) throw ArgumentError("no model orders to compare");
  if (cfg.splits < 1) throw ArgumentError("splits must be >= 1");
  const std::size_t k = orders.size();
  std::vector<std::vector<double>> ll(static_cast<std::size_t>(cfg.splits), std::vector<double>(k, std::nan("")));
  std::vector<std::vector<std::string>> msgs(ll.size(), std::vector<std::string>(k));
  detail::parallel_for(cfg.splits, cfg.jobs, [&](int s) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(s)}));
    auto [train, test] = split_dataset(data, cfg.train_frac, cfg.by_chain, rng);
    if (train.empty() || test.empty()) {
      for (std::size_t j = 0; j < k; ++j) msgs[static_cast<std::size_t>(s)][j] = "empty split";
      return;
    }
    for (std::size_t j = 0; j < k; ++j) {
      FitConfig fc = cfg.fit;
      fc.jobs = 1;
      const FitResult fit = fit_newton(train, orders[j], fc);
      if (!usable(fit)) {
        msgs[static_cast<std::size_t>(s)][j] = fit.message.empty() ? "did not converge" : fit.message;
        continue;
      }
      ll[static_cast<std::size_t>(s)][j] = average_loglik(fit.model, test);
    }
  });
  CrossValResult out;
  out.orders = orders;
  out.mean_avgll.resize(k);
  out.sd_avgll.resize(k);
  out.used.assign(k, 0);
  out.failures.assign(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> xs;
    for (std::size_t s = 0; s < ll.size(); ++s) {
      if (std::isnan(ll[s][j])) {
        ++out.failures[j];
        out.warnings.push_back("split " + std::to_string(s) + ", order " + std::to_string(orders[j]) + ": " +
                               msgs[s][j]);
      } else {
        xs.push_back(ll[s][j]);
      }
    }
    out.used[j] = static_cast<int>(xs.size());
    mean_sd(xs, out.mean_avgll[j], out.sd_avgll[j]);
  }
  std::size_t best = k;
  for (std::size_t j = 0; j < k; ++j) {
    if (std::isnan(out.mean_avgll[j])) continue;
    if (best == k || out.mean_avgll[j] > out.mean_avgll[best]) best = j;
  }
  if (best == k) throw ConvergenceError("every cross-validation fit failed");
  out.selected = orders[best];
  return out;
}

GeneralizationMatrix generalization_matrix(const std::vector<ResponseDataset>& per_story,
                                           const std::vector<std::string>& stories, int order,
                                           const GeneralizationConfig& cfg) {
  const std::size_t k = per_story.size();
  if (k == 0 || stories.size() != k) throw ArgumentError("need one dataset per story");
  const int n = per_story.front().n;
  for (const auto& d : per_story) {
    if (d.n != n) throw ArgumentError("story datasets disagree on n");
    if (d.size() < 2) throw ArgumentError("every story needs at least two records");
  }
  if (cfg.reps < 1) throw ArgumentError("reps must be >= 1");
  std::vector<Eigen::MatrixXd> cells(static_cast<std::size_t>(cfg.reps));
  std::vector<char> ok(cells.size(), 0);
  detail::parallel_for(cfg.reps, cfg.jobs, [&](int rep) {
    std::vector<ResponseDataset> trains, tests;
    ResponseDataset pooled;
    pooled.n = n;
    for (std::size_t s = 0; s < k; ++s) {
      Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(rep), s}));
      auto [train, test] = split_dataset(per_story[s], cfg.train_frac, false, rng);
      pooled.records.insert(pooled.records.end(), train.records.begin(), train.records.end());
      trains.push_back(std::move(train));
      tests.push_back(std::move(test));
    }
    FitConfig fc = cfg.fit;
    fc.jobs = 1;
    std::vector<ErgmModel> models;
    for (const auto& t : trains) {
      FitResult f = fit_newton(t, order, fc);
      if (!usable(f)) return;
      models.push_back(std::move(f.model));
    }
    const FitResult pooled_fit = fit_newton(pooled, order, fc);
    if (!usable(pooled_fit)) return;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      const double base = average_loglik(pooled_fit.model, tests[i]);
      for (std::size_t j = 0; j < k; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::exp(average_loglik(models[j], tests[i]) - base);
    }
    cells[static_cast<std::size_t>(rep)] = std::move(m);
    ok[static_cast<std::size_t>(rep)] = 1;
  });
  GeneralizationMatrix gm;
  gm.n = n;
  gm.order = order;
  gm.stories = stories;
  gm.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (ok[r]) {
      gm.values += cells[r];
      ++gm.reps;
    } else {
      ++gm.failed_reps;
    }
  }
  if (gm.reps == 0) throw ConvergenceError("every generalization-matrix rep failed to fit");
  gm.values /= gm.reps;
  return gm;
}

const char* statistic_name(BandStatistic s) {
  switch (s) {
    case BandStatistic::EdgeDensity: return "edge_density";
    case BandStatistic::ScaledCherry: return "scaled_cherry";
    case BandStatistic::ScaledTriangle: return "scaled_triangle";
  }
  return "unknown";
}

double prior_statistic(const PriorTable& prior, BandStatistic s) {
  const int n = prior.nodes();
  if (s == BandStatistic::EdgeDensity) {
    const auto basis = enumerate_basis(1, n);
    return moments_of_prior(prior, basis).values.at(0);
  }
  if (n < 3) throw ArgumentError("cherry and triangle statistics need n >= 3");
  const int order = s == BandStatistic::ScaledCherry ? 2 : 3;
  const std::vector<std::pair<int, int>> edges =
      s == BandStatistic::ScaledCherry ? std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}
                                       : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {0, 2}};
  const Graph target = Graph::from_edges(3, edges);
  const auto basis = enumerate_basis(order, n);
  const auto c = scaled_cumulants(cumulants_from_moments(moments_of_prior(prior, basis)));
  const auto idx = basis.find(target);
  if (!idx) throw ArgumentError("statistic subgraph missing from basis");
  return c.scaled[*idx].value_or(std::nan(""));
}

ErrorBands error_bands(const ErgmModel& fitted, const std::vector<PartialGraph>& shown,
                       const std::vector<BandStatistic>& statistics, int reps, std::uint64_t seed, int jobs) {
  if (reps < 1) throw ArgumentError("reps must be >= 1");
  if (shown.empty()) throw DataError("no partial graphs to resample");
  std::vector<std::vector<double>> values(static_cast<std::size_t>(reps));
  detail::parallel_for(reps, jobs, [&](int rep) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(rep)}));
    ResponseDataset data;
    data.n = fitted.n;
    data.records.reserve(shown.size());
    for (std::size_t i = 0; i < shown.size(); ++i)
      data.records.push_back(Response{shown[i], posterior_sample(fitted, shown[i], rng), 0, static_cast<int>(i)});
    FitConfig fc;
    fc.init_beta = fitted.beta;
    const FitResult refit = fit_newton(data, fitted.order(), fc);
    if (!refit.converged) return;
    const PriorTable table = prior_table(refit.model);
    auto& v = values[static_cast<std::size_t>(rep)];
    for (auto s : statistics) v.push_back(prior_statistic(table, s));
  });
  ErrorBands out;
  for (const auto& v : values) (v.empty() ? out.failures : out.reps) += 1;
  for (std::size_t j = 0; j < statistics.size(); ++j) {
    std::vector<double> xs;
    for (const auto& v : values)
      if (!v.empty()) xs.push_back(v[j]);
    Band b{statistics[j], 0.0, 0.0};
    mean_sd(xs, b.mean, b.sd);
    out.bands.push_back(b);
  }
  return out;
}

}  // namespace graphprior
