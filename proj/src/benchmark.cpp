#include "graphprior/benchmark.hpp"

#include <cmath>
#include <ostream>

#include "graphprior/error.hpp"
#include "parallel.hpp"

namespace graphprior {

ErgmModel default_bench_truth() {
  const double beta[] = {-26.0, 12.75, 12.75};
  return ErgmModel::with_beta(5, 2, beta);
}

std::vector<BenchScenario> default_bench_scenarios() {
  std::vector<BenchScenario> out;
  BenchScenario a{"a", InitPolicy::SpreadDensity, 0, {}};
  for (int len : {4, 16, 64, 256}) a.points.push_back({len, 2048});
  BenchScenario b{"b", InitPolicy::SpreadDensity, 0, {}};
  for (int recs : {128, 512, 2048, 8192, 32768}) b.points.push_back({16, recs});
  BenchScenario c{"c", InitPolicy::SampleFromPrior, 0, {}};
  for (int len : {1, 4, 16, 64, 256}) c.points.push_back({len, 600});
  out.push_back(std::move(a));
  out.push_back(std::move(b));
  out.push_back(std::move(c));
  return out;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  int count = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / count : 0.0; }
  double sd() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - count * m * m) / (count - 1)));
  }
};

}  // namespace

std::vector<BenchRow> run_fit_vs_sample(const BenchConfig& cfg, const std::vector<BenchScenario>& scenarios) {
  const int n = cfg.truth.n;
  if (cfg.reps < 1) throw ArgumentError("reps must be >= 1");
  const PriorTable truth = prior_table(cfg.truth);
  const PosteriorSampler sampler = prior_posterior_sampler(truth);
  std::vector<BenchRow> rows;
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const auto& sc = scenarios[si];
    for (std::size_t pi = 0; pi < sc.points.size(); ++pi) {
      const BenchPoint& pt = sc.points[pi];
      if (pt.chain_length < 1 || pt.records < 1) throw ArgumentError("bench points need positive sizes");
      std::vector<double> fit_kl(static_cast<std::size_t>(cfg.reps));
      std::vector<double> freq_kl(fit_kl.size());
      auto one = [&](int rep) {
        ChainConfig cc;
        cc.n = n;
        cc.n_obs = cfg.n_obs;
        cc.rounds = pt.chain_length;
        cc.chains = (pt.records + pt.chain_length - 1) / pt.chain_length;
        cc.seed = derive_seed(cfg.seed, {si, pi, static_cast<std::uint64_t>(rep)});
        InitialSampler init;
        if (sc.init == InitPolicy::SampleFromPrior) {
          init = [&truth](int, Rng& rng) { return sample_prior(truth, rng); };
        } else {
          init = [n, chains = cc.chains](int c, Rng& rng) {
            return sample_erdos_renyi(n, spread_density(c, chains), rng);
          };
        }
        ResponseDataset data = simulate_chains(sampler, init, cc);
        data.records.resize(static_cast<std::size_t>(pt.records));
        const FitResult fit = fit_newton(data, cfg.fit_order);
        fit_kl[static_cast<std::size_t>(rep)] = kl_divergence(prior_table(fit.model), truth);
        freq_kl[static_cast<std::size_t>(rep)] = kl_divergence(frequency_estimator(data, sc.burn_in), truth);
      };
      detail::parallel_for(cfg.reps, cfg.jobs, one);
      Accumulator fa, qa;
      for (int r = 0; r < cfg.reps; ++r) {
        fa.add(fit_kl[static_cast<std::size_t>(r)]);
        qa.add(freq_kl[static_cast<std::size_t>(r)]);
      }
      rows.push_back({sc.name, pt.chain_length, pt.records, "fit", fa.mean(), fa.sd(), cfg.reps});
      rows.push_back({sc.name, pt.chain_length, pt.records, "frequency", qa.mean(), qa.sd(), cfg.reps});
    }
  }
  return rows;
}

const BenchRow& find_row(const std::vector<BenchRow>& rows, const std::string& scenario,
                         const BenchPoint& point, const std::string& estimator) {
  for (const auto& r : rows)
    if (r.scenario == scenario && r.chain_length == point.chain_length && r.num_records == point.records &&
        r.estimator == estimator)
      return r;
  throw ArgumentError("no benchmark row for " + scenario + "/" + estimator);
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "scenario,chain_length,num_records,estimator,kl_mean,kl_sd,reps\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.chain_length << ',' << r.num_records << ',' << r.estimator << ','
        << r.kl_mean << ',' << r.kl_sd << ',' << r.reps << '\n';
  }
}

}  // namespace graphprior
