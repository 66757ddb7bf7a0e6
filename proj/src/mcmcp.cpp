#include "graphprior/mcmcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "graphprior/error.hpp"
#include "parallel.hpp"

namespace graphprior {
namespace {

double binomial(int m, int k) {
  if (k < 0 || k > m) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
  return std::round(r);
}

std::uint64_t next_combination(std::uint64_t x) {
  const std::uint64_t c = x & (~x + 1);
  const std::uint64_t r = x + c;
  return (((r ^ x) >> 2) / c) | r;
}

EdgeBits random_mask(int m, int k, Rng& rng) {
  std::vector<int> slots(m);
  std::iota(slots.begin(), slots.end(), 0);
  EdgeBits mask;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, m - 1);
    std::swap(slots[i], slots[pick(rng)]);
    mask.set(slots[i]);
  }
  return mask;
}

}  // namespace

TransitionMatrix build_transition_matrix(const PriorTable& prior, int n_obs) {
  const int n = prior.nodes();
  if (n > 6) throw CapabilityError("transition matrices are built for n <= 6");
  const int m = relation_count(n);
  if (n_obs < 0 || n_obs > m) throw ArgumentError("n_obs must be in [0, C(n,2)]");
  auto index = prior.class_index();
  const std::size_t states = index->size();
  const auto per_class = prior.labeled_probs();
  std::vector<double> labeled(std::size_t{1} << m);
  std::vector<std::uint16_t> cls(labeled.size());
  for (std::uint64_t b = 0; b < labeled.size(); ++b) {
    cls[b] = static_cast<std::uint16_t>(index->index_of_bits(b));
    labeled[b] = per_class[cls[b]];
  }

  TransitionMatrix tm;
  tm.n = n;
  tm.n_obs = n_obs;
  tm.states = index;
  tm.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  tm.stationary = Eigen::Map<const Eigen::VectorXd>(prior.probs().data(), static_cast<Eigen::Index>(states));

  const double mask_weight = 1.0 / binomial(m, n_obs);
  const std::uint64_t full = (m == 64) ? ~0ULL : ((std::uint64_t{1} << m) - 1);
  std::vector<double> row(states);
  for (std::size_t c = 0; c < states; ++c) {
    std::fill(row.begin(), row.end(), 0.0);
    const std::uint64_t g = (*index)[c].graph.bits().low64();
    std::uint64_t mask = n_obs == 0 ? 0 : (std::uint64_t{1} << n_obs) - 1;
    while (true) {
      const std::uint64_t base = g & ~mask;
      double z = 0.0;
      std::uint64_t sub = 0;
      do {
        z += labeled[base | sub];
        sub = (sub - mask) & mask;
      } while (sub);
      if (z > 0.0) {
        const double scale = mask_weight / z;
        sub = 0;
        do {
          const std::uint64_t h = base | sub;
          row[cls[h]] += labeled[h] * scale;
          sub = (sub - mask) & mask;
        } while (sub);
      } else {
        row[c] += mask_weight;
      }
      if (n_obs == 0 || n_obs == m) break;
      mask = next_combination(mask);
      if (mask > full) break;
    }
    for (std::size_t d = 0; d < states; ++d) tm.probs(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) = row[d];
  }
  return tm;
}

double second_eigenvalue_modulus(const TransitionMatrix& tm) {
  const Eigen::Index k = tm.probs.rows();
  if (k <= 1) return 0.0;
  std::vector<double> moduli;
  const bool positive = tm.stationary.size() == k && (tm.stationary.array() > 0.0).all();
  bool reversible = false;
  if (positive) {
    const Eigen::MatrixXd flow = tm.stationary.asDiagonal() * tm.probs;
    reversible = (flow - flow.transpose()).cwiseAbs().maxCoeff() < 1e-12;
  }
  if (reversible) {
    const Eigen::VectorXd root = tm.stationary.cwiseSqrt();
    const Eigen::VectorXd inv = root.cwiseInverse();
    Eigen::MatrixXd sym = root.asDiagonal() * tm.probs * inv.asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < k; ++i) moduli.push_back(std::abs(es.eigenvalues()[i]));
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(tm.probs, false);
    for (Eigen::Index i = 0; i < k; ++i) moduli.push_back(std::abs(es.eigenvalues()[i]));
  }
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return moduli[1];
}

double mixing_time(const TransitionMatrix& tm) {
  const double lambda2 = second_eigenvalue_modulus(tm);
  if (lambda2 >= 1.0 - 1e-14) {
    throw NonErgodicError("transition matrix is not ergodic (|lambda_2| = 1)");
  }
  if (lambda2 < 1e-12) return 0.0;
  return 1.0 / std::abs(std::log(lambda2));
}

double mixing_time(const Eigen::MatrixXd& m) {
  TransitionMatrix tm;
  tm.probs = m;
  return mixing_time(tm);
}

double er_mixing_time(double b) {
  if (!(b > 0.0) || b > 1.0) throw ArgumentError("obscured fraction must be in (0, 1]");
  if (b == 1.0) return 0.0;
  return -1.0 / std::log(1.0 - b);
}

PeakPrior make_peak_prior(int n, int distance) {
  const int m = relation_count(n);
  if (distance < 0 || distance > m) {
    throw ArgumentError("peak distance must be in [0, C(n,2)]");
  }
  PeakPrior pp;
  pp.n = n;
  pp.peak_distance = distance;
  pp.low_peak = (m - distance) / 2;
  const int high = pp.low_peak + distance;
  double peak_graphs = binomial(m, pp.low_peak) + (distance > 0 ? binomial(m, high) : 0.0);
  const double rest = std::ldexp(1.0, m) - peak_graphs;
  if (rest <= 0.0) throw ArgumentError("peaks cover every graph; no room for the remainder");
  auto index = ClassIndex::get(n);
  std::vector<double> w(index->size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    const int e = (*index)[c].graph.edge_count();
    if (distance == 0 && e == pp.low_peak) {
      w[c] = 0.5 / binomial(m, e);
    } else if (distance > 0 && (e == pp.low_peak || e == high)) {
      w[c] = 0.25 / binomial(m, e);
    } else {
      w[c] = 0.5 / rest;
    }
  }
  pp.table = PriorTable::from_labeled_weights(n, w);
  return pp;
}

PosteriorSampler prior_posterior_sampler(const PriorTable& prior) {
  auto index = prior.class_index();
  auto labeled = std::make_shared<const std::vector<double>>(prior.labeled_probs());
  const int n = prior.nodes();
  return [index, labeled, n](const PartialGraph& shown, Rng& rng) {
    if (shown.nodes() != n) throw ArgumentError("partial graph node count does not match the prior");
    if (shown.obscured_count() > 24) throw CapabilityError("too many obscured relations for exact sampling");
    std::vector<double> w;
    std::vector<EdgeBits> bits;
    w.reserve(std::size_t{1} << shown.obscured_count());
    bits.reserve(w.capacity());
    double z = 0.0;
    for_each_completion_bits(shown, [&](EdgeBits b) {
      const double p = (*labeled)[index->index_of(Graph(n, b))];
      w.push_back(p);
      bits.push_back(b);
      z += p;
    });
    if (!(z > 0.0)) throw DataError("shown graph has zero prior probability under every completion");
    double u = uniform01(rng) * z;
    for (std::size_t i = 0; i < w.size(); ++i) {
      u -= w[i];
      if (u < 0.0 && w[i] > 0.0) return Graph(n, bits[i]);
    }
    for (std::size_t i = w.size(); i-- > 0;)
      if (w[i] > 0.0) return Graph(n, bits[i]);
    return Graph(n, bits.back());
  };
}

Graph posterior_sample(const PriorTable& prior, const PartialGraph& shown, Rng& rng) {
  return prior_posterior_sampler(prior)(shown, rng);
}

Graph sample_prior(const PriorTable& prior, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(prior.probs().begin(), prior.probs().end());
  const Graph& rep = prior.classes()[pick(rng)].graph;
  std::vector<int> perm(static_cast<std::size_t>(rep.nodes()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return rep.relabeled(perm);
}

Graph sample_erdos_renyi(int n, double rho, Rng& rng) {
  Graph g(n);
  std::bernoulli_distribution coin(rho);
  for (int s = 0; s < g.slots(); ++s) g.set_slot(s, coin(rng));
  return g;
}

double spread_density(int chain, int chains) {
  if (chains <= 1) return 0.5;
  return 0.05 + 0.9 * static_cast<double>(chain) / static_cast<double>(chains - 1);
}

ResponseDataset simulate_chains(const PosteriorSampler& sampler, const InitialSampler& initial,
                                const ChainConfig& cfg) {
  const int m = relation_count(cfg.n);
  if (cfg.n_obs < 0 || cfg.n_obs > m) throw ArgumentError("n_obs must be in [0, C(n,2)]");
  if (cfg.rounds < 0 || cfg.chains < 0) throw ArgumentError("rounds and chains must be >= 0");
  std::vector<std::vector<Response>> per_chain(static_cast<std::size_t>(cfg.chains));
  auto run = [&](int c) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(c)}));
    Graph current = initial(c, rng);
    auto& out = per_chain[static_cast<std::size_t>(c)];
    out.reserve(static_cast<std::size_t>(cfg.rounds));
    for (int t = 1; t <= cfg.rounds; ++t) {
      const PartialGraph shown = PartialGraph::obscure(current, random_mask(m, cfg.n_obs, rng));
      current = sampler(shown, rng);
      out.push_back(Response{shown, current, c, t});
    }
  };
  detail::parallel_for(cfg.chains, cfg.jobs, run);
  ResponseDataset data;
  data.n = cfg.n;
  data.records.reserve(static_cast<std::size_t>(cfg.chains) * static_cast<std::size_t>(cfg.rounds));
  for (auto& chain : per_chain)
    for (auto& r : chain) data.records.push_back(std::move(r));
  return data;
}

ResponseDataset simulate_chains(const PriorTable& prior, const ChainConfig& cfg, const ChainInit& init) {
  if (prior.nodes() != cfg.n) throw ArgumentError("prior and chain config disagree on n");
  InitialSampler initial;
  switch (init.policy) {
    case InitPolicy::SpreadDensity:
      initial = [n = cfg.n, chains = cfg.chains](int c, Rng& rng) {
        return sample_erdos_renyi(n, spread_density(c, chains), rng);
      };
      break;
    case InitPolicy::SampleFromPrior:
      initial = [&prior](int, Rng& rng) { return sample_prior(prior, rng); };
      break;
    case InitPolicy::Fixed:
      if (init.fixed.nodes() != cfg.n) throw ArgumentError("fixed initial graph has the wrong node count");
      initial = [g = init.fixed](int, Rng&) { return g; };
      break;
  }
  return simulate_chains(prior_posterior_sampler(prior), initial, cfg);
}

PriorTable frequency_estimator(const ResponseDataset& data, int burn_in) {
  auto index = ClassIndex::get(data.n);
  std::vector<double> counts(index->size(), 0.0);
  double total = 0.0;
  for (const auto& r : data.records) {
    if (r.round <= burn_in) continue;
    counts[index->index_of(r.response)] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) throw DataError("no responses remain after burn-in");
  return PriorTable::from_weights(data.n, std::move(counts));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("distributions have different supports");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double kl_divergence(const PriorTable& p, const PriorTable& q) {
  if (p.nodes() != q.nodes()) throw ArgumentError("priors over different node counts");
  return kl_divergence(p.probs(), q.probs());
}

}  // namespace graphprior
