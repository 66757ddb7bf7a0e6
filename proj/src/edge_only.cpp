#include "graphprior/edge_only.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "graphprior/conditional_fit.hpp"
#include "graphprior/error.hpp"

namespace graphprior {
namespace {

double log_binomial(int m, int k) {
  return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
}

// coeffs(j, i): coefficient of x^i in the shifted Legendre polynomial
// P_j(2x - 1).
Eigen::MatrixXd shifted_legendre(int order) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(order + 1, order + 1);
  c(0, 0) = 1.0;
  if (order >= 1) {
    c(1, 0) = -1.0;
    c(1, 1) = 2.0;
  }
  for (int j = 1; j < order; ++j) {
    // (j+1) P_{j+1} = (2j+1)(2x-1) P_j - j P_{j-1}
    for (int i = 0; i <= j + 1; ++i) {
      double v = 0.0;
      if (i >= 1) v += 2.0 * (2 * j + 1) * c(j, i - 1);
      v -= (2 * j + 1) * c(j, i);
      v -= j * c(j - 1, i);
      c(j + 1, i) = v / (j + 1);
    }
  }
  return c;
}

double log_weight(const Eigen::VectorXd& lambdas, double x) {
  double s = 0.0, p = 1.0;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
    p *= x;
    s += lambdas[j] * p;
  }
  return s;
}

struct CountRecord {
  int present = 0;
  int n_obs = 0;
  int added = 0;
};

CountRecord collapse(const Response& r) {
  const EdgeBits obscured = r.shown.obscured();
  return {r.shown.present().count(), r.shown.obscured_count(), (r.response.bits() & obscured).count()};
}

std::vector<double> choice_probs(const EdgeOnlyPrior& prior, int present, int n_obs) {
  const int m = prior.slots();
  std::vector<double> lw(static_cast<std::size_t>(n_obs) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int a = 0; a <= n_obs; ++a) {
    const int k = present + a;
    const double p = prior.probs[static_cast<std::size_t>(k)];
    lw[static_cast<std::size_t>(a)] =
        p > 0.0 ? log_binomial(n_obs, a) + std::log(p) - log_binomial(m, k) : -std::numeric_limits<double>::infinity();
    top = std::max(top, lw[static_cast<std::size_t>(a)]);
  }
  if (!std::isfinite(top)) throw DataError("every completion has zero prior probability");
  double z = 0.0;
  for (auto& v : lw) z += (v = std::exp(v - top));
  for (auto& v : lw) v /= z;
  return lw;
}

}  // namespace

EdgeOnlyPrior EdgeOnlyPrior::from_lambdas(int n, std::span<const double> lambdas) {
  const int m = relation_count(n);
  EdgeOnlyPrior p;
  p.n = n;
  p.moment_order = static_cast<int>(lambdas.size());
  p.lambdas = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  std::vector<double> lw(static_cast<std::size_t>(m) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= m; ++k) {
    const double x = m == 0 ? 0.0 : static_cast<double>(k) / m;
    lw[static_cast<std::size_t>(k)] = log_binomial(m, k) + log_weight(p.lambdas, x);
    top = std::max(top, lw[static_cast<std::size_t>(k)]);
  }
  double z = 0.0;
  for (auto& v : lw) z += (v = std::exp(v - top));
  for (auto& v : lw) v /= z;
  p.probs = std::move(lw);
  return p;
}

EdgeOnlyPrior EdgeOnlyPrior::from_count_weights(int n, std::vector<double> weights) {
  const int m = relation_count(n);
  if (static_cast<int>(weights.size()) != m + 1) throw ArgumentError("need one weight per edge count");
  double z = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("weights must be finite and non-negative");
    z += w;
  }
  if (!(z > 0.0)) throw ArgumentError("weights sum to zero");
  for (auto& w : weights) w /= z;
  EdgeOnlyPrior p;
  p.n = n;
  p.probs = std::move(weights);
  return p;
}

double EdgeOnlyPrior::labeled_prob(int k) const {
  return probs.at(static_cast<std::size_t>(k)) * std::exp(-log_binomial(slots(), k));
}

std::vector<int> EdgeOnlyPrior::local_maxima() const {
  const int m = slots();
  std::vector<double> lp(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) lp[static_cast<std::size_t>(k)] = labeled_prob(k);
  std::vector<int> out;
  for (int k = 0; k <= m; ++k) {
    const double v = lp[static_cast<std::size_t>(k)];
    const bool left = k == 0 || v > lp[static_cast<std::size_t>(k) - 1];
    const bool right = k == m || v > lp[static_cast<std::size_t>(k) + 1];
    if (left && right) out.push_back(k);
  }
  return out;
}

EdgeOnlyPrior fit_edge_only(const ResponseDataset& data, const EdgeOnlyFitConfig& cfg) {
  const int n = data.n;
  const int m = relation_count(n);
  const int order = cfg.moment_order;
  if (order < 1 || order > m) throw ArgumentError("moment order must be in [1, C(n,2)]");
  if (data.empty()) throw DataError("cannot fit an empty dataset");
  const Eigen::MatrixXd leg = shifted_legendre(order);

  auto features = [&](int k) {
    const double x = static_cast<double>(k) / m;
    Eigen::VectorXd f(order);
    for (int j = 1; j <= order; ++j) {
      double v = 0.0, p = 1.0;
      for (int i = 0; i <= j; ++i) {
        v += leg(j, i) * p;
        p *= x;
      }
      f[j - 1] = v;
    }
    return f;
  };

  std::map<std::pair<int, int>, ChoiceGroup> groups;
  bool informative = false, all_full = true, all_empty = true;
  for (const auto& r : data.records) {
    if (r.shown.nodes() != n) throw DataError("record node count differs from dataset");
    const CountRecord c = collapse(r);
    if (c.n_obs > 0) {
      informative = true;
      all_full = all_full && c.added == c.n_obs;
      all_empty = all_empty && c.added == 0;
    }
    auto [it, fresh] = groups.try_emplace({c.present, c.n_obs});
    ChoiceGroup& g = it->second;
    if (fresh) {
      g.features.resize(c.n_obs + 1, order);
      g.log_mult.resize(c.n_obs + 1);
      for (int a = 0; a <= c.n_obs; ++a) {
        g.features.row(a) = features(c.present + a).transpose();
        g.log_mult[a] = log_binomial(c.n_obs, a);
      }
      g.response_sum = Eigen::VectorXd::Zero(order);
    }
    g.count += 1.0;
    g.response_sum += g.features.row(c.added).transpose();
  }
  // The edge-count direction increases the likelihood without bound.
  if (informative && (all_full || all_empty))
    throw ConvergenceError(std::string("edge-only fit has no finite maximiser: every response ") +
                           (all_full ? "adds all" : "adds none") + " of its obscured relations");
  std::vector<ChoiceGroup> flat;
  flat.reserve(groups.size());
  for (auto& [key, g] : groups) flat.push_back(std::move(g));

  // Monomial -> Legendre parameter maps: monomial = T * legendre.
  Eigen::MatrixXd to_mono(order, order);
  for (int i = 1; i <= order; ++i)
    for (int j = 1; j <= order; ++j) to_mono(i - 1, j - 1) = leg(j, i);

  NewtonConfig nc;
  nc.tol = cfg.tol;
  nc.max_iter = cfg.max_iter;
  nc.separation_limit = cfg.separation_limit;
  nc.jobs = cfg.jobs;
  if (cfg.init_lambdas) {
    if (cfg.init_lambdas->size() != order) throw ArgumentError("initial lambdas have the wrong length");
    nc.init = to_mono.triangularView<Eigen::Upper>().solve(*cfg.init_lambdas);
  }
  const NewtonResult res = newton_maximize(flat, order, nc);
  if (!res.converged) {
    throw ConvergenceError("edge-only fit did not converge: " +
                           (res.message.empty() ? std::string("iteration limit") : res.message));
  }
  const Eigen::VectorXd mono = to_mono * res.beta;
  EdgeOnlyPrior out = EdgeOnlyPrior::from_lambdas(n, std::span<const double>(mono.data(), static_cast<std::size_t>(order)));
  out.loglik = res.loglik;
  out.iterations = res.iterations;
  out.converged = true;
  return out;
}

MomentCheck edge_only_moments(const EdgeOnlyPrior& prior, const ResponseDataset& data) {
  const int m = prior.slots();
  const int order = prior.moment_order;
  MomentCheck mc{Eigen::VectorXd::Zero(order), Eigen::VectorXd::Zero(order)};
  if (data.empty()) return mc;
  for (const auto& r : data.records) {
    const CountRecord c = collapse(r);
    const auto probs = choice_probs(prior, c.present, c.n_obs);
    for (int j = 1; j <= order; ++j) {
      mc.observed[j - 1] += std::pow(static_cast<double>(c.present + c.added) / m, j);
      double e = 0.0;
      for (int a = 0; a <= c.n_obs; ++a)
        e += probs[static_cast<std::size_t>(a)] * std::pow(static_cast<double>(c.present + a) / m, j);
      mc.expected[j - 1] += e;
    }
  }
  mc.observed /= static_cast<double>(data.size());
  mc.expected /= static_cast<double>(data.size());
  return mc;
}

double edge_only_loglik(const EdgeOnlyPrior& prior, const ResponseDataset& data) {
  double ll = 0.0;
  for (const auto& r : data.records) {
    const CountRecord c = collapse(r);
    const auto probs = choice_probs(prior, c.present, c.n_obs);
    // Each specific completion with `added` edges is one of C(n_obs, added).
    ll += std::log(probs[static_cast<std::size_t>(c.added)]) - log_binomial(c.n_obs, c.added);
  }
  return ll;
}

PosteriorSampler edge_count_posterior_sampler(const EdgeOnlyPrior& prior) {
  return [prior](const PartialGraph& shown, Rng& rng) {
    if (shown.nodes() != prior.n) throw ArgumentError("partial graph node count does not match the prior");
    const int present = shown.present().count();
    const auto probs = choice_probs(prior, present, shown.obscured_count());
    std::discrete_distribution<int> pick(probs.begin(), probs.end());
    const int added = pick(rng);
    std::vector<int> slots = shown.obscured_slots();
    std::shuffle(slots.begin(), slots.end(), rng);
    Graph g(shown.nodes(), shown.present());
    for (int i = 0; i < added; ++i) g.set_slot(slots[static_cast<std::size_t>(i)], true);
    return g;
  };
}

PosteriorSampler bernoulli_posterior_sampler(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ArgumentError("rho must be in [0, 1]");
  return [rho](const PartialGraph& shown, Rng& rng) {
    std::bernoulli_distribution coin(rho);
    Graph g(shown.nodes(), shown.present());
    for (int s : shown.obscured_slots()) g.set_slot(s, coin(rng));
    return g;
  };
}

std::vector<double> binomial_pmf(int m, double rho) {
  std::vector<double> out(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    double lp = log_binomial(m, k);
    lp += k == 0 ? 0.0 : k * std::log(rho);
    lp += k == m ? 0.0 : (m - k) * std::log1p(-rho);
    out[static_cast<std::size_t>(k)] = std::exp(lp);
  }
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("distributions have different supports");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace graphprior
