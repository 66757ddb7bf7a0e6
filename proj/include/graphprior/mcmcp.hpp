#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>

#include "graphprior/ergm.hpp"
#include "graphprior/prior_table.hpp"
#include "graphprior/random.hpp"

namespace graphprior {

// Class-level transition matrix of the composed map "obscure n_obs uniformly
// random relations, then sample the posterior". Rows are the current class.
struct TransitionMatrix {
  int n = 0;
  int n_obs = 0;
  std::shared_ptr<const ClassIndex> states;
  Eigen::MatrixXd probs;
  Eigen::VectorXd stationary;  // the prior the matrix was built from
};

// n <= 6. If every completion of a shown graph has zero prior mass the
// agent keeps the current graph.
TransitionMatrix build_transition_matrix(const PriorTable& prior, int n_obs);

// 1 / |log |lambda_2||, lambda_2 the second-largest eigenvalue modulus.
// Returns 0 when lambda_2 vanishes; throws NonErgodicError when
// |lambda_2| >= 1 - 1e-14.
double mixing_time(const TransitionMatrix& m);
double mixing_time(const Eigen::MatrixXd& m);
double second_eigenvalue_modulus(const TransitionMatrix& m);

// Closed form for Erdos-Renyi priors: -1 / log(1 - b).
double er_mixing_time(double obscured_fraction);

// 50% of the mass on one or two edge counts `peak_distance` apart (split
// evenly), the rest uniform over all other labeled graphs. The lower peak
// sits at floor((C(n,2) - distance) / 2).
struct PeakPrior {
  int n = 0;
  int peak_distance = 0;
  int low_peak = 0;
  PriorTable table;
};
PeakPrior make_peak_prior(int n, int peak_distance);

enum class InitPolicy { SpreadDensity, SampleFromPrior, Fixed };

struct ChainInit {
  InitPolicy policy = InitPolicy::SpreadDensity;
  Graph fixed;
};

struct ChainConfig {
  int n = 0;
  int n_obs = 0;
  int rounds = 0;  // responses per chain
  int chains = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
};

using PosteriorSampler = std::function<Graph(const PartialGraph&, Rng&)>;
using InitialSampler = std::function<Graph(int chain, Rng&)>;

// Exact posterior sampler for a class prior (per labeled graph: prob/orbit).
PosteriorSampler prior_posterior_sampler(const PriorTable& prior);
Graph posterior_sample(const PriorTable& prior, const PartialGraph& shown, Rng& rng);
// Uniformly labeled draw from the prior.
Graph sample_prior(const PriorTable& prior, Rng& rng);
Graph sample_erdos_renyi(int n, double rho, Rng& rng);

// Edge probability used by the spread-density policy for chain i of C:
// evenly spaced in [0.05, 0.95].
double spread_density(int chain, int chains);

// Chains of ideal Bayesian agents. Records come out chain-major with
// `round` counting from 1; every chain draws from its own derived stream.
ResponseDataset simulate_chains(const PriorTable& prior, const ChainConfig& cfg, const ChainInit& init);
ResponseDataset simulate_chains(const PosteriorSampler& sampler, const InitialSampler& initial,
                                const ChainConfig& cfg);

// Empirical class frequencies of responses with round > burn_in.
PriorTable frequency_estimator(const ResponseDataset& data, int burn_in);

// sum p log(p / q) in nats; +infinity when q misses support of p.
double kl_divergence(const PriorTable& p, const PriorTable& q);
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace graphprior
