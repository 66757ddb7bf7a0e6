#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "graphprior/ergm.hpp"
#include "graphprior/mcmcp.hpp"

namespace graphprior {

// Exchangeable prior over n-node graphs that depends only on the edge count:
// every labeled graph with k edges has probability probs[k] / C(m, k).
// With moment order J the per-graph log weight is sum_j lambda_j (k/m)^j.
struct EdgeOnlyPrior {
  int n = 0;
  int moment_order = 0;
  std::vector<double> probs;  // over edge counts 0..C(n,2)
  Eigen::VectorXd lambdas;    // monomial coefficients, lambdas[j-1] for (k/m)^j
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;

  static EdgeOnlyPrior from_lambdas(int n, std::span<const double> lambdas);
  // Normalises arbitrary non-negative edge-count weights.
  static EdgeOnlyPrior from_count_weights(int n, std::vector<double> weights);

  int slots() const noexcept { return static_cast<int>(probs.size()) - 1; }
  double labeled_prob(int k) const;
  // Edge counts where the per-graph probability is a strict local maximum.
  std::vector<int> local_maxima() const;
};

struct EdgeOnlyFitConfig {
  int moment_order = 6;
  double tol = 1e-10;
  int max_iter = 200;
  std::optional<Eigen::VectorXd> init_lambdas;  // monomial coefficients
  // High-order fits on data covering a narrow density band legitimately
  // reach large coefficients, so the divergence guard is loose.
  double separation_limit = 1e7;
  int jobs = 1;
};

// Maximum-likelihood fit of the conditional model with responses and
// completions collapsed to edge counts. Throws ConvergenceError when the
// moments cannot be matched.
EdgeOnlyPrior fit_edge_only(const ResponseDataset& data, const EdgeOnlyFitConfig& cfg = {});

struct MomentCheck {
  Eigen::VectorXd observed;  // mean over records of (k/m)^j, j = 1..J
  Eigen::VectorXd expected;  // mean over records of E[(k/m)^j | shown]
};
MomentCheck edge_only_moments(const EdgeOnlyPrior& prior, const ResponseDataset& data);

// Conditional log-likelihood of the data under an edge-count prior.
double edge_only_loglik(const EdgeOnlyPrior& prior, const ResponseDataset& data);

// Exact posterior draw: pick the number of added edges, then which
// obscured relations, uniformly.
PosteriorSampler edge_count_posterior_sampler(const EdgeOnlyPrior& prior);
// Independent Bernoulli(rho) relations.
PosteriorSampler bernoulli_posterior_sampler(double rho);

std::vector<double> binomial_pmf(int m, double rho);
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace graphprior
