#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphprior/canonical.hpp"
#include "graphprior/conditional_fit.hpp"
#include "graphprior/density.hpp"
#include "graphprior/graph.hpp"
#include "graphprior/prior_table.hpp"
#include "graphprior/random.hpp"

namespace graphprior {

// One round: the partial graph shown and the completed graph given back.
struct Response {
  PartialGraph shown;
  Graph response;
  int chain = 0;
  int round = 0;
};

struct ResponseDataset {
  int n = 0;
  std::vector<Response> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  // Throws DataError if a response contradicts its shown graph or node
  // counts differ.
  void validate() const;
  double mean_obscured() const;
};

// Subgraph-density exponential family over n-node graphs, relative to the
// uniform measure on labeled graphs:
//   pi(G) proportional to exp(sum_g beta_g * mu_g(G)).
struct ErgmModel {
  int n = 0;
  SubgraphBasis basis;
  Eigen::VectorXd beta;

  // Basis of all subgraphs with at most `order` edges that fit in n nodes.
  static ErgmModel zero(int n, int order);
  static ErgmModel with_beta(int n, int order, std::span<const double> beta);

  int order() const noexcept { return basis.order; }
  Eigen::Index dim() const noexcept { return beta.size(); }
  std::shared_ptr<const FeatureTable> features() const { return feature_table(n, basis); }
};

struct FitConfig {
  double tol = 1e-10;
  int max_iter = 200;
  std::optional<Eigen::VectorXd> init_beta;
  double separation_limit = 50.0;
  int jobs = 1;
};

struct FitResult {
  ErgmModel model;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  bool ridge_used = false;
  std::string message;
  std::vector<double> loglik_trace;
};

double log_weight(const ErgmModel& model, const Graph& g);

// Exact class probabilities; n <= 8.
PriorTable prior_table(const ErgmModel& model);

// Exact draw from the model restricted to completions of `shown`. Needs
// n_obs <= 24.
Graph posterior_sample(const ErgmModel& model, const PartialGraph& shown, Rng& rng);

// Sampling-importance-resampling from `samples` uniform completions; for
// partial graphs with too many obscured relations to enumerate.
Graph posterior_sample_subsampled(const ErgmModel& model, const PartialGraph& shown,
                                  int samples, Rng& rng);

// Conditional log-likelihood objective for one dataset and basis. Records
// sharing a partial graph are grouped, so repeated evaluations are cheap.
class ErgmObjective {
 public:
  ErgmObjective(const ResponseDataset& data, const SubgraphBasis& basis);

  Evaluation evaluate(const Eigen::VectorXd& beta, bool with_hessian, int jobs = 1) const {
    return evaluate_choices(groups_, beta, with_hessian, jobs);
  }
  std::span<const ChoiceGroup> groups() const noexcept { return groups_; }
  std::size_t records() const noexcept { return records_; }

 private:
  std::vector<ChoiceGroup> groups_;
  std::size_t records_ = 0;
};

// Sum over records of log P(response | shown) under the model. The uniform
// base measure cancels between numerator and denominator.
double loglikelihood(const ErgmModel& model, const ResponseDataset& data);
Eigen::VectorXd gradient(const ErgmModel& model, const ResponseDataset& data);
Eigen::MatrixXd hessian(const ErgmModel& model, const ResponseDataset& data);

FitResult fit_newton(const ResponseDataset& data, int order, const FitConfig& config = {});

struct SubsampleConfig {
  int samples = 1024;       // K per record
  bool stratify = true;     // enumerate exactly when 2^n_obs <= K
  std::uint64_t seed = 1;
};

// Newton fit where each record's completion sums are replaced by a
// self-normalised importance-sampling estimate over K uniform completions,
// drawn once before the first iteration.
FitResult fit_subsampled(const ResponseDataset& data, int order, const SubsampleConfig& sub,
                         const FitConfig& config = {});

}  // namespace graphprior
