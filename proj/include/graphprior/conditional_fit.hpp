#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graphprior {

// One conditional choice situation: the response was drawn from the rows of
// `features` with probability proportional to exp(log_mult + features * beta).
// `count` identical responses share the same alternatives and contribute
// `response_sum` (sum of their feature rows).
struct ChoiceGroup {
  Eigen::MatrixXd features;
  Eigen::VectorXd log_mult;
  double count = 0.0;
  Eigen::VectorXd response_sum;
};

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // empty unless requested
};

// Log-likelihood, gradient and (optionally) Hessian of the grouped
// conditional model. Groups are reduced in fixed chunks and fixed order, so
// the result is bit-identical for any `jobs`.
Evaluation evaluate_choices(std::span<const ChoiceGroup> groups, const Eigen::VectorXd& beta,
                            bool with_hessian, int jobs = 1);

// Expected feature vector under each group's choice distribution (per group).
Eigen::VectorXd expected_features(const ChoiceGroup& group, const Eigen::VectorXd& beta);

struct NewtonConfig {
  double tol = 1e-10;  // on the infinity norm of the gradient
  int max_iter = 200;
  std::optional<Eigen::VectorXd> init;
  double separation_limit = 50.0;
  int max_halvings = 30;
  double ridge = 1e-8;
  int jobs = 1;
};

struct NewtonResult {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  bool ridge_used = false;
  bool separation = false;
  std::string message;
  std::vector<double> loglik_trace;  // after each accepted step, starting at init
};

// Damped Newton ascent: full step, halved while the log-likelihood drops,
// then a ridge on the negative Hessian as a last resort.
NewtonResult newton_maximize(std::span<const ChoiceGroup> groups, Eigen::Index dim,
                             const NewtonConfig& config);

}  // namespace graphprior
