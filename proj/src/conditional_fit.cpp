#include "graphprior/conditional_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "graphprior/error.hpp"

namespace graphprior {
namespace {

constexpr std::size_t kChunk = 128;

void accumulate_group(const ChoiceGroup& g, const Eigen::VectorXd& beta, bool with_hessian,
                      Evaluation& out) {
  Eigen::VectorXd s = g.features * beta + g.log_mult;
  const double top = s.maxCoeff();
  Eigen::VectorXd p = (s.array() - top).exp().matrix();
  const double z = p.sum();
  p /= z;
  const double lse = top + std::log(z);
  const Eigen::VectorXd mean = g.features.transpose() * p;
  out.loglik += beta.dot(g.response_sum) - g.count * lse;
  out.gradient += g.response_sum - g.count * mean;
  if (with_hessian) {
    const Eigen::MatrixXd weighted = g.features.array().colwise() * p.array();
    Eigen::MatrixXd second = g.features.transpose() * weighted;
    second.noalias() -= mean * mean.transpose();
    out.hessian -= g.count * second;
  }
}

Evaluation zero_eval(Eigen::Index dim, bool with_hessian) {
  Evaluation e;
  e.gradient = Eigen::VectorXd::Zero(dim);
  if (with_hessian) e.hessian = Eigen::MatrixXd::Zero(dim, dim);
  return e;
}

}  // namespace

Evaluation evaluate_choices(std::span<const ChoiceGroup> groups, const Eigen::VectorXd& beta,
                            bool with_hessian, int jobs) {
  const Eigen::Index dim = beta.size();
  const std::size_t chunks = (groups.size() + kChunk - 1) / kChunk;
  std::vector<Evaluation> partial(chunks);
  auto work = [&](std::size_t c) {
    Evaluation e = zero_eval(dim, with_hessian);
    const std::size_t end = std::min(groups.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) accumulate_group(groups[i], beta, with_hessian, e);
    partial[c] = std::move(e);
  };
  if (jobs <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), chunks);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) work(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  Evaluation total = zero_eval(dim, with_hessian);
  for (auto& e : partial) {
    total.loglik += e.loglik;
    total.gradient += e.gradient;
    if (with_hessian) total.hessian += e.hessian;
  }
  if (with_hessian) total.hessian = 0.5 * (total.hessian + total.hessian.transpose()).eval();
  return total;
}

Eigen::VectorXd expected_features(const ChoiceGroup& g, const Eigen::VectorXd& beta) {
  Eigen::VectorXd s = g.features * beta + g.log_mult;
  const double top = s.maxCoeff();
  Eigen::VectorXd p = (s.array() - top).exp().matrix();
  p /= p.sum();
  return g.features.transpose() * p;
}

NewtonResult newton_maximize(std::span<const ChoiceGroup> groups, Eigen::Index dim,
                             const NewtonConfig& config) {
  NewtonResult r;
  r.beta = config.init ? *config.init : Eigen::VectorXd::Zero(dim);
  if (r.beta.size() != dim) throw ArgumentError("initial parameter vector has wrong size");
  if (groups.empty()) throw DataError("cannot fit an empty dataset");

  Evaluation cur = evaluate_choices(groups, r.beta, true, config.jobs);
  r.loglik_trace.push_back(cur.loglik);
  double scale = 0.0;
  for (const auto& g : groups) scale += g.count;
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(cur.loglik) + scale);

  for (r.iterations = 0; r.iterations < config.max_iter; ++r.iterations) {
    r.gradient_norm = cur.gradient.lpNorm<Eigen::Infinity>();
    if (r.gradient_norm <= config.tol) {
      r.converged = true;
      break;
    }
    if (r.beta.lpNorm<Eigen::Infinity>() > config.separation_limit) {
      r.separation = true;
      r.message = "separation detected: parameters diverging";
      break;
    }

    Eigen::MatrixXd neg_h = -cur.hessian;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        neg_h += config.ridge * std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff()) *
                 Eigen::MatrixXd::Identity(dim, dim);
        r.ridge_used = true;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
      Eigen::VectorXd step = ldlt.solve(cur.gradient);
      if (ldlt.info() != Eigen::Success || !step.allFinite() ||
          step.dot(cur.gradient) <= 0.0) {
        if (attempt == 0) continue;
        step = cur.gradient;  // steepest ascent fallback
      }
      double t = 1.0;
      for (int h = 0; h <= config.max_halvings; ++h, t *= 0.5) {
        Eigen::VectorXd trial = r.beta + t * step;
        Evaluation next = evaluate_choices(groups, trial, true, config.jobs);
        const bool better = next.loglik > cur.loglik;
        const bool flat = std::abs(next.loglik - cur.loglik) <= noise &&
                          next.gradient.lpNorm<Eigen::Infinity>() <
                              cur.gradient.lpNorm<Eigen::Infinity>();
        if (std::isfinite(next.loglik) && (better || flat)) {
          r.beta = std::move(trial);
          cur = std::move(next);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      r.message = "stalled: no ascent step found";
      break;
    }
    r.loglik_trace.push_back(cur.loglik);
  }
  r.loglik = cur.loglik;
  r.gradient_norm = cur.gradient.lpNorm<Eigen::Infinity>();
  if (!r.converged && r.gradient_norm <= config.tol) r.converged = true;
  if (!r.converged && r.message.empty()) r.message = "iteration limit reached";
  return r;
}

}  // namespace graphprior
