#include "graphprior/ergm.hpp"

#include <cmath>
#include <map>

#include "graphprior/error.hpp"

namespace graphprior {
namespace {

constexpr int kMaxEnumeratedObscured = 24;

ChoiceGroup exact_group(const PartialGraph& pg, const FeatureTable& table) {
  const int k = pg.obscured_count();
  if (k > kMaxEnumeratedObscured) {
    throw CapabilityError("too many obscured relations for exact enumeration (" +
                          std::to_string(k) + "); use the subsampled fit");
  }
  const Eigen::Index rows = Eigen::Index{1} << k;
  const Eigen::Index d = static_cast<Eigen::Index>(table.dimension());
  ChoiceGroup g;
  g.features.resize(rows, d);
  g.log_mult = Eigen::VectorXd::Zero(rows);
  g.response_sum = Eigen::VectorXd::Zero(d);
  Eigen::Index row = 0;
  for_each_completion_bits(pg, [&](EdgeBits bits) {
    auto f = table.row(bits);
    for (Eigen::Index i = 0; i < d; ++i) g.features(row, i) = f[i];
    ++row;
  });
  return g;
}

void add_response(ChoiceGroup& g, const Graph& response, const FeatureTable& table) {
  auto f = table.row(response.bits());
  for (Eigen::Index i = 0; i < g.response_sum.size(); ++i) g.response_sum[i] += f[i];
  g.count += 1.0;
}

void check_model_graph(const ErgmModel& model, const Graph& g) {
  if (g.nodes() != model.n) throw ArgumentError("graph node count does not match the model");
}

FitResult to_fit_result(const ResponseDataset& data, int order, const NewtonResult& nr) {
  FitResult out;
  out.model = ErgmModel::zero(data.n, order);
  out.model.beta = nr.beta;
  out.loglik = nr.loglik;
  out.iterations = nr.iterations;
  out.converged = nr.converged;
  out.gradient_norm = nr.gradient_norm;
  out.ridge_used = nr.ridge_used;
  out.message = nr.message;
  out.loglik_trace = nr.loglik_trace;
  return out;
}

NewtonConfig newton_config(const FitConfig& c) {
  NewtonConfig nc;
  nc.tol = c.tol;
  nc.max_iter = c.max_iter;
  nc.init = c.init_beta;
  nc.separation_limit = c.separation_limit;
  nc.jobs = c.jobs;
  return nc;
}

}  // namespace

void ResponseDataset::validate() const {
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    if (r.shown.nodes() != n || r.response.nodes() != n) {
      throw DataError("record " + std::to_string(t) + " has the wrong node count");
    }
    if (!r.shown.consistent(r.response)) {
      throw DataError("record " + std::to_string(t) + " response contradicts a shown relation");
    }
  }
}

double ResponseDataset::mean_obscured() const {
  if (records.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : records) total += r.shown.obscured_count();
  return total / static_cast<double>(records.size());
}

ErgmModel ErgmModel::zero(int n, int order) {
  ErgmModel m;
  m.n = n;
  m.basis = enumerate_basis(order, n);
  m.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.basis.size()));
  return m;
}

ErgmModel ErgmModel::with_beta(int n, int order, std::span<const double> beta) {
  ErgmModel m = zero(n, order);
  if (static_cast<Eigen::Index>(beta.size()) != m.dim()) {
    throw ArgumentError("parameter count " + std::to_string(beta.size()) +
                        " does not match basis size " + std::to_string(m.dim()));
  }
  for (Eigen::Index i = 0; i < m.dim(); ++i) m.beta[i] = beta[static_cast<std::size_t>(i)];
  return m;
}

double log_weight(const ErgmModel& model, const Graph& g) {
  check_model_graph(model, g);
  auto f = model.features()->row(g.bits());
  double s = 0.0;
  for (Eigen::Index i = 0; i < model.dim(); ++i) s += model.beta[i] * f[i];
  return s;
}

PriorTable prior_table(const ErgmModel& model) {
  if (model.n > kMaxEnumerableNodes) {
    throw CapabilityError("exact prior table needs n <= 8");
  }
  auto index = ClassIndex::get(model.n);
  std::vector<double> lw(index->size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < lw.size(); ++c) {
    lw[c] = log_weight(model, (*index)[c].graph) + std::log(static_cast<double>((*index)[c].orbit_size));
    top = std::max(top, lw[c]);
  }
  std::vector<double> w(lw.size());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::exp(lw[c] - top);
  return PriorTable::from_weights(model.n, std::move(w));
}

Graph posterior_sample(const ErgmModel& model, const PartialGraph& shown, Rng& rng) {
  if (shown.nodes() != model.n) throw ArgumentError("partial graph node count does not match the model");
  if (shown.obscured_count() > kMaxEnumeratedObscured) {
    throw CapabilityError("too many obscured relations for exact posterior sampling");
  }
  auto table = model.features();
  std::vector<double> lw;
  std::vector<EdgeBits> bits;
  lw.reserve(std::size_t{1} << shown.obscured_count());
  bits.reserve(lw.capacity());
  double top = -std::numeric_limits<double>::infinity();
  for_each_completion_bits(shown, [&](EdgeBits b) {
    auto f = table->row(b);
    double s = 0.0;
    for (Eigen::Index i = 0; i < model.dim(); ++i) s += model.beta[i] * f[i];
    lw.push_back(s);
    bits.push_back(b);
    top = std::max(top, s);
  });
  double z = 0.0;
  for (double& v : lw) z += (v = std::exp(v - top));
  double u = uniform01(rng) * z;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    u -= lw[i];
    if (u < 0.0) return Graph(model.n, bits[i]);
  }
  return Graph(model.n, bits.back());
}

Graph posterior_sample_subsampled(const ErgmModel& model, const PartialGraph& shown, int samples,
                                  Rng& rng) {
  if (samples < 1) throw ArgumentError("need at least one proposal sample");
  auto table = model.features();
  const auto slots = shown.obscured_slots();
  std::vector<EdgeBits> proposals(static_cast<std::size_t>(samples));
  std::vector<double> lw(proposals.size());
  double top = -std::numeric_limits<double>::infinity();
  std::bernoulli_distribution coin(0.5);
  for (std::size_t k = 0; k < proposals.size(); ++k) {
    EdgeBits b = shown.present();
    for (int s : slots)
      if (coin(rng)) b.set(s);
    proposals[k] = b;
    auto f = table->row(b);
    double v = 0.0;
    for (Eigen::Index i = 0; i < model.dim(); ++i) v += model.beta[i] * f[i];
    lw[k] = v;
    top = std::max(top, v);
  }
  double z = 0.0;
  for (double& v : lw) z += (v = std::exp(v - top));
  double u = uniform01(rng) * z;
  for (std::size_t k = 0; k < lw.size(); ++k) {
    u -= lw[k];
    if (u < 0.0) return Graph(model.n, proposals[k]);
  }
  return Graph(model.n, proposals.back());
}

ErgmObjective::ErgmObjective(const ResponseDataset& data, const SubgraphBasis& basis)
    : records_(data.size()) {
  data.validate();
  auto table = feature_table(data.n, basis);
  std::map<PartialGraph, std::size_t> slot_of;
  for (const auto& r : data.records) {
    auto [it, inserted] = slot_of.emplace(r.shown, groups_.size());
    if (inserted) groups_.push_back(exact_group(r.shown, *table));
    add_response(groups_[it->second], r.response, *table);
  }
  // Deterministic order independent of record order.
  std::vector<ChoiceGroup> ordered;
  ordered.reserve(groups_.size());
  for (auto& [pg, idx] : slot_of) ordered.push_back(std::move(groups_[idx]));
  groups_ = std::move(ordered);
}

double loglikelihood(const ErgmModel& model, const ResponseDataset& data) {
  if (data.n != model.n) throw ArgumentError("dataset node count does not match the model");
  return ErgmObjective(data, model.basis).evaluate(model.beta, false).loglik;
}

Eigen::VectorXd gradient(const ErgmModel& model, const ResponseDataset& data) {
  if (data.n != model.n) throw ArgumentError("dataset node count does not match the model");
  return ErgmObjective(data, model.basis).evaluate(model.beta, false).gradient;
}

Eigen::MatrixXd hessian(const ErgmModel& model, const ResponseDataset& data) {
  if (data.n != model.n) throw ArgumentError("dataset node count does not match the model");
  return ErgmObjective(data, model.basis).evaluate(model.beta, true).hessian;
}

FitResult fit_newton(const ResponseDataset& data, int order, const FitConfig& config) {
  if (data.empty()) throw DataError("cannot fit an empty dataset");
  const SubgraphBasis basis = enumerate_basis(order, data.n);
  ErgmObjective objective(data, basis);
  auto nr = newton_maximize(objective.groups(), static_cast<Eigen::Index>(basis.size()),
                            newton_config(config));
  return to_fit_result(data, order, nr);
}

FitResult fit_subsampled(const ResponseDataset& data, int order, const SubsampleConfig& sub,
                         const FitConfig& config) {
  if (sub.samples < 2) throw ArgumentError("subsampled fit needs K >= 2 samples per record");
  if (data.empty()) throw DataError("cannot fit an empty dataset");
  data.validate();
  const SubgraphBasis basis = enumerate_basis(order, data.n);
  auto table = feature_table(data.n, basis);
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());

  std::vector<ChoiceGroup> groups;
  groups.reserve(data.size());
  Rng rng(sub.seed);
  std::bernoulli_distribution coin(0.5);
  for (const auto& r : data.records) {
    const int k = r.shown.obscured_count();
    const bool enumerate = sub.stratify && k < 62 && (std::uint64_t{1} << k) <= static_cast<std::uint64_t>(sub.samples);
    ChoiceGroup g;
    if (enumerate) {
      g = exact_group(r.shown, *table);
    } else {
      // Uniform proposal over completions; the constant 2^k / K rescales
      // the estimate onto the scale of the exact denominator.
      const auto slots = r.shown.obscured_slots();
      g.features.resize(sub.samples, d);
      g.log_mult = Eigen::VectorXd::Constant(sub.samples, k * std::log(2.0) - std::log(static_cast<double>(sub.samples)));
      for (int s = 0; s < sub.samples; ++s) {
        EdgeBits b = r.shown.present();
        for (int slot : slots)
          if (coin(rng)) b.set(slot);
        auto f = table->row(b);
        for (Eigen::Index i = 0; i < d; ++i) g.features(s, i) = f[i];
      }
    }
    g.response_sum = Eigen::VectorXd::Zero(d);
    add_response(g, r.response, *table);
    groups.push_back(std::move(g));
  }
  auto nr = newton_maximize(groups, d, newton_config(config));
  return to_fit_result(data, order, nr);
}

}  // namespace graphprior
