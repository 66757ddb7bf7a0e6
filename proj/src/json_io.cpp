#include "graphprior/json_io.hpp"

#include <istream>
#include <ostream>

#include "graphprior/error.hpp"

namespace graphprior {
namespace {

Json pairs(int n, EdgeBits bits) {
  Json out = Json::array();
  for (int s = 0; s < relation_count(n); ++s)
    if (bits.test(s)) {
      const auto [i, j] = relation_pair(s, n);
      out.push_back({i, j});
    }
  return out;
}

EdgeBits pairs_from_json(const Json& j, int n, const char* field) {
  if (!j.is_array()) throw DataError(std::string("'") + field + "' must be an array of pairs");
  EdgeBits bits;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      throw DataError(std::string("'") + field + "' entries must be [i, j] integer pairs");
    int a = p[0].get<int>(), b = p[1].get<int>();
    if (a == b || a < 0 || b < 0 || a >= n || b >= n)
      throw DataError(std::string("invalid pair in '") + field + "'");
    if (a > b) std::swap(a, b);
    bits.set(relation_index(a, b, n));
  }
  return bits;
}

int nodes_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer()) throw DataError("graph needs integer 'n'");
  const int n = j["n"].get<int>();
  if (n < 1 || n > kMaxNodes) throw DataError("graph node count out of range");
  return n;
}

template <class T>
T field(const Json& j, const char* name) {
  if (!j.contains(name)) throw DataError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("bad type for field '") + name + "'");
  }
}

Json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("line " + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const Graph& g) { return Json{{"n", g.nodes()}, {"edges", pairs(g.nodes(), g.bits())}}; }

Graph graph_from_json(const Json& j) {
  const int n = nodes_from_json(j);
  return Graph(n, j.contains("edges") ? pairs_from_json(j["edges"], n, "edges") : EdgeBits{});
}

Json to_json(const PartialGraph& pg) {
  const int n = pg.nodes();
  return Json{{"n", n},
              {"edges", pairs(n, pg.present())},
              {"absent", pairs(n, pg.absent())},
              {"obscured", pairs(n, pg.obscured())}};
}

PartialGraph partial_graph_from_json(const Json& j) {
  const int n = nodes_from_json(j);
  const EdgeBits present = j.contains("edges") ? pairs_from_json(j["edges"], n, "edges") : EdgeBits{};
  const EdgeBits absent = j.contains("absent") ? pairs_from_json(j["absent"], n, "absent") : EdgeBits{};
  const EdgeBits obscured = j.contains("obscured") ? pairs_from_json(j["obscured"], n, "obscured") : EdgeBits{};
  if (!(present & absent).none() || !(present & obscured).none() || !(absent & obscured).none())
    throw DataError("a pair appears in more than one of edges/absent/obscured");
  if ((present | absent | obscured) != EdgeBits::low_mask(relation_count(n)))
    throw DataError("every pair must be listed as an edge, absent or obscured");
  return PartialGraph(n, present, obscured);
}

Json to_json(const FitResult& fit) {
  const auto& m = fit.model;
  Json basis = Json::array();
  for (std::size_t i = 0; i < m.basis.size(); ++i) {
    Json g = to_json(m.basis.graph(i));
    g["name"] = m.basis.name(i);
    basis.push_back(std::move(g));
  }
  return Json{{"n", m.n},
              {"r", m.order()},
              {"basis", std::move(basis)},
              {"beta", std::vector<double>(m.beta.data(), m.beta.data() + m.beta.size())},
              {"loglik", fit.loglik},
              {"iterations", fit.iterations},
              {"converged", fit.converged},
              {"gradient_norm", fit.gradient_norm},
              {"message", fit.message}};
}

ErgmModel model_from_json(const Json& j) {
  const int n = field<int>(j, "n");
  const int r = field<int>(j, "r");
  const auto beta = field<std::vector<double>>(j, "beta");
  ErgmModel model = ErgmModel::zero(n, r);
  if (static_cast<Eigen::Index>(beta.size()) != model.dim())
    throw DataError("beta length does not match the basis for (n, r)");
  if (j.contains("basis")) {
    const auto& b = j["basis"];
    if (!b.is_array() || b.size() != beta.size()) throw DataError("basis length does not match beta");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto idx = model.basis.find(graph_from_json(b[i]));
      if (!idx || *idx != i) throw DataError("basis order differs from the canonical order");
    }
  }
  return ErgmModel::with_beta(n, r, beta);
}

Json to_json(const ResponseRecord& r) {
  return Json{{"session_id", r.session_id},
              {"chain_id", r.chain_id},
              {"cover_story", r.cover_story},
              {"round_index", r.round_index},
              {"pg", to_json(r.pg)},
              {"response", to_json(r.response)},
              {"elapsed_seconds", r.elapsed_seconds},
              {"nodes_moved", r.nodes_moved},
              {"n_obs", r.n_obs()},
              {"f_add", r.f_add()},
              {"valid_rounds_in_session", r.valid_rounds_in_session},
              {"large_n", r.nodes() >= 10}};
}

ResponseRecord record_from_json(const Json& j) {
  ResponseRecord r;
  r.session_id = field<std::string>(j, "session_id");
  r.chain_id = field<std::int64_t>(j, "chain_id");
  r.cover_story = field<std::string>(j, "cover_story");
  r.round_index = field<int>(j, "round_index");
  r.pg = partial_graph_from_json(field<Json>(j, "pg"));
  r.response = graph_from_json(field<Json>(j, "response"));
  r.elapsed_seconds = field<double>(j, "elapsed_seconds");
  r.nodes_moved = field<int>(j, "nodes_moved");
  if (j.contains("valid_rounds_in_session")) r.valid_rounds_in_session = field<int>(j, "valid_rounds_in_session");
  if (r.response.nodes() != r.pg.nodes()) throw DataError("response and partial graph node counts differ");
  return r;
}

Json to_json(const Response& r) {
  return Json{{"chain_id", r.chain}, {"round_index", r.round}, {"pg", to_json(r.shown)}, {"response", to_json(r.response)}};
}

Response response_from_json(const Json& j) {
  Response r;
  r.shown = partial_graph_from_json(field<Json>(j, "pg"));
  r.response = graph_from_json(field<Json>(j, "response"));
  r.chain = j.contains("chain_id") ? static_cast<int>(field<std::int64_t>(j, "chain_id")) : 0;
  r.round = j.contains("round_index") ? field<int>(j, "round_index") : 0;
  if (r.response.nodes() != r.shown.nodes()) throw DataError("response and partial graph node counts differ");
  return r;
}

Json to_json(const ExclusionReport& report) {
  Json rules = Json::object();
  for (std::size_t k = 0; k < kAllRules.size(); ++k) {
    const double frac = report.total ? static_cast<double>(report.rule_counts[k]) / report.total : 0.0;
    rules[rule_name(kAllRules[k])] = Json{{"count", report.rule_counts[k]}, {"percent", 100.0 * frac}};
  }
  Json verdicts = Json::array();
  for (unsigned v : report.verdicts) verdicts.push_back(ExclusionReport::rule_names(v));
  return Json{{"total", report.total},
              {"excluded", report.excluded},
              {"kept", report.total - report.excluded},
              {"rules", std::move(rules)},
              {"verdicts", std::move(verdicts)}};
}

Json to_json(const EdgeOnlyPrior& p) {
  return Json{{"n", p.n},
              {"moment_order", p.moment_order},
              {"probs", p.probs},
              {"lambdas", std::vector<double>(p.lambdas.data(), p.lambdas.data() + p.lambdas.size())},
              {"loglik", p.loglik},
              {"iterations", p.iterations},
              {"converged", p.converged},
              {"local_maxima", p.local_maxima()}};
}

Json to_json(const GeneralizationMatrix& gm) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < gm.values.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(gm.values.cols()));
    for (Eigen::Index j = 0; j < gm.values.cols(); ++j) row[static_cast<std::size_t>(j)] = gm.values(i, j);
    rows.push_back(row);
  }
  return Json{{"n", gm.n},       {"r", gm.order},     {"stories", gm.stories},
              {"values", rows},  {"reps", gm.reps},   {"failed_reps", gm.failed_reps}};
}

Json to_json(const CrossValResult& cv) {
  return Json{{"orders", cv.orders},     {"mean_avgll", cv.mean_avgll}, {"sd_avgll", cv.sd_avgll},
              {"used", cv.used},         {"failures", cv.failures},     {"selected", cv.selected},
              {"warnings", cv.warnings}};
}

std::vector<ResponseRecord> read_records_jsonl(std::istream& in) {
  std::vector<ResponseRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(parse_line(line, lineno)));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_records_jsonl(std::ostream& out, const std::vector<ResponseRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

ResponseDataset read_dataset_jsonl(std::istream& in, int n, const std::string& story) {
  ResponseDataset data;
  data.n = n;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = parse_line(line, lineno);
    if (!story.empty() && (!j.contains("cover_story") || j["cover_story"] != story)) continue;
    Response r;
    try {
      r = response_from_json(j);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (data.n == 0) data.n = r.shown.nodes();
    if (r.shown.nodes() != data.n) continue;
    data.records.push_back(std::move(r));
  }
  return data;
}

void write_dataset_jsonl(std::ostream& out, const ResponseDataset& data) {
  for (const auto& r : data.records) out << to_json(r).dump() << '\n';
}

}  // namespace graphprior
