#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "graphprior/edge_only.hpp"
#include "graphprior/ergm.hpp"
#include "graphprior/pipeline.hpp"

namespace graphprior {

using Json = nlohmann::json;

// {"n": int, "edges": [[i, j], ...]} with i < j, in slot order.
Json to_json(const Graph& g);
Graph graph_from_json(const Json& j);

// Adds "absent" and "obscured" pair lists; every pair must appear in exactly
// one of edges / absent / obscured.
Json to_json(const PartialGraph& pg);
PartialGraph partial_graph_from_json(const Json& j);

// {"n", "r", "basis": [graphs], "beta", "loglik", "iterations", "converged", ...}
Json to_json(const FitResult& fit);
ErgmModel model_from_json(const Json& j);

Json to_json(const ResponseRecord& r);
ResponseRecord record_from_json(const Json& j);

// Minimal dataset line: {"chain_id", "round_index", "pg", "response"}.
// ResponseRecord lines carry the same keys and parse here too.
Json to_json(const Response& r);
Response response_from_json(const Json& j);

Json to_json(const ExclusionReport& report);
Json to_json(const EdgeOnlyPrior& prior);
Json to_json(const GeneralizationMatrix& gm);
Json to_json(const CrossValResult& cv);

std::vector<ResponseRecord> read_records_jsonl(std::istream& in);
void write_records_jsonl(std::ostream& out, const std::vector<ResponseRecord>& records);

// Reads dataset lines; when `story` is non-empty only lines whose
// cover_story matches are kept. n is taken from the first line when 0.
ResponseDataset read_dataset_jsonl(std::istream& in, int n = 0, const std::string& story = "");
void write_dataset_jsonl(std::ostream& out, const ResponseDataset& data);

}  // namespace graphprior
