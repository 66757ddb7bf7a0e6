#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graphprior/json_io.hpp"
#include "graphprior/pipeline.hpp"

namespace graphprior {

inline constexpr int kRoundsPerSession = 16;
inline constexpr int kChainCapacity = 12;
inline constexpr int kSequenceCount = 6;

struct RoundSpec {
  int n = 0;
  int shown = 0;
};

// The six (n, shown) orderings a session can be assigned; id in 1..6.
const std::array<RoundSpec, kRoundsPerSession>& round_sequence(int sequence_id);
const std::vector<std::string>& surname_list();

struct ChainState {
  std::int64_t chain_id = 0;
  std::string story;
  int n = 0;
  int shown = 0;
  Graph current;
  Graph initial;
  int length = 0;  // accepted responses
  std::string leased_by;
  double lease_expires = 0.0;

  bool full() const noexcept { return length >= kChainCapacity; }
  friend bool operator==(const ChainState&, const ChainState&) = default;
};

struct RoundAssignment {
  std::string session_id;
  int round_index = 0;  // 1-based
  std::int64_t chain_id = 0;
  PartialGraph pg;
  std::vector<std::string> labels;      // node labels, size n
  std::vector<std::string> shown_list;  // one statement per shown relation
  bool large_n = false;
  double lease_expires = 0.0;
};

struct SessionState {
  std::string session_id;
  std::string story;
  int sequence_id = 1;
  int next_round = 0;  // rounds answered
  bool completed = false;
  std::vector<std::string> labels;  // 15 distinct surnames
  std::set<std::int64_t> chains_used;
  std::optional<RoundAssignment> pending;
  int valid_rounds = 0;
  std::map<int, std::vector<int>> answers;
};

struct Telemetry {
  double elapsed_seconds = 0.0;
  int nodes_moved = 0;
};

enum class Verdict { Accepted, Excluded, Rejected };
const char* verdict_name(Verdict v);

struct SubmitResult {
  Verdict verdict = Verdict::Rejected;
  std::vector<std::string> rules;                  // when excluded
  std::vector<std::pair<int, int>> offending;      // when rejected
  int chain_length = 0;
};

struct QuestionSpec {
  std::string session_id;
  int round_index = 0;
  int variant = 0;
  std::string kind;  // "most_important" or "least_important"
  std::string prompt;
  std::vector<int> nodes;
  std::vector<std::string> labels;
};

struct ServiceConfig {
  std::string log_path;  // empty: in-memory only
  std::uint64_t seed = 1;
  double lease_seconds = 30.0 * 60.0;
  std::function<double()> clock;  // seconds; defaults to the system clock
};

// Live experiment backend. All state changes go through one mutex and are
// appended to the JSON-lines event log before they take effect; opening a
// service on an existing log replays it.
class ChainService {
 public:
  explicit ChainService(ServiceConfig cfg);
  ~ChainService();
  ChainService(const ChainService&) = delete;
  ChainService& operator=(const ChainService&) = delete;

  SessionState create_session(const std::string& story);
  RoundAssignment next_round(const std::string& session_id);
  SubmitResult submit_response(const std::string& session_id, int round_index, const Graph& response,
                               const Telemetry& telemetry);
  QuestionSpec post_round_question(const std::string& session_id, int round_index) const;
  void record_answer(const std::string& session_id, int round_index, const std::vector<int>& nodes);

  // Every non-rejected response for (story, n); n = 0 keeps all sizes.
  std::vector<ResponseRecord> export_records(const std::string& story, int n = 0) const;

  SessionState session(const std::string& session_id) const;
  std::vector<ChainState> chains() const;
  std::size_t event_count() const;

 private:
  void replay();
  void apply(const Json& event, bool from_log);
  void append(const Json& event, bool sync);
  double now() const;
  SessionState& find_session(const std::string& id);
  const SessionState& find_session(const std::string& id) const;
  ChainState& init_chain(const std::string& story, int n, int shown, Rng& rng);
  std::vector<std::string> statements(const std::string& story, const PartialGraph& pg,
                                      const std::vector<std::string>& labels) const;

  ServiceConfig cfg_;
  mutable std::mutex mu_;
  std::FILE* log_ = nullptr;
  std::size_t events_ = 0;
  std::map<std::string, SessionState> sessions_;
  std::map<std::int64_t, ChainState> chains_;
  std::map<std::string, int> chain_inits_;  // per (story, n, shown) stream
  std::vector<ResponseRecord> records_;
  std::int64_t next_chain_id_ = 1;
  std::uint64_t next_session_ = 1;
};

}  // namespace graphprior
