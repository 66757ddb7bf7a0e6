#include "graphprior/service.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unistd.h>

#include "graphprior/error.hpp"
#include "graphprior/mcmcp.hpp"

namespace graphprior {
namespace {

using Seq = std::array<RoundSpec, kRoundsPerSession>;

const std::array<Seq, kSequenceCount> kSequences = {{
    {{{4, 2}, {4, 4}, {5, 3}, {5, 7}, {6, 5}, {6, 7}, {7, 6}, {7, 9},
      {8, 7}, {8, 12}, {10, 8}, {10, 19}, {12, 8}, {12, 28}, {15, 20}, {15, 40}}},
    {{{4, 4}, {4, 2}, {5, 7}, {5, 3}, {6, 7}, {6, 5}, {7, 9}, {7, 6},
      {8, 12}, {8, 7}, {10, 19}, {10, 8}, {12, 28}, {12, 8}, {15, 40}, {15, 20}}},
    {{{4, 5}, {5, 5}, {6, 7}, {7, 9}, {8, 12}, {10, 19}, {12, 28}, {15, 10},
      {4, 3}, {5, 1}, {6, 5}, {7, 6}, {8, 7}, {10, 8}, {12, 15}, {15, 10}}},
    {{{4, 3}, {5, 1}, {6, 5}, {7, 6}, {8, 7}, {10, 8}, {12, 15}, {15, 10},
      {4, 5}, {5, 5}, {6, 7}, {7, 9}, {8, 12}, {10, 19}, {12, 28}, {15, 10}}},
    {{{4, 3}, {5, 9}, {6, 7}, {7, 9}, {8, 12}, {10, 19}, {12, 15}, {15, 40},
      {15, 10}, {12, 8}, {10, 8}, {8, 7}, {7, 6}, {6, 5}, {5, 5}, {4, 1}}},
    {{{4, 1}, {5, 5}, {6, 5}, {7, 6}, {8, 7}, {10, 8}, {12, 8}, {15, 10},
      {15, 40}, {12, 15}, {10, 19}, {8, 12}, {7, 9}, {6, 7}, {5, 9}, {4, 3}}},
}};

struct Question {
  const char* kind;
  const char* prompt;
};

constexpr std::array<Question, 4> kQuestions = {{
    {"most_important", "Which node do you think is the most important? Click it."},
    {"least_important", "Which node do you think is the least important? Click it."},
    {"most_important", "If you had to pick the most central node, which would it be?"},
    {"least_important", "Click the node that seems to matter least to this network."},
}};

std::string chain_key(const std::string& story, int n, int shown) {
  return story + "/" + std::to_string(n) + "/" + std::to_string(shown);
}

std::string hex_token(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = digits[x & 15];
  return s;
}

}  // namespace

const std::array<RoundSpec, kRoundsPerSession>& round_sequence(int sequence_id) {
  if (sequence_id < 1 || sequence_id > kSequenceCount) throw ArgumentError("sequence id must be in 1..6");
  return kSequences[static_cast<std::size_t>(sequence_id - 1)];
}

const std::vector<std::string>& surname_list() {
  static const std::vector<std::string> names = {
      "Smith",    "Johnson", "Williams", "Brown",    "Jones",   "Garcia",  "Miller",  "Davis",
      "Rodriguez", "Martinez", "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson", "Thomas",
      "Taylor",   "Moore",   "Jackson",  "Martin",   "Lee",     "Perez",   "Thompson", "White",
      "Harris",   "Sanchez", "Clark",    "Ramirez",  "Lewis",   "Robinson", "Walker", "Young",
      "Allen",    "King",    "Wright",   "Scott",    "Torres",  "Nguyen",  "Hill",    "Flores",
      "Green",    "Adams",   "Nelson",   "Baker",    "Hall",    "Rivera",  "Campbell", "Mitchell",
      "Carter",   "Roberts"};
  return names;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accepted: return "accepted";
    case Verdict::Excluded: return "excluded";
    case Verdict::Rejected: return "rejected";
  }
  return "unknown";
}

ChainService::ChainService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.clock) {
    cfg_.clock = [] {
      return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
    };
  }
  if (!cfg_.log_path.empty()) {
    replay();
    log_ = std::fopen(cfg_.log_path.c_str(), "a");
    if (!log_) throw DataError("cannot open event log " + cfg_.log_path);
  }
}

ChainService::~ChainService() {
  if (log_) std::fclose(log_);
}

void ChainService::replay() {
  std::ifstream in(cfg_.log_path, std::ios::binary);
  if (!in) return;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0, good = 0;
  std::size_t lineno = 0;
  while (pos < content.size()) {
    const std::size_t end = content.find('\n', pos);
    const bool terminated = end != std::string::npos;
    const std::string line = content.substr(pos, terminated ? end - pos : std::string::npos);
    ++lineno;
    if (!terminated) break;  // torn final write
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      Json ev;
      try {
        ev = Json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        throw DataError("event log line " + std::to_string(lineno) + " is not valid JSON");
      }
      apply(ev, true);
      ++events_;
    }
    pos = end + 1;
    good = pos;
  }
  if (good < content.size()) {
    in.close();
    std::filesystem::resize_file(cfg_.log_path, good);
  }
}

void ChainService::append(const Json& event, bool sync) {
  if (log_) {
    const std::string line = event.dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0)
      throw DataError("failed to append to event log");
    if (sync && ::fsync(::fileno(log_)) != 0) throw DataError("fsync on event log failed");
  }
  ++events_;
}

double ChainService::now() const { return cfg_.clock(); }

SessionState& ChainService::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

const SessionState& ChainService::find_session(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

void ChainService::apply(const Json& ev, bool from_log) {
  const std::string type = ev.at("type").get<std::string>();
  if (type == "session") {
    SessionState s;
    s.session_id = ev.at("session_id").get<std::string>();
    s.story = ev.at("story").get<std::string>();
    s.sequence_id = ev.at("sequence_id").get<int>();
    s.labels = ev.at("labels").get<std::vector<std::string>>();
    sessions_[s.session_id] = std::move(s);
    ++next_session_;
  } else if (type == "chain") {
    ChainState c;
    c.chain_id = ev.at("chain_id").get<std::int64_t>();
    c.story = ev.at("story").get<std::string>();
    c.n = ev.at("n").get<int>();
    c.shown = ev.at("shown").get<int>();
    c.initial = c.current = graph_from_json(ev.at("initial"));
    ++chain_inits_[chain_key(c.story, c.n, c.shown)];
    next_chain_id_ = std::max(next_chain_id_, c.chain_id + 1);
    chains_[c.chain_id] = std::move(c);
  } else if (type == "assign") {
    SessionState& s = find_session(ev.at("session_id").get<std::string>());
    ChainState& c = chains_.at(ev.at("chain_id").get<std::int64_t>());
    RoundAssignment a;
    a.session_id = s.session_id;
    a.round_index = ev.at("round_index").get<int>();
    a.chain_id = c.chain_id;
    a.pg = partial_graph_from_json(ev.at("pg"));
    a.labels.assign(s.labels.begin(), s.labels.begin() + c.n);
    a.shown_list = statements(s.story, a.pg, a.labels);
    a.large_n = c.n >= 10;
    a.lease_expires = ev.at("lease_expires").get<double>();
    c.leased_by = s.session_id;
    c.lease_expires = a.lease_expires;
    s.pending = std::move(a);
  } else if (type == "abandon") {
    SessionState& s = find_session(ev.at("session_id").get<std::string>());
    ChainState& c = chains_.at(ev.at("chain_id").get<std::int64_t>());
    if (c.leased_by == s.session_id) {
      c.leased_by.clear();
      c.lease_expires = 0.0;
    }
    s.pending.reset();
  } else if (type == "response") {
    ResponseRecord r = record_from_json(ev.at("record"));
    const bool accepted = ev.at("verdict").get<std::string>() == "accepted";
    SessionState& s = find_session(r.session_id);
    ChainState& c = chains_.at(r.chain_id);
    if (accepted) {
      c.current = r.response;
      ++c.length;
      ++s.valid_rounds;
    }
    if (c.leased_by == s.session_id) {
      c.leased_by.clear();
      c.lease_expires = 0.0;
    }
    s.chains_used.insert(c.chain_id);
    s.pending.reset();
    ++s.next_round;
    s.completed = s.next_round >= kRoundsPerSession;
    records_.push_back(std::move(r));
  } else if (type == "answer") {
    SessionState& s = find_session(ev.at("session_id").get<std::string>());
    s.answers[ev.at("round_index").get<int>()] = ev.at("nodes").get<std::vector<int>>();
  } else if (type == "rejected") {
    // logged for the record only
  } else if (from_log) {
    throw DataError("unknown event type '" + type + "' in log");
  }
}

std::vector<std::string> ChainService::statements(const std::string& story, const PartialGraph& pg,
                                                  const std::vector<std::string>& labels) const {
  std::vector<std::string> out;
  const int n = pg.nodes();
  for (int s = 0; s < relation_count(n); ++s) {
    const Relation rel = pg.state(s);
    if (rel == Relation::Obscured) continue;
    const auto [i, j] = relation_pair(s, n);
    const std::string& a = labels[static_cast<std::size_t>(i)];
    const std::string& b = labels[static_cast<std::size_t>(j)];
    const bool on = rel == Relation::Present;
    if (story == "class") {
      out.push_back(a + " and " + b + (on ? " are friends" : " are not friends"));
    } else if (story == "work") {
      out.push_back(a + " and " + b + (on ? " work together" : " do not work together"));
    } else if (story == "park") {
      out.push_back(std::string(on ? "There is a trail" : "There is no trail") + " between " + a + " and " + b);
    } else {
      out.push_back(std::string(on ? "There is a road" : "There is no road") + " between " + a + " and " + b);
    }
  }
  return out;
}

SessionState ChainService::create_session(const std::string& story) {
  if (!is_cover_story(story)) throw ArgumentError("unknown cover story '" + story + "'");
  std::lock_guard lock(mu_);
  Rng rng(derive_seed(cfg_.seed, {events_, 0x5e55}));
  std::uniform_int_distribution<int> seq(1, kSequenceCount);
  const int sequence_id = seq(rng);
  std::vector<std::string> names = surname_list();
  std::shuffle(names.begin(), names.end(), rng);
  names.resize(kMaxNodes);
  const std::string id = hex_token(derive_seed(cfg_.seed, {events_, next_session_, 0x1d}));
  const Json ev{{"type", "session"}, {"session_id", id},   {"story", story},
                {"sequence_id", sequence_id}, {"labels", names}, {"time", now()}};
  append(ev, false);
  apply(ev, false);
  return sessions_.at(id);
}

ChainState& ChainService::init_chain(const std::string& story, int n, int shown, Rng& rng) {
  const int k = chain_inits_[chain_key(story, n, shown)];
  const double rho = 0.05 + 0.1 * (k % 10);
  const Graph g = sample_erdos_renyi(n, rho, rng);
  const std::int64_t id = next_chain_id_;
  const Json ev{{"type", "chain"}, {"chain_id", id},       {"story", story}, {"n", n},
                {"shown", shown},  {"initial", to_json(g)}, {"density", rho}, {"time", now()}};
  append(ev, false);
  apply(ev, false);
  return chains_.at(id);
}

RoundAssignment ChainService::next_round(const std::string& session_id) {
  std::lock_guard lock(mu_);
  const double t = now();
  // Free leases that ran out before anything else looks at the chains.
  for (auto& [id, s] : sessions_) {
    if (s.pending && s.pending->lease_expires <= t) {
      const Json ev{{"type", "abandon"}, {"session_id", id}, {"round_index", s.pending->round_index},
                    {"chain_id", s.pending->chain_id}, {"time", t}};
      append(ev, false);
      apply(ev, false);
    }
  }
  SessionState& s = find_session(session_id);
  if (s.completed) throw ProtocolError("session " + session_id + " has completed all rounds");
  if (s.pending) return *s.pending;

  const RoundSpec spec = round_sequence(s.sequence_id)[static_cast<std::size_t>(s.next_round)];
  ChainState* best = nullptr;
  for (auto& [id, c] : chains_) {
    if (c.story != s.story || c.n != spec.n || c.shown != spec.shown || c.full()) continue;
    if (!c.leased_by.empty() && c.lease_expires > t) continue;
    if (s.chains_used.count(id)) continue;
    if (!best || c.length < best->length) best = &c;
  }
  Rng rng(derive_seed(cfg_.seed, {events_, 0xa55}));
  if (!best) best = &init_chain(s.story, spec.n, spec.shown, rng);

  const int m = relation_count(spec.n);
  std::vector<int> slots(static_cast<std::size_t>(m));
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  EdgeBits mask;
  for (int i = 0; i < m - spec.shown; ++i) mask.set(slots[static_cast<std::size_t>(i)]);
  const PartialGraph pg = PartialGraph::obscure(best->current, mask);
  const Json ev{{"type", "assign"},         {"session_id", session_id}, {"round_index", s.next_round + 1},
                {"chain_id", best->chain_id}, {"pg", to_json(pg)},        {"lease_expires", t + cfg_.lease_seconds},
                {"time", t}};
  append(ev, false);
  apply(ev, false);
  return *s.pending;
}

SubmitResult ChainService::submit_response(const std::string& session_id, int round_index, const Graph& response,
                                           const Telemetry& telemetry) {
  std::lock_guard lock(mu_);
  const double t = now();
  SessionState& s = find_session(session_id);
  if (s.completed) throw ProtocolError("session " + session_id + " has completed all rounds");
  if (!s.pending || s.pending->round_index != round_index)
    throw ProtocolError("round " + std::to_string(round_index) + " is not awaiting a response");
  const RoundAssignment& a = *s.pending;
  if (a.lease_expires <= t) {
    const Json ev{{"type", "abandon"}, {"session_id", session_id}, {"round_index", round_index},
                  {"chain_id", a.chain_id}, {"time", t}};
    append(ev, false);
    apply(ev, false);
    throw ProtocolError("round " + std::to_string(round_index) + " lease expired");
  }
  if (response.nodes() != a.pg.nodes()) throw ArgumentError("response has the wrong number of nodes");
  if (!std::isfinite(telemetry.elapsed_seconds) || telemetry.elapsed_seconds < 0.0 || telemetry.nodes_moved < 0)
    throw ArgumentError("telemetry values must be non-negative");

  SubmitResult out;
  const auto bad = a.pg.violations(response);
  if (!bad.empty()) {
    Json offending = Json::array();
    for (int slot : bad) {
      const auto [i, j] = relation_pair(slot, a.pg.nodes());
      out.offending.emplace_back(i, j);
      offending.push_back({i, j});
    }
    const Json ev{{"type", "rejected"},          {"session_id", session_id},
                  {"round_index", round_index}, {"chain_id", a.chain_id},
                  {"response", to_json(response)}, {"offending", offending},
                  {"time", t}};
    append(ev, false);
    out.verdict = Verdict::Rejected;
    out.chain_length = chains_.at(a.chain_id).length;
    return out;
  }

  ResponseRecord rec;
  rec.session_id = session_id;
  rec.chain_id = a.chain_id;
  rec.cover_story = s.story;
  rec.round_index = round_index;
  rec.pg = a.pg;
  rec.response = response;
  rec.elapsed_seconds = telemetry.elapsed_seconds;
  rec.nodes_moved = telemetry.nodes_moved;
  const unsigned rules = record_rules(rec);
  rec.valid_rounds_in_session = s.valid_rounds + (rules == 0 ? 1 : 0);
  out.verdict = rules == 0 ? Verdict::Accepted : Verdict::Excluded;
  out.rules = ExclusionReport::rule_names(rules);
  const Json ev{{"type", "response"},
                {"record", to_json(rec)},
                {"verdict", verdict_name(out.verdict)},
                {"rules", out.rules},
                {"time", t}};
  append(ev, out.verdict == Verdict::Accepted);
  const std::int64_t chain = a.chain_id;
  apply(ev, false);
  out.chain_length = chains_.at(chain).length;
  return out;
}

QuestionSpec ChainService::post_round_question(const std::string& session_id, int round_index) const {
  std::lock_guard lock(mu_);
  const SessionState& s = find_session(session_id);
  if (round_index < 1 || round_index > s.next_round)
    throw ProtocolError("round " + std::to_string(round_index) + " has not been answered");
  int n = 0;
  for (const auto& r : records_)
    if (r.session_id == session_id && r.round_index == round_index) n = r.nodes();
  QuestionSpec q;
  q.session_id = session_id;
  q.round_index = round_index;
  q.variant = (round_index - 1) % static_cast<int>(kQuestions.size());
  q.kind = kQuestions[static_cast<std::size_t>(q.variant)].kind;
  q.prompt = kQuestions[static_cast<std::size_t>(q.variant)].prompt;
  q.nodes.resize(static_cast<std::size_t>(n));
  std::iota(q.nodes.begin(), q.nodes.end(), 0);
  q.labels.assign(s.labels.begin(), s.labels.begin() + n);
  return q;
}

void ChainService::record_answer(const std::string& session_id, int round_index, const std::vector<int>& nodes) {
  const QuestionSpec q = post_round_question(session_id, round_index);
  for (int v : nodes)
    if (v < 0 || v >= static_cast<int>(q.nodes.size())) throw ArgumentError("answer names a node outside the round");
  std::lock_guard lock(mu_);
  const Json ev{{"type", "answer"}, {"session_id", session_id}, {"round_index", round_index},
                {"kind", q.kind},   {"nodes", nodes},           {"time", now()}};
  append(ev, false);
  apply(ev, false);
}

std::vector<ResponseRecord> ChainService::export_records(const std::string& story, int n) const {
  std::lock_guard lock(mu_);
  std::vector<ResponseRecord> out;
  for (const auto& r : records_)
    if ((story.empty() || r.cover_story == story) && (n == 0 || r.nodes() == n)) out.push_back(r);
  return out;
}

SessionState ChainService::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return find_session(session_id);
}

std::vector<ChainState> ChainService::chains() const {
  std::lock_guard lock(mu_);
  std::vector<ChainState> out;
  for (const auto& [id, c] : chains_) out.push_back(c);
  return out;
}

std::size_t ChainService::event_count() const {
  std::lock_guard lock(mu_);
  return events_;
}

}  // namespace graphprior
