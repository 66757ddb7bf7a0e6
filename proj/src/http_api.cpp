#include "graphprior/http_api.hpp"

#include <httplib.h>

#include <sstream>

#include "graphprior/error.hpp"

namespace graphprior {

Json to_json(const SessionState& s) {
  return Json{{"session_id", s.session_id}, {"story", s.story},          {"sequence_id", s.sequence_id},
              {"next_round", s.next_round}, {"completed", s.completed}, {"rounds", kRoundsPerSession}};
}

Json to_json(const RoundAssignment& a) {
  return Json{{"session_id", a.session_id}, {"round_index", a.round_index}, {"chain_id", a.chain_id},
              {"n", a.pg.nodes()},          {"shown", a.pg.shown_count()}, {"pg", to_json(a.pg)},
              {"labels", a.labels},         {"shown_list", a.shown_list},  {"large_n", a.large_n},
              {"lease_expires", a.lease_expires}};
}

Json to_json(const SubmitResult& r) {
  Json offending = Json::array();
  for (const auto& [i, j] : r.offending) offending.push_back({i, j});
  return Json{{"verdict", verdict_name(r.verdict)},
              {"rules", r.rules},
              {"offending", offending},
              {"chain_length", r.chain_length}};
}

Json to_json(const QuestionSpec& q) {
  return Json{{"session_id", q.session_id}, {"round_index", q.round_index}, {"variant", q.variant},
              {"kind", q.kind},             {"prompt", q.prompt},           {"nodes", q.nodes},
              {"labels", q.labels}};
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, Json{{"error", {{"kind", kind}, {"message", message}}}});
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.kind(), e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 409, e.kind(), e.what());
    } catch (const Error& e) {
      send_error(res, 400, e.kind(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "data", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("request body is not valid JSON: ") + e.what());
  }
}

int round_param(const httplib::Request& req) {
  try {
    return std::stoi(req.matches[2].str());
  } catch (const std::exception&) {
    throw ArgumentError("round index must be an integer");
  }
}

}  // namespace

HttpApi::HttpApi(ChainService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& svc = service_;
  server_->Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    if (!body.contains("story") || !body["story"].is_string()) throw ArgumentError("body needs a 'story' string");
    send_json(res, 201, to_json(svc.create_session(body["story"].get<std::string>())));
  }));
  server_->Get(R"(/sessions/([0-9a-f]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(svc.session(req.matches[1].str())));
  }));
  server_->Get(R"(/sessions/([0-9a-f]+)/round)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(svc.next_round(req.matches[1].str())));
  }));
  server_->Post(R"(/sessions/([0-9a-f]+)/rounds/(-?[0-9]+))",
                guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1].str();
                  const int k = round_param(req);
                  const Json body = parse_body(req);
                  const SessionState s = svc.session(id);
                  if (!s.pending || s.pending->round_index != k)
                    throw ProtocolError("round " + std::to_string(k) + " is not awaiting a response");
                  Json g{{"n", s.pending->pg.nodes()}, {"edges", body.value("edges", Json::array())}};
                  Telemetry t;
                  if (body.contains("telemetry")) {
                    const Json& tj = body["telemetry"];
                    t.elapsed_seconds = tj.value("elapsed_seconds", 0.0);
                    t.nodes_moved = tj.value("nodes_moved", 0);
                  }
                  send_json(res, 200, to_json(svc.submit_response(id, k, graph_from_json(g), t)));
                }));
  server_->Get(R"(/sessions/([0-9a-f]+)/rounds/(-?[0-9]+)/question)",
               guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, to_json(svc.post_round_question(req.matches[1].str(), round_param(req))));
               }));
  server_->Post(R"(/sessions/([0-9a-f]+)/rounds/(-?[0-9]+)/question-answer)",
                guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  const Json body = parse_body(req);
                  if (!body.contains("nodes") || !body["nodes"].is_array())
                    throw ArgumentError("body needs a 'nodes' array");
                  svc.record_answer(req.matches[1].str(), round_param(req), body["nodes"].get<std::vector<int>>());
                  send_json(res, 200, Json{{"ok", true}});
                }));
  server_->Get("/export", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string story = req.has_param("story") ? req.get_param_value("story") : "";
    int n = 0;
    if (req.has_param("n")) {
      try {
        n = std::stoi(req.get_param_value("n"));
      } catch (const std::exception&) {
        throw ArgumentError("n must be an integer");
      }
    }
    if (!story.empty() && !is_cover_story(story)) throw ArgumentError("unknown cover story '" + story + "'");
    std::ostringstream out;
    write_records_jsonl(out, svc.export_records(story, n));
    res.status = 200;
    res.set_content(out.str(), "application/x-ndjson");
  }));
}

HttpApi::~HttpApi() = default;

int HttpApi::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw DataError("could not bind to " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) throw DataError("could not bind to " + host + ":" + std::to_string(port));
  return port;
}

void HttpApi::listen() { server_->listen_after_bind(); }

void HttpApi::stop() { server_->stop(); }

}  // namespace graphprior
