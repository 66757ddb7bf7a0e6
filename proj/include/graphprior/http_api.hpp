#pragma once

#include <memory>
#include <string>

#include "graphprior/service.hpp"

namespace httplib {
class Server;
}

namespace graphprior {

Json to_json(const SessionState& s);
Json to_json(const RoundAssignment& a);
Json to_json(const SubmitResult& r);
Json to_json(const QuestionSpec& q);

// HTTP JSON front end for a ChainService:
//   POST /sessions                                {"story"}
//   GET  /sessions/{id}/round
//   POST /sessions/{id}/rounds/{k}                {"edges", "telemetry"}
//   GET  /sessions/{id}/rounds/{k}/question
//   POST /sessions/{id}/rounds/{k}/question-answer {"nodes"}
//   GET  /export?story=&n=                        JSON lines
// Errors come back as {"error": {"kind", "message"}} with 400 (argument or
// data), 404 (unknown session), 409 (protocol) or 500.
class HttpApi {
 public:
  explicit HttpApi(ChainService& service);
  ~HttpApi();

  // Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  // Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  ChainService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace graphprior
