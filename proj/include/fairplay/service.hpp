#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fairplay/standings.hpp"
#include "fairplay/tournament_file.hpp"

namespace fairplay::service {

// Handlers are pure functions from a request body to a response; the HTTP
// server only routes, so tests can call them without sockets.
struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

Response handle_health();
Response handle_impute(std::string_view content_type, std::string_view body);
Response handle_sensitivity(std::string_view content_type,
                            std::string_view body);
Response handle_compare(std::string_view content_type, std::string_view body);

// JSON payloads shared with the CLI.
nlohmann::json impute_json(const TournamentFile& file, Method method,
                           double k, double level);
nlohmann::json standings_json(const std::vector<StandingsRow>& rows);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;          // static bundle; API-only when missing
  std::string simulation_dir;  // cmd_simulate output, served read-only
  std::string cors_origin = "*";
};

class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the port; throws Error{kIo} if it is unavailable. Port 0 picks an
  // ephemeral port, reported by port().
  void bind();
  int port() const;
  // Blocks until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  ServerConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fairplay::service
