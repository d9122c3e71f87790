/// @file
/// @brief The /api/v1 HTTP service.
///
/// Routes (all JSON unless noted):
///   GET    /api/v1/health
///   POST   /api/v1/sessions                      body: optional config
///   GET    /api/v1/sessions/{id}
///   POST   /api/v1/sessions/{id}/upload          multipart "file" or raw body
///   POST   /api/v1/sessions/{id}/process         body: {"bpm": 120}
///   POST   /api/v1/sessions/{id}/continue
///   POST   /api/v1/sessions/{id}/end
///   GET    /api/v1/sessions/{id}/score
///   GET    /api/v1/sessions/{id}/export.mid      audio/midi
///   GET    /api/v1/sessions/{id}/explanation     ?scope=measure:3&level=beginner
///   GET    /api/v1/sessions/{id}/alternatives    ?measure=5
///   PATCH  /api/v1/sessions/{id}/measures/{m}    body: {"field": "degree", "value": "ii"}
///   POST   /api/v1/sessions/{id}/save
///   POST   /api/v1/sessions/{id}/load
///   POST   /api/v1/mentor                        body: {"query": "..."}

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "cadenza/corpus.h"
#include "cadenza/explainer.h"
#include "cadenza/service/store.h"

namespace cadenza::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "cadenza-sessions";
  MentorConfig mentor;
};

/// Overlays CADENZA_DATA_DIR, CADENZA_MENTOR_URL and CADENZA_MENTOR_KEY.
ServerOptions ApplyEnvironment(ServerOptions options);

class Server {
 public:
  /// `db` must outlive the server.
  Server(ServerOptions options, const CorpusDb& db, CannedMentor canned,
         SessionStore::Clock clock = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and returns the port. Throws Error(kIo) when
  /// the address is unavailable.
  int Bind();
  /// Serves until Stop(). Bind() must have succeeded.
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cadenza::service
