#include "cadenza/service/server.h"

#include <cstdlib>
#include <mutex>

#include "cadenza/errors.h"
#include "cadenza/service/documents.h"
#include "cadenza/service/http_mentor.h"
#include "httplib.h"
#include "json.hpp"

namespace cadenza::service {

namespace {

constexpr const char* kJson = "application/json";
constexpr std::size_t kMaxUpload = 64 * 1024 * 1024;
constexpr int kDefaultBpm = 120;

void Fail(httplib::Response& res, ErrorCode code, const std::string& message) {
  res.status = HttpStatus(code);
  res.set_content(ErrorJson(code, message), kJson);
}

template <class F>
void Guard(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    Fail(res, e.code(), e.what());
  } catch (const std::exception& e) {
    Fail(res, ErrorCode::kIo, e.what());
  }
}

void RequireLegal(const Session& s, Operation op) {
  if (!IsLegal(s.state(), op)) {
    throw Error(ErrorCode::kIllegalState, std::string(OperationName(op)) + " is not allowed in state " +
                                              std::string(SessionStateName(s.state())));
  }
}

nlohmann::json BodyObject(const httplib::Request& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid JSON body: ") + e.what());
  }
}

int IntParam(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) throw Error(ErrorCode::kInvalidArgument, "missing query parameter '" + name + "'");
  const std::string text = req.get_param_value(name);
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "'" + name + "' must be an integer");
}

}  // namespace

ServerOptions ApplyEnvironment(ServerOptions options) {
  if (const char* v = std::getenv("CADENZA_DATA_DIR"); v && *v) options.data_dir = v;
  if (const char* v = std::getenv("CADENZA_MENTOR_URL"); v && *v) options.mentor.endpoint = v;
  if (const char* v = std::getenv("CADENZA_MENTOR_KEY"); v && *v) options.mentor.api_key = v;
  return options;
}

struct Server::Impl {
  Impl(ServerOptions o, const CorpusDb& d, CannedMentor c, SessionStore::Clock clock)
      : options(std::move(o)), db(d), canned(std::move(c)), store(options.data_dir, db, std::move(clock)) {
    if (!options.mentor.endpoint.empty()) live = MakeHttpMentor(options.mentor);
    Routes();
  }

  // Runs `op` on a session under its lock, then persists it when `mutates`.
  template <class F>
  void WithSession(const httplib::Request& req, httplib::Response& res, bool mutates, F&& op) {
    Guard(res, [&] {
      auto entry = store.Get(req.matches[1]);
      std::lock_guard lock(entry->mutex);
      op(*entry);
      if (mutates) store.Save(entry->session);
    });
  }

  void Routes() {
    http.set_payload_max_length(kMaxUpload);
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(ErrorJson(res.status == 404 ? ErrorCode::kNotFound : ErrorCode::kInvalidArgument,
                                  "no route for this request"),
                        kJson);
      }
    });

    http.Get("/api/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json j{{"status", "ok"},
                       {"corpus_digest", db.source_digest},
                       {"progressions", db.progressions.size()},
                       {"rhythms", db.rhythms.size()},
                       {"mentor", live ? "live" : "stub"}};
      res.set_content(j.dump(), kJson);
    });

    http.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        GenerationConfig config = ParseConfigJson(req.body);
        auto entry = store.Create(config);
        std::lock_guard lock(entry->mutex);
        store.Save(entry->session);
        res.status = 201;
        res.set_content(SessionSummaryJson(entry->session), kJson);
      });
    });

    http.Get(R"(/api/v1/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, false,
                  [&](SessionEntry& e) { res.set_content(SessionSummaryJson(e.session), kJson); });
    });

    http.Post(R"(/api/v1/sessions/([0-9a-f]+)/upload)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, true, [&](SessionEntry& e) {
        RequireLegal(e.session, Operation::kUpload);
        std::string filename, content_type, content;
        if (req.is_multipart_form_data()) {
          if (!req.has_file("file")) throw Error(ErrorCode::kInvalidArgument, "multipart field 'file' is missing");
          const auto file = req.get_file_value("file");
          filename = file.filename;
          content_type = file.content_type;
          content = file.content;
        } else {
          filename = req.get_param_value("filename");
          content_type = req.get_header_value("Content-Type");
          content = req.body;
        }
        std::vector<std::uint8_t> bytes(content.begin(), content.end());
        UploadKind kind = DetectUploadKind(filename, content_type, bytes);
        e.session.Upload(kind, std::move(bytes), store.Now());
        res.set_content(SessionSummaryJson(e.session), kJson);
      });
    });

    http.Post(R"(/api/v1/sessions/([0-9a-f]+)/process)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, true, [&](SessionEntry& e) {
        RequireLegal(e.session, Operation::kProcess);
        auto body = BodyObject(req);
        int bpm = kDefaultBpm;
        if (body.contains("bpm")) {
          if (!body["bpm"].is_number_integer()) throw Error(ErrorCode::kInvalidArgument, "bpm must be an integer");
          bpm = body["bpm"].get<int>();
        }
        e.session.Process(bpm, store.Now());
        res.set_content(AnalysisJson(e.session), kJson);
      });
    });

    http.Post(R"(/api/v1/sessions/([0-9a-f]+)/continue)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, true, [&](SessionEntry& e) {
        e.session.Continue(store.Now());
        res.set_content(PhraseJson(e.session.piece(), e.session.piece().phrases.size() - 1), kJson);
      });
    });

    http.Post(R"(/api/v1/sessions/([0-9a-f]+)/end)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, true, [&](SessionEntry& e) {
        e.session.End(store.Now());
        const Piece& p = e.session.piece();
        nlohmann::json j{{"state", SessionStateName(e.session.state())},
                         {"measure", nlohmann::json::parse(MeasureJson(p, static_cast<int>(p.score.measure_count()) - 1))}};
        res.set_content(j.dump(), kJson);
      });
    });

    http.Get(R"(/api/v1/sessions/([0-9a-f]+)/score)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, false, [&](SessionEntry& e) {
        RequireLegal(e.session, Operation::kReadScore);
        res.set_content(ScoreJson(e.session.piece()), kJson);
      });
    });

    http.Get(R"(/api/v1/sessions/([0-9a-f]+)/export\.mid)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, false, [&](SessionEntry& e) {
        auto bytes = e.session.ExportMidi();
        res.set_header("Content-Disposition", "attachment; filename=\"" + e.session.id() + ".mid\"");
        res.set_content(std::string(bytes.begin(), bytes.end()), "audio/midi");
      });
    });

    http.Get(R"(/api/v1/sessions/([0-9a-f]+)/explanation)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, false, [&](SessionEntry& e) {
        Scope scope = Scope::Parse(req.has_param("scope") ? req.get_param_value("scope") : "piece");
        Level level = ParseLevel(req.has_param("level") ? req.get_param_value("level") : "beginner");
        res.set_content(ExplanationJson(e.session.Explain(scope, level)), kJson);
      });
    });

    http.Get(R"(/api/v1/sessions/([0-9a-f]+)/alternatives)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, false, [&](SessionEntry& e) {
        int measure = IntParam(req, "measure");
        res.set_content(AlternativesJson(measure, e.session.GetAlternatives(measure), db), kJson);
      });
    });

    http.Patch(R"(/api/v1/sessions/([0-9a-f]+)/measures/(-?\d+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 WithSession(req, res, true, [&](SessionEntry& e) {
                   int measure = std::stoi(req.matches[2]);
                   auto body = BodyObject(req);
                   if (!body.contains("field") || !body["field"].is_string() || !body.contains("value")) {
                     throw Error(ErrorCode::kInvalidArgument, "body needs 'field' and 'value'");
                   }
                   EditField field = ParseEditField(body["field"].get<std::string>());
                   const auto& v = body["value"];
                   std::string value = v.is_string() ? v.get<std::string>() : v.dump();
                   const EditRecord& record = e.session.Edit(measure, field, value, store.Now());
                   res.set_content(EditResultJson(e.session.piece(), record), kJson);
                 });
               });

    http.Post(R"(/api/v1/sessions/([0-9a-f]+)/save)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, true, [&](SessionEntry& e) {
        nlohmann::json j{{"id", e.session.id()},
                         {"version", kSessionSchemaVersion},
                         {"path", store.PathFor(e.session.id()).string()}};
        res.set_content(j.dump(), kJson);
      });
    });

    http.Post(R"(/api/v1/sessions/([0-9a-f]+)/load)", [this](const httplib::Request& req, httplib::Response& res) {
      WithSession(req, res, false, [&](SessionEntry& e) {
        store.Reload(e);
        res.set_content(SessionSummaryJson(e.session), kJson);
      });
    });

    // Not tied to a session, so it never waits on a session lock.
    http.Post("/api/v1/mentor", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        auto body = BodyObject(req);
        std::string query = body.contains("query") && body["query"].is_string() ? body["query"].get<std::string>() : "";
        if (!live) {
          res.set_content(MentorJson(MentorAsk(query, canned)), kJson);
          return;
        }
        try {
          res.set_content(MentorJson(MentorAsk(query, canned, live.get())), kJson);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMentorUnavailable) throw;
          res.set_content(MentorJson(MentorAsk(query, canned), std::string(e.what())), kJson);
        }
      });
    });
  }

  ServerOptions options;
  const CorpusDb& db;
  CannedMentor canned;
  std::unique_ptr<MentorBackend> live;
  SessionStore store;
  httplib::Server http;
  std::mutex run_mutex;
  bool stop_requested = false;
  bool started = false;
};

Server::Server(ServerOptions options, const CorpusDb& db, CannedMentor canned, SessionStore::Clock clock)
    : impl_(std::make_unique<Impl>(std::move(options), db, std::move(canned), std::move(clock))) {}

Server::~Server() { Stop(); }

int Server::Bind() {
  int port = impl_->options.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(impl_->options.host);
    if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + impl_->options.host);
  } else if (!impl_->http.bind_to_port(impl_->options.host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + impl_->options.host + ":" + std::to_string(port));
  }
  return port;
}

void Server::Run() {
  {
    std::lock_guard lock(impl_->run_mutex);
    if (impl_->stop_requested) return;
    impl_->started = true;
  }
  impl_->http.listen_after_bind();
}

// Stop() may race a Run() that has not reached the accept loop yet; httplib
// ignores stop() until then, so wait for it.
void Server::Stop() {
  if (!impl_) return;
  bool started = false;
  {
    std::lock_guard lock(impl_->run_mutex);
    impl_->stop_requested = true;
    started = impl_->started;
  }
  if (started) {
    impl_->http.wait_until_ready();
    impl_->http.stop();
  }
}

}  // namespace cadenza::service
