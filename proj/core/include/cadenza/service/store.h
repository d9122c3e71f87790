/// @file
/// @brief In-memory session table backed by one JSON file per session.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "cadenza/session.h"

namespace cadenza::service {

/// A session and the lock that serializes every operation on it.
struct SessionEntry {
  explicit SessionEntry(Session s) : session(std::move(s)) {}
  std::mutex mutex;
  Session session;
};

class SessionStore {
 public:
  using Clock = std::function<std::int64_t()>;

  /// Creates `dir` if needed. `db` must outlive the store.
  SessionStore(std::filesystem::path dir, const CorpusDb& db, Clock clock = {});

  std::shared_ptr<SessionEntry> Create(const GenerationConfig& config);
  /// From memory, else from disk. Throws Error(kNotFound).
  std::shared_ptr<SessionEntry> Get(const std::string& id);
  /// Writes atomically (temporary file, then rename). Caller holds the entry lock.
  void Save(const Session& session) const;
  /// Replaces the in-memory session with the one on disk. Throws kNotFound,
  /// kParseError, kSchemaVersionMismatch, kReplayMismatch.
  void Reload(SessionEntry& entry) const;

  std::filesystem::path PathFor(const std::string& id) const;
  std::int64_t Now() const { return clock_(); }
  const CorpusDb& db() const { return *db_; }

  /// Lower-case hex ids only, so an id can never escape the directory.
  static bool ValidId(const std::string& id);

 private:
  Session ReadFromDisk(const std::string& id) const;

  std::filesystem::path dir_;
  const CorpusDb* db_;
  Clock clock_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
};

/// Milliseconds since the unix epoch.
std::int64_t SystemNowMs();

}  // namespace cadenza::service
