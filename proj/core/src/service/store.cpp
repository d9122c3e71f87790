#include "cadenza/service/store.h"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "cadenza/errors.h"
#include "cadenza/service/documents.h"

namespace cadenza::service {

namespace {

std::string RandomId() {
  static thread_local std::mt19937_64 engine{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id(16, '0');
  std::uint64_t bits = engine();
  for (auto& c : id) {
    c = kHex[bits & 0xF];
    bits >>= 4;
  }
  return id;
}

}  // namespace

std::int64_t SystemNowMs() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

SessionStore::SessionStore(std::filesystem::path dir, const CorpusDb& db, Clock clock)
    : dir_(std::move(dir)), db_(&db), clock_(clock ? std::move(clock) : Clock(SystemNowMs)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir_.string() + ": " + ec.message());
}

bool SessionStore::ValidId(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         id.find_first_not_of("0123456789abcdef") == std::string::npos;
}

std::filesystem::path SessionStore::PathFor(const std::string& id) const { return dir_ / (id + ".json"); }

std::shared_ptr<SessionEntry> SessionStore::Create(const GenerationConfig& config) {
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = RandomId();
  } while (sessions_.count(id) > 0 || std::filesystem::exists(PathFor(id)));
  auto entry = std::make_shared<SessionEntry>(Session(id, config, *db_, Now()));
  sessions_.emplace(id, entry);
  return entry;
}

Session SessionStore::ReadFromDisk(const std::string& id) const {
  if (!ValidId(id)) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
  std::ifstream in(PathFor(id), std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return LoadSessionJson(ss.str(), *db_);
}

std::shared_ptr<SessionEntry> SessionStore::Get(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  }
  // Replaying can take a while; do it outside the table lock.
  auto entry = std::make_shared<SessionEntry>(ReadFromDisk(id));
  std::lock_guard lock(mutex_);
  return sessions_.emplace(id, entry).first->second;
}

void SessionStore::Save(const Session& session) const {
  const auto path = PathFor(session.id());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out << SaveSessionJson(session);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

void SessionStore::Reload(SessionEntry& entry) const { entry.session = ReadFromDisk(entry.session.id()); }

}  // namespace cadenza::service
