#include "cadenza/service/http_mentor.h"

#include "cadenza/errors.h"
#include "httplib.h"
#include "json.hpp"

namespace cadenza::service {

namespace {

class HttpMentor : public MentorBackend {
 public:
  HttpMentor(std::string origin, std::string path, const MentorConfig& config)
      : origin_(std::move(origin)), path_(std::move(path)), config_(config) {}

  std::string Complete(const std::string& system_prompt, const std::string& query) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    nlohmann::json body{{"messages",
                         {{{"role", "system"}, {"content", system_prompt}}, {{"role", "user"}, {"content", query}}}}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::kMentorUnavailable, "mentor endpoint unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kMentorUnavailable, "mentor endpoint answered HTTP " + std::to_string(res->status));
    }
    try {
      auto reply = nlohmann::json::parse(res->body);
      std::string content = reply.at("content").get<std::string>();
      if (content.empty()) throw Error(ErrorCode::kMentorUnavailable, "mentor endpoint returned an empty answer");
      return content;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMentorUnavailable, std::string("mentor reply is not {content}: ") + e.what());
    }
  }

 private:
  std::string origin_;
  std::string path_;
  MentorConfig config_;
};

}  // namespace

std::unique_ptr<MentorBackend> MakeHttpMentor(const MentorConfig& config) {
  const std::string& url = config.endpoint;
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "mentor endpoint must be an http:// URL, got '" + url + "'");
  }
  auto slash = url.find('/', kScheme.size());
  std::string origin = url.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : url.substr(slash);
  if (origin.size() == kScheme.size()) throw Error(ErrorCode::kInvalidArgument, "mentor endpoint has no host");
  return std::make_unique<HttpMentor>(std::move(origin), std::move(path), config);
}

}  // namespace cadenza::service
