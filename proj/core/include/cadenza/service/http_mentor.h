/// @file
/// @brief Live mentor backend speaking a minimal chat-completion protocol:
/// POST {"messages": [{"role", "content"}...]} and read {"content": "..."}.

#pragma once

#include <memory>

#include "cadenza/explainer.h"

namespace cadenza::service {

/// Plain http:// endpoints only. Throws Error(kInvalidArgument) for an
/// unusable URL. The key, if any, goes in an Authorization: Bearer header.
std::unique_ptr<MentorBackend> MakeHttpMentor(const MentorConfig& config);

}  // namespace cadenza::service
