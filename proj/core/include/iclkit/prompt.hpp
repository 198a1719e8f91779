#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "iclkit/errors.hpp"

namespace iclkit {

enum class Role { system, user, assistant };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "unknown";
}

enum class LearningType { zsl, icl, abt };

inline const char* to_string(LearningType lt) {
  switch (lt) {
    case LearningType::zsl: return "zsl";
    case LearningType::icl: return "icl";
    case LearningType::abt: return "abt";
  }
  return "unknown";
}

inline LearningType learning_type_from_string(std::string_view s) {
  if (s == "zsl") return LearningType::zsl;
  if (s == "icl") return LearningType::icl;
  if (s == "abt") return LearningType::abt;
  throw DomainError("unknown learning type: " + std::string(s));
}

// A prompt turn part: literal text, or an image slot naming a path/URL that
// the client resolves when the script is rendered to a request.
struct PromptPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string value;

  static PromptPart text_part(std::string text) {
    return {Kind::text, std::move(text)};
  }
  static PromptPart image_part(std::string ref) {
    return {Kind::image, std::move(ref)};
  }
};

struct PromptTurn {
  Role role = Role::user;
  std::vector<PromptPart> parts;
};

struct PromptScript {
  std::vector<PromptTurn> turns;
  LearningType learning_type = LearningType::zsl;
};

}  // namespace iclkit
