#include "iclkit/client.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "iclkit/rng.hpp"

// httplib is header-only; keep it out of our headers.
#include <httplib.h>

namespace iclkit {

using nlohmann::json;

void ChatRequest::validate() const {
  if (messages.empty()) throw InputError("ChatRequest: no messages");
  if (!(temperature >= 0.0)) throw DomainError("ChatRequest: temperature must be >= 0");
  if (max_tokens <= 0) throw DomainError("ChatRequest: max_tokens must be positive");
  for (std::size_t i = 0; i < messages.size(); ++i)
    if (messages[i].role == Role::system && i != 0)
      throw InputError("ChatRequest: system message must be first and unique");
}

void ClientConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    throw ConfigError("ClientConfig: base_url must be an absolute http(s) URL");
  if (timeout_ms <= 0) throw ConfigError("ClientConfig: timeout_ms must be positive");
  if (max_retries < 0) throw ConfigError("ClientConfig: max_retries must be >= 0");
  if (max_concurrency < 1) throw ConfigError("ClientConfig: max_concurrency must be >= 1");
}

namespace {

std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  auto slash = base_url.find('/', scheme_end + 3);
  if (slash == std::string::npos) return {base_url, ""};
  std::string origin = base_url.substr(0, slash);
  std::string prefix = base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {origin, prefix};
}

}  // namespace

struct HttpTransport::Impl {
  std::string origin;
  int timeout_ms = 30000;
};

HttpTransport::HttpTransport(const std::string& base_url, int timeout_ms)
    : impl_(std::make_unique<Impl>()) {
  impl_->origin = split_base_url(base_url).first;
  impl_->timeout_ms = timeout_ms;
}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::post(const std::string& path, const std::string& body,
                                 const HeaderList& headers) {
  httplib::Client cli(impl_->origin);
  cli.set_connection_timeout(std::chrono::milliseconds(impl_->timeout_ms));
  cli.set_read_timeout(std::chrono::milliseconds(impl_->timeout_ms));
  cli.set_write_timeout(std::chrono::milliseconds(impl_->timeout_ms));
  httplib::Headers hdrs;
  std::string content_type = "application/json";
  for (const auto& [name, value] : headers) {
    if (name == "Content-Type") content_type = value;
    else hdrs.emplace(name, value);
  }
  auto res = cli.Post(path, hdrs, body, content_type);
  HttpResponse out;
  if (!res) {
    out.status = -1;
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

void MockTransport::enqueue(HttpResponse response) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(response));
}

HttpResponse MockTransport::post(const std::string& path, const std::string& body,
                                 const HeaderList&) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
    ++in_flight_;
    peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
    bodies_.push_back(body);
  }
  HttpResponse out;
  if (handler_) {
    out = handler_(path, body);  // may block; concurrency stays observable
  } else {
    std::lock_guard lock(mu_);
    if (queue_.empty()) {
      out.status = -1;
      out.error = "mock transport: response queue empty";
    } else {
      out = std::move(queue_.front());
      queue_.pop_front();
    }
  }
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  return out;
}

int MockTransport::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

int MockTransport::max_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_in_flight_;
}

std::vector<std::string> MockTransport::bodies() const {
  std::lock_guard lock(mu_);
  return bodies_;
}

std::string ChatClient::serialize(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["messages"] = json::array();
  for (const auto& msg : request.messages) {
    json content = json::array();
    for (const auto& part : msg.parts) {
      if (part.kind == ContentPart::Kind::text)
        content.push_back({{"type", "text"}, {"text", part.value}});
      else
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", part.value}}}});
    }
    body["messages"].push_back({{"role", to_string(msg.role)}, {"content", std::move(content)}});
  }
  return body.dump();
}

ChatClient::ChatClient(ClientConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  path_prefix_ = split_base_url(config_.base_url).second;
  if (!transport_)
    transport_ = std::make_shared<HttpTransport>(config_.base_url, config_.timeout_ms);
  if (!config_.sleeper)
    config_.sleeper = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
  jitter_state_ = derive_stream(config_.jitter_seed, 0x6a69747465720ull);
}

namespace {

// RAII admission slot against the client's max_concurrency bound.
class ConcurrencySlotGuard {
 public:
  ConcurrencySlotGuard(std::mutex& mu, std::condition_variable& cv, int& active, int limit)
      : mu_(mu), cv_(cv), active_(active) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ < limit; });
    ++active_;
  }
  ~ConcurrencySlotGuard() {
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex& mu_;
  std::condition_variable& cv_;
  int& active_;
};

std::string body_excerpt(const std::string& body) {
  return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

Completion parse_completion(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not valid JSON: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw ProtocolError("response lacks choices");
  const auto& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content"))
    throw ProtocolError("response lacks message content");
  const auto& content = choice["message"]["content"];
  Completion out;
  if (content.is_string()) {
    out.text = content.get<std::string>();
  } else if (content.is_array()) {
    for (const auto& part : content)
      if (part.is_object() && part.value("type", "") == "text")
        out.text += part.value("text", "");
  } else {
    throw ProtocolError("message content has unsupported type");
  }
  out.finish_reason = choice.value("finish_reason", "");
  return out;
}

}  // namespace

Completion ChatClient::complete(const ChatRequest& request) {
  request.validate();
  std::string body = serialize(request);
  HeaderList headers{{"Content-Type", "application/json"}};
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw ConfigError("ChatClient: environment variable " + config_.api_key_env +
                        " is not set");
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  ConcurrencySlotGuard slot(mu_, slots_cv_, active_, config_.max_concurrency);
  const std::string path = path_prefix_ + "/chat/completions";
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    HttpResponse resp = transport_->post(path, body, headers);
    if (resp.status >= 200 && resp.status < 300) {
      Completion out = parse_completion(resp.body);
      out.attempts = attempt + 1;
      return out;
    }
    if (resp.status >= 0 && resp.status != 429 && resp.status < 500)
      throw RequestError("HTTP " + std::to_string(resp.status) + ": " +
                         body_excerpt(resp.body));
    last_error = resp.status < 0
                     ? (resp.error.empty() ? "transport failure" : resp.error)
                     : "HTTP " + std::to_string(resp.status);
    if (attempt == config_.max_retries) break;
    int delay = 500 * (1 << attempt);
    int jitter;
    {
      std::lock_guard lock(mu_);
      jitter_state_ = mix64(jitter_state_ + 0x9e3779b97f4a7c15ull);
      jitter = static_cast<int>(jitter_state_ % static_cast<std::uint64_t>(delay / 2 + 1));
    }
    config_.sleeper(delay + jitter);
  }
  throw TransportError("ChatClient: retries exhausted after " +
                       std::to_string(config_.max_retries + 1) + " attempts (" + last_error +
                       ")");
}

std::string detect_media_type(std::string_view bytes) {
  auto starts = [&](std::string_view prefix) {
    return bytes.size() >= prefix.size() && bytes.substr(0, prefix.size()) == prefix;
  };
  if (starts("\x89PNG\r\n\x1a\n")) return "image/png";
  if (starts("\xff\xd8\xff")) return "image/jpeg";
  if (starts("GIF8")) return "image/gif";
  if (bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WEBP")
    return "image/webp";
  return "application/octet-stream";
}

std::string base64_encode(std::string_view bytes) {
  static const char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (i + 2 == bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

namespace {

std::optional<std::string> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return buf.str();
}

}  // namespace

ChatRequest render_script(const PromptScript& script, const RenderOptions& options) {
  ChatRequest request;
  request.model = options.model;
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;
  const auto& loader = options.image_loader
                           ? options.image_loader
                           : std::function<std::optional<std::string>(const std::string&)>(
                                 read_file_bytes);
  for (const auto& turn : script.turns) {
    ChatMessage msg;
    msg.role = turn.role;
    for (const auto& part : turn.parts) {
      if (part.kind == PromptPart::Kind::text) {
        msg.parts.push_back({ContentPart::Kind::text, part.value});
        continue;
      }
      if (part.value.rfind("http://", 0) == 0 || part.value.rfind("https://", 0) == 0) {
        msg.parts.push_back({ContentPart::Kind::image_url, part.value});
        continue;
      }
      auto bytes = loader(part.value);
      if (!bytes) throw IoError("render_script: cannot read image " + part.value);
      if (bytes->size() > options.inline_limit) {
        msg.parts.push_back({ContentPart::Kind::image_url, part.value});
      } else {
        msg.parts.push_back({ContentPart::Kind::image_url,
                             "data:" + detect_media_type(*bytes) + ";base64," +
                                 base64_encode(*bytes)});
      }
    }
    request.messages.push_back(std::move(msg));
  }
  request.validate();
  return request;
}

}  // namespace iclkit
