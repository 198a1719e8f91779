#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iclkit/errors.hpp"
#include "iclkit/prompt.hpp"

namespace iclkit {

struct ContentPart {
  enum class Kind { text, image_url };
  Kind kind = Kind::text;
  std::string value;  // text body, or the image URL / data URL
};

struct ChatMessage {
  Role role = Role::user;
  std::vector<ContentPart> parts;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 256;

  // At most one system message and it must come first.
  void validate() const;
};

struct HttpResponse {
  int status = -1;  // negative: transport-level failure, see error
  std::string body;
  std::string error;
};

using HeaderList = std::vector<std::pair<std::string, std::string>>;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const HeaderList& headers) = 0;
};

// Real HTTP transport. A fresh connection per request keeps concurrent
// callers isolated.
class HttpTransport : public Transport {
 public:
  HttpTransport(const std::string& base_url, int timeout_ms);
  ~HttpTransport() override;
  HttpResponse post(const std::string& path, const std::string& body,
                    const HeaderList& headers) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Scripted transport for tests: either a handler function or a FIFO queue of
// canned responses. Thread-safe; tracks call volume and peak concurrency.
class MockTransport : public Transport {
 public:
  using Handler = std::function<HttpResponse(const std::string& path, const std::string& body)>;

  MockTransport() = default;
  explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}

  void enqueue(HttpResponse response);
  HttpResponse post(const std::string& path, const std::string& body,
                    const HeaderList& headers) override;

  int call_count() const;
  int max_in_flight() const;
  std::vector<std::string> bodies() const;

 private:
  Handler handler_;
  std::deque<HttpResponse> queue_;
  mutable std::mutex mu_;
  int calls_ = 0;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
  std::vector<std::string> bodies_;
};

struct ClientConfig {
  std::string base_url;
  std::string api_key_env;  // env var NAME; the key itself never lands in config
  int timeout_ms = 30000;
  int max_retries = 3;
  int max_concurrency = 4;
  std::uint64_t jitter_seed = 1987;
  std::function<void(int)> sleeper;  // milliseconds; injectable for tests

  void validate() const;
};

struct Completion {
  std::string text;
  std::string finish_reason;
  int attempts = 1;
};

// Chat-completions client: retries transport failures and 429/5xx with
// exponential backoff (500 ms base, factor 2, uniform jitter up to half the
// delay), bounds in-flight requests by max_concurrency, reads the bearer
// token from the environment variable named in the config.
class ChatClient {
 public:
  explicit ChatClient(ClientConfig config, std::shared_ptr<Transport> transport = nullptr);

  Completion complete(const ChatRequest& request);
  const ClientConfig& config() const { return config_; }

  static std::string serialize(const ChatRequest& request);

 private:
  ClientConfig config_;
  std::shared_ptr<Transport> transport_;
  std::string path_prefix_;
  std::mutex mu_;
  std::condition_variable slots_cv_;
  int active_ = 0;
  std::uint64_t jitter_state_;
};

struct RenderOptions {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 256;
  // Returns file bytes or nullopt; defaults to reading the filesystem.
  std::function<std::optional<std::string>(const std::string& ref)> image_loader;
  std::size_t inline_limit = 20ull * 1024 * 1024;
};

// Turns a prompt script into a wire request: local images under the inline
// limit become base64 data URLs with a sniffed media type, http(s) refs and
// oversized files pass through as URLs.
ChatRequest render_script(const PromptScript& script, const RenderOptions& options);

// Magic-byte sniffing for png/jpeg/gif/webp; anything else is
// application/octet-stream.
std::string detect_media_type(std::string_view bytes);

std::string base64_encode(std::string_view bytes);

}  // namespace iclkit
