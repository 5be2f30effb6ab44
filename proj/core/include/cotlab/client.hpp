#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cotlab/endpoint.hpp"
#include "cotlab/probe.hpp"
#include "json.hpp"

namespace cotlab::probe {

struct ChatResponse {
  bool ok = false;
  std::string error;       // set when !ok
  std::string error_kind;  // "transport" or "protocol"
  std::string content;
  std::map<std::string, double> top_logprobs;  // first generated token
  int top_logprob_count = 0;
  bool from_cache = false;
};

// Append-only JSONL response cache keyed by a digest of (model, messages,
// params). Concurrent readers are free; writes are serialized.
class ResponseCache {
 public:
  // Loads existing entries; the file is created lazily on first store.
  explicit ResponseCache(std::string path);

  static std::string request_hash(const nlohmann::json& request_body);

  std::optional<nlohmann::json> lookup(const std::string& hash) const;
  void store(const std::string& hash, const nlohmann::json& request_body,
             const nlohmann::json& response_body);
  std::size_t size() const;

 private:
  std::string path_;
  std::unordered_map<std::string, nlohmann::json> entries_;
  mutable std::mutex mutex_;
};

// OpenAI-compatible chat-completions client with retries, backoff and the
// response cache. COTLAB_BASE_URL overrides the configured base URL; the API
// key comes from the environment variable named in the config.
class ChatClient {
 public:
  ChatClient(EndpointConfig cfg, ResponseCache* cache);

  // probing=true requests probe_max_tokens plus top logprobs for the first
  // generated token; probing=false is plain generation.
  ChatResponse complete(const std::vector<ChatTurn>& messages, bool probing) const;

  const EndpointConfig& config() const { return cfg_; }

  static nlohmann::json request_body(const EndpointConfig& cfg,
                                     const std::vector<ChatTurn>& messages, bool probing);
  static ChatResponse parse_response(const nlohmann::json& body, bool probing);

 private:
  EndpointConfig cfg_;
  ResponseCache* cache_;
  std::string api_key_;
  std::string host_;  // scheme://host[:port]
  std::string path_prefix_;
};

}  // namespace cotlab::probe
